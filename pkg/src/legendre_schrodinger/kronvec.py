"""Kronecker products under the row-major vec convention.

Row-major vec stacks the rows of a matrix, so that

    vec(A @ B @ C) == kron(A, C.T) @ vec(B).

``kron_apply`` uses this identity to apply ``A (x) C^T`` to a vector without
forming the Kronecker product.  Operands may be dense arrays, ``None`` for the
identity, or any object supporting ``op @ X`` and ``X @ op`` on 2D arrays
(e.g. :class:`legendre_schrodinger.basis.MassMatrix`).
"""

from __future__ import annotations

import numpy as np


def kron(A, B):
    """Dense Kronecker product; block (i, j) of the result is ``A[i, j] * B``."""
    A = np.atleast_2d(np.asarray(A))
    B = np.atleast_2d(np.asarray(B))
    m, n = A.shape
    p, q = B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(m * p, n * q)


def vec_rowmajor(A):
    """Concatenate the rows of ``A`` into one vector."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("vec_rowmajor expects a 2D array")
    return A.reshape(-1).copy()


def unvec_rowmajor(v, m, n):
    """Inverse of :func:`vec_rowmajor`."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != m * n:
        raise ValueError(f"vector of length {v.size} cannot be reshaped to {m}x{n}")
    return v.reshape(m, n).copy()


def _dim(op):
    shape = getattr(op, "shape", None)
    if shape is None or len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError("operand must be square")
    return shape[0]


def kron_apply(A, C, x, m=None, p=None):
    """Return ``vec(A @ unvec(x) @ C)``, i.e. ``kron(A, C.T) @ x``.

    ``A`` acts on the row index and ``C`` on the column index of the
    reshaped vector.  Pass ``None`` for an identity factor; the missing
    dimension is then inferred from the vector length or taken from
    ``m`` / ``p``.  Leading axes of ``x`` are treated as a batch.
    """
    x = np.asarray(x)
    if A is not None:
        m = _dim(A)
    if C is not None:
        p = _dim(C)
    n = x.shape[-1]
    if m is None and p is None:
        raise ValueError("at least one dimension must be known")
    if m is None:
        m, rem = divmod(n, p)
        if rem:
            raise ValueError("vector length is not a multiple of the column size")
    if p is None:
        p, rem = divmod(n, m)
        if rem:
            raise ValueError("vector length is not a multiple of the row size")
    if n != m * p:
        raise ValueError(f"vector of length {n} does not match {m}x{p}")
    if A is None and C is None:
        return x.copy()
    X = x.reshape(x.shape[:-1] + (m, p))
    if A is not None:
        X = A @ X
    if C is not None:
        X = X @ C
    return np.ascontiguousarray(X).reshape(x.shape)
