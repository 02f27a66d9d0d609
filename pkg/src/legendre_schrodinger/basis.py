"""Boundary-vanishing Legendre basis phi_k = c_k (L_k - L_{k+2}).

With c_k = 1/sqrt(4k+6) the stiffness matrix (phi_j', phi_k') is the
identity and the mass matrix (phi_j, phi_k) is symmetric pentadiagonal with
nonzeros only at offsets 0 and +-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .orthopoly import QuadratureRule, legendre_deriv_table, legendre_table


class MassFactorizationError(RuntimeError):
    """The mass matrix bands do not describe a positive definite matrix."""


@dataclass(frozen=True)
class BasisSet:
    """The N-1 functions phi_0 .. phi_{N-2} spanning {v in P_N : v(+-1) = 0}."""

    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("basis requires N >= 2")

    @property
    def dim(self):
        return self.N - 1

    @cached_property
    def c(self):
        k = np.arange(self.dim)
        return 1.0 / np.sqrt(4 * k + 6)

    def eval(self, k, x):
        if not 0 <= k <= self.N - 2:
            raise IndexError(f"basis index {k} outside 0..{self.N - 2}")
        L = legendre_table(k + 2, x)
        out = self.c[k] * (L[k] - L[k + 2])
        return out if np.ndim(x) else float(out)

    def sample(self, x):
        """Matrix ``S[p, k] = phi_k(x_p)`` of shape (len(x), N-1)."""
        L = legendre_table(self.N, np.atleast_1d(x))
        return (self.c[:, None] * (L[:-2] - L[2:])).T

    def sample_deriv(self, x):
        """Matrix ``D[p, k] = phi_k'(x_p)``."""
        dL = legendre_deriv_table(self.N, np.atleast_1d(x))
        return (self.c[:, None] * (dL[:-2] - dL[2:])).T


@dataclass(frozen=True, eq=False)
class MassMatrix:
    """Symmetric pentadiagonal mass matrix stored as its two nonzero bands.

    ``diag[k]`` is b_kk and ``off2[k]`` is b_{k,k+2} = b_{k+2,k}.  Supports
    ``M @ X`` and ``X @ M`` with numpy matmul broadcasting, so it can be used directly as a
    factor in :func:`legendre_schrodinger.kronvec.kron_apply`.  The Cholesky
    factors of the even- and odd-index tridiagonal blocks are computed once
    at construction.
    """

    diag: np.ndarray
    off2: np.ndarray
    _factors: tuple = field(init=False, repr=False)

    # make ndarray defer to __rmatmul__
    __array_ufunc__ = None

    def __post_init__(self):
        if self.off2.size != max(self.diag.size - 2, 0):
            raise ValueError("off2 must have length dim-2")
        self.diag.setflags(write=False)
        self.off2.setflags(write=False)
        factors = []
        for parity in (0, 1):
            d = self.diag[parity::2]
            e = self.off2[parity::2]
            if d.size == 0:
                factors.append(None)
                continue
            ab = np.zeros((2, d.size))
            ab[0, 1:] = e
            ab[1] = d
            try:
                factors.append(cholesky_banded(ab, lower=False))
            except LinAlgError as exc:
                raise MassFactorizationError(str(exc)) from exc
        object.__setattr__(self, "_factors", tuple(factors))

    @property
    def dim(self):
        return self.diag.size

    @property
    def shape(self):
        return (self.dim, self.dim)

    def to_dense(self):
        B = np.diag(self.diag)
        if self.dim > 2:
            B += np.diag(self.off2, 2) + np.diag(self.off2, -2)
        return B

    def _rows(self, X):
        # matrix rows live on axis 0 for vectors and on axis -2 otherwise,
        # matching numpy's matmul broadcasting rules
        X = np.asarray(X)
        axis = 0 if X.ndim == 1 else X.ndim - 2
        if X.shape[axis] != self.dim:
            raise ValueError(f"dimension mismatch: {X.shape[axis]} vs {self.dim}")
        return np.moveaxis(X, axis, 0), axis

    def matmul(self, X):
        """Return ``B @ X``."""
        Xr, axis = self._rows(X)
        shape = (-1,) + (1,) * (Xr.ndim - 1)
        d = self.diag.reshape(shape)
        e = self.off2.reshape(shape)
        Y = d * Xr
        if self.dim > 2:
            Y[:-2] += e * Xr[2:]
            Y[2:] += e * Xr[:-2]
        return np.moveaxis(Y, 0, axis)

    def __matmul__(self, X):
        return self.matmul(X)

    def __rmatmul__(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            return self.matmul(X)
        return np.swapaxes(self.matmul(np.swapaxes(X, -1, -2)), -1, -2)

    def solve(self, R):
        """Return ``B^{-1} @ R``."""
        Rr, axis = self._rows(R)
        flat = Rr.reshape(self.dim, -1)
        X = np.empty(flat.shape, dtype=np.result_type(flat.dtype, float))
        for parity, cb in enumerate(self._factors):
            if cb is not None:
                X[parity::2] = cho_solve_banded((cb, False), flat[parity::2])
        return np.moveaxis(X.reshape(Rr.shape), 0, axis)

    def rsolve(self, R):
        """Return ``R @ B^{-1}``."""
        R = np.asarray(R)
        if R.ndim == 1:
            return self.solve(R)
        return np.swapaxes(self.solve(np.swapaxes(R, -1, -2)), -1, -2)


def mass_matrix(N):
    """Closed-form mass matrix of the basis phi_0..phi_{N-2}."""
    if N < 2:
        raise ValueError("mass matrix requires N >= 2")
    k = np.arange(N - 1)
    c = 1.0 / np.sqrt(4 * k + 6)
    diag = c**2 * (2.0 / (2 * k + 1) + 2.0 / (2 * k + 5))
    j = k[:-2]
    off2 = -c[j] * c[j + 2] * 2.0 / (2 * j + 5)
    return MassMatrix(diag=diag, off2=off2)


def mass_solve(M, R):
    """Solve ``B X B = R`` for X using the banded factorization of B.

    Leading batch dimensions of ``R`` are carried through.
    """
    return M.rsolve(M.solve(R))


def synthesize(alpha, gridx, gridy=None):
    """Evaluate sum_kj alpha_kj phi_k(x_p) phi_j(y_q) on a tensor grid."""
    alpha = np.asarray(alpha)
    if alpha.ndim != 2 or alpha.shape[0] != alpha.shape[1]:
        raise ValueError("coefficient matrix must be square")
    basis = BasisSet(alpha.shape[0] + 1)
    Sx = basis.sample(gridx)
    Sy = Sx if gridy is None else basis.sample(gridy)
    return Sx @ alpha @ Sy.T


def analyze(g, rule, N):
    """Inner products ``(g, phi_l phi_m)`` by LGL quadrature on ``rule``'s grid."""
    return GridTransform(BasisSet(N), rule).analyze(g)


class GridTransform:
    """Precomputed basis samples on a tensor LGL grid.

    ``synthesize`` maps coefficients to nodal values and ``analyze`` maps
    nodal values to inner products against phi_l(x) phi_m(y).  Both are two
    dense matrix products, O(N^2 G) each.
    """

    def __init__(self, basis: BasisSet, rule: QuadratureRule):
        if rule.order < basis.N + 2:
            raise ValueError(
                f"quadrature order {rule.order} too coarse for N={basis.N} (need >= N+2)"
            )
        self.basis = basis
        self.rule = rule
        self.S = basis.sample(rule.nodes)
        self.S.setflags(write=False)
        self.WS = rule.weights[:, None] * self.S
        self.WS.setflags(write=False)

    def synthesize(self, alpha):
        return self.S @ alpha @ self.S.T

    def analyze(self, g):
        g = np.asarray(g)
        n = self.rule.size
        if g.shape[-2:] != (n, n):
            raise ValueError(f"field of shape {g.shape} does not match {n}x{n} grid")
        return self.WS.T @ g @ self.WS
