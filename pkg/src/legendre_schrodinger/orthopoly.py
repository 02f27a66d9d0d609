"""Legendre polynomials and Legendre-Gauss-Lobatto quadrature on [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NEWTON_TOL = 1e-14
NEWTON_MAXITER = 100


class QuadratureError(RuntimeError):
    """Raised when LGL node iteration fails to converge."""


def legendre_eval(n, x):
    """Evaluate the Legendre polynomial L_n at ``x`` (scalar or array).

    Uses the three-term recurrence
    (k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def legendre_deriv(n, x):
    """Evaluate L_n'(x).

    Computed by the recurrence L_{k+1}' = L_{k-1}' + (2k+1) L_k, which is
    free of the 1/(1-x^2) singularity at the endpoints.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    if n == 0:
        out = np.zeros_like(x)
        return out if out.ndim else float(out)
    L_prev, L = np.ones_like(x), x.copy()
    d_prev, d = np.zeros_like(x), np.ones_like(x)
    for k in range(1, n):
        L_prev, L, d_prev, d = (
            L,
            ((2 * k + 1) * x * L - k * L_prev) / (k + 1),
            d,
            d_prev + (2 * k + 1) * L,
        )
    return d if d.ndim else float(d)


def legendre_table(nmax, x):
    """Return an array of shape (nmax+1,) + x.shape holding L_0..L_nmax at x."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_deriv_table(nmax, x):
    """Return L_0'..L_nmax' at x, shape (nmax+1,) + x.shape."""
    x = np.asarray(x, dtype=float)
    L = legendre_table(nmax, x)
    out = np.zeros_like(L)
    if nmax >= 1:
        out[1] = 1.0
    for k in range(1, nmax):
        out[k + 1] = out[k - 1] + (2 * k + 1) * L[k]
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Legendre-Gauss-Lobatto rule with ``order + 1`` points.

    Exact for polynomials of degree <= 2*order - 1.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self):
        return self.order + 1

    def integrate(self, values):
        """Integrate samples taken at the nodes over [-1, 1]."""
        values = np.asarray(values)
        if values.shape[0] != self.size:
            raise ValueError(f"expected {self.size} samples, got {values.shape[0]}")
        return self.weights @ values


def _interior_nodes(Q):
    # Newton on L_Q' using (1-x^2) L_Q'' = 2x L_Q' - Q(Q+1) L_Q
    j = np.arange(1, Q)
    x = -np.cos(np.pi * j / Q)
    for _ in range(NEWTON_MAXITER):
        L = legendre_eval(Q, x)
        dL = legendre_deriv(Q, x)
        d2L = (2 * x * dL - Q * (Q + 1) * L) / (1 - x * x)
        dx = dL / d2L
        x = x - dx
        if np.max(np.abs(dx), initial=0.0) <= NEWTON_TOL:
            break
    else:
        raise QuadratureError(f"LGL Newton iteration did not converge for Q={Q}")
    scale = max(1.0, Q * (Q + 1) / 2)
    resid = np.max(np.abs(legendre_deriv(Q, x)), initial=0.0) / scale
    if resid > 1e2 * NEWTON_TOL * Q:
        raise QuadratureError(f"LGL node residual {resid:.3e} too large for Q={Q}")
    return x


def lgl_rule(Q):
    """Build the (Q+1)-point Legendre-Gauss-Lobatto rule.

    Nodes are the roots of (1 - x^2) L_Q'(x); weights are
    2 / (Q (Q+1) L_Q(x_k)^2).
    """
    if Q < 1:
        raise ValueError("LGL rule requires Q >= 1")
    x = np.empty(Q + 1)
    x[0], x[-1] = -1.0, 1.0
    if Q > 1:
        x[1:-1] = _interior_nodes(Q)
    # enforce exact antisymmetry
    x = 0.5 * (x - x[::-1])
    w = 2.0 / (Q * (Q + 1) * legendre_eval(Q, x) ** 2)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=x, weights=w, order=Q)


def integrate_2d(f, rule):
    """Tensor-product LGL integral of samples ``f[p, q] = f(x_p, x_q)`` over (-1,1)^2."""
    f = np.asarray(f)
    n = rule.size
    if f.shape != (n, n):
        raise ValueError(f"samples of shape {f.shape} do not match a {n}x{n} grid")
    w = rule.weights
    return complex(w @ f @ w) if np.iscomplexobj(f) else float(w @ f @ w)
