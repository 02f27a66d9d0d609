"""Semidiscrete Legendre-Galerkin system

    -i M1 alpha' + M2 alpha - F(t) = 0,
    M1 = B (x) B,   M2 = gamma (B (x) I + I (x) B) - W,

with row-major vec(alpha).  Nothing of size (N-1)^2 x (N-1)^2 is formed on
the production path: M1 and the stiffness part of M2 go through banded
factors, and W (the psi-weighted mass) is applied by synthesizing alpha on
an LGL grid, multiplying by psi pointwise and projecting back.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh

from .basis import BasisSet, GridTransform, mass_matrix, mass_solve
from .kronvec import kron, kron_apply, vec_rowmajor
from .orthopoly import lgl_rule
from .problem import LiftedProblem, SchrodingerProblem, to_reference

DEFAULT_QUAD_MARGIN = 8
DENSE_N_LIMIT = 16


def _grid(rule):
    return np.meshgrid(rule.nodes, rule.nodes, indexing="ij")


def potential_apply(psi_samples, alpha, transform):
    """Matrix-free ``vec(W alpha)`` for coefficient vector(s) ``alpha``.

    ``psi_samples[p, q] = psi(x_p, x_q)`` on ``transform``'s LGL grid.
    Leading axes of ``alpha`` are a batch.
    """
    psi_samples = np.asarray(psi_samples)
    n = transform.rule.size
    if psi_samples.shape != (n, n):
        raise ValueError(f"psi samples of shape {psi_samples.shape} do not match {n}x{n} grid")
    m = transform.basis.dim
    alpha = np.asarray(alpha)
    A = alpha.reshape(alpha.shape[:-1] + (m, m))
    out = transform.analyze(psi_samples * transform.synthesize(A))
    return out.reshape(alpha.shape)


def potential_matrix_dense(psi, N, rule):
    """Dense W with entry ((l,m),(k,j)) = (psi phi_k phi_j, phi_l phi_m).

    ``psi`` is a callable psi(x, y) on the reference square.  Test oracle
    only; refuses N > 16.
    """
    if N > DENSE_N_LIMIT:
        raise ValueError(f"dense W is limited to N <= {DENSE_N_LIMIT}")
    S = BasisSet(N).sample(rule.nodes)
    X, Y = _grid(rule)
    Pw = np.asarray(psi(X, Y)) * np.outer(rule.weights, rule.weights)
    # W[l,m,k,j] = sum_pq Pw[p,q] S[p,l] S[q,m] S[p,k] S[q,j]
    W = np.einsum("pq,pl,qm,pk,qj->lmkj", Pw, S, S, S, S, optimize=True)
    d = N - 1
    return W.reshape(d * d, d * d)


def forcing_vector(lifted, transform, t):
    """``vec(F(t))`` with F_kj = (f_tilde(., ., t), phi_k phi_j)."""
    X, Y = _grid(transform.rule)
    return vec_rowmajor(transform.analyze(np.asarray(lifted.f_tilde(X, Y, t), dtype=complex)))


def initial_coeffs(lifted, transform):
    """alpha(t0) = B^{-1} U0 B^{-1} with (U0)_kj = (phi_hat, phi_k phi_j)."""
    X, Y = _grid(transform.rule)
    U0 = transform.analyze(np.asarray(lifted.phi_hat(X, Y), dtype=complex))
    return vec_rowmajor(mass_solve(mass_matrix(transform.basis.N), U0))


class SemidiscreteSystem:
    """Matrix-free operators of the semidiscrete ODE for one problem and N.

    ``apply_M1``, ``apply_M2`` and ``solve_M1`` accept vectors of length
    n = (N-1)^2 or stacks of them with shape (..., n).
    """

    def __init__(self, lifted: LiftedProblem, N: int, quad_margin: int = DEFAULT_QUAD_MARGIN):
        if N < 4:
            raise ValueError("N must be at least 4")
        if quad_margin < 2:
            raise ValueError("quad_margin must be at least 2")
        self.lifted = lifted
        self.N = N
        self.dim = N - 1
        self.n = self.dim**2
        self.gamma = lifted.gamma
        self.B = mass_matrix(N)
        self.rule = lgl_rule(N + quad_margin)
        self.transform = GridTransform(BasisSet(N), self.rule)
        X, Y = _grid(self.rule)
        psi = np.asarray(lifted.psi_tilde(X, Y))
        if np.iscomplexobj(psi):
            if np.max(np.abs(psi.imag)) > 0:
                raise ValueError("psi must be real")
            psi = psi.real
        self.psi_samples = np.broadcast_to(psi.astype(float), X.shape).copy()
        self.psi_samples.setflags(write=False)
        self._has_potential = bool(np.any(self.psi_samples != 0))
        self.alpha0 = initial_coeffs(lifted, self.transform)
        self.alpha0.setflags(write=False)

    @property
    def t0(self):
        return self.lifted.t0

    @property
    def T(self):
        return self.lifted.T

    def apply_M1(self, v):
        return kron_apply(self.B, self.B, v)

    def apply_stiffness(self, v):
        """gamma (B (x) I + I (x) B) v."""
        m = self.dim
        return self.gamma * (kron_apply(self.B, None, v, p=m) + kron_apply(None, self.B, v, m=m))

    def apply_W(self, v):
        if not self._has_potential:
            return np.zeros(np.shape(v), dtype=np.result_type(np.asarray(v).dtype, float))
        return potential_apply(self.psi_samples, v, self.transform)

    def apply_M2(self, v):
        return self.apply_stiffness(v) - self.apply_W(v)

    def solve_M1(self, v):
        v = np.asarray(v)
        m = self.dim
        X = v.reshape(v.shape[:-1] + (m, m))
        return np.ascontiguousarray(mass_solve(self.B, X)).reshape(v.shape)

    def forcing(self, t):
        return forcing_vector(self.lifted, self.transform, t)

    def mass(self, v):
        """Discrete L^2 mass v^H M1 v (real for Hermitian M1)."""
        return float(np.real(np.vdot(v, self.apply_M1(v))))

    def separable_stage_inverse(self, h, A):
        """Exact inverse of -i I_s (x) M1 + h A (x) gamma (B (x) I + I (x) B).

        This is the stage operator with the potential term dropped.  It is
        diagonalized by the eigenvectors of B in each direction and of the
        tableau matrix A across stages, so one application costs O(s N^3).
        """
        lam, Q = eigh(self.B.to_dense())
        d, T = np.linalg.eig(np.asarray(A, dtype=complex))
        Tinv = np.linalg.inv(T)
        m = self.dim
        pair_mass = np.outer(lam, lam)
        pair_stiff = self.gamma * (lam[:, None] + lam[None, :])
        denom = -1j * pair_mass[None] + h * d[:, None, None] * pair_stiff[None]
        s = d.size

        def apply(V):
            Z = np.asarray(V, dtype=complex).reshape(s, m, m)
            Z = np.tensordot(Tinv, Z, axes=1)
            Z = Q.T @ Z @ Q
            Z = Z / denom
            Z = Q @ Z @ Q.T
            return np.tensordot(T, Z, axes=1).reshape(np.shape(V))

        return apply

    def dense_M1(self):
        B = self.B.to_dense()
        return kron(B, B)

    def dense_M2(self):
        B = self.B.to_dense()
        eye = np.eye(self.dim)
        S = self.gamma * (kron(B, eye) + kron(eye, B))
        if not self._has_potential:
            return S
        return S - potential_matrix_dense(self.lifted.psi_tilde, self.N, self.rule)


def build_system(problem, N, quad_margin=DEFAULT_QUAD_MARGIN):
    """Assemble the semidiscrete system for a :class:`SchrodingerProblem`."""
    lifted = problem if isinstance(problem, LiftedProblem) else to_reference(problem)
    if not isinstance(lifted.problem, SchrodingerProblem):
        raise TypeError("expected a SchrodingerProblem")
    return SemidiscreteSystem(lifted, N, quad_margin)
