"""Restarted GMRES over the complex field with optional left preconditioning."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRECONDITIONERS = ("none", "stage_mass", "separable")


class GmresBreakdown(ArithmeticError):
    """Non-finite values appeared in the Arnoldi process."""


@dataclass(frozen=True)
class GmresConfig:
    tol: float = 1e-12
    restart: int = 50
    max_outer: int = 200
    preconditioner: str = "stage_mass"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValueError(f"preconditioner must be one of {PRECONDITIONERS}")


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one GMRES solve.

    ``final_relative_residual`` is measured on the (left-)preconditioned
    system, which is what the tolerance applies to; ``true_relative_residual``
    is ||b - A x|| / ||b|| for the unpreconditioned system.
    """

    iterations: int
    final_relative_residual: float
    converged: bool
    true_relative_residual: float = 0.0
    residual_history: tuple = field(default=(), repr=False)


def _givens(a, b):
    # complex Givens rotation zeroing b in (a, b)
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * np.conj(b) / r
    return c, s


def gmres_solve(apply, rhs, config=None, x0=None, precondition=None):
    """Solve ``apply(x) = rhs`` by restarted GMRES.

    Parameters
    ----------
    apply : callable
        Linear operator; receives and returns arrays shaped like ``rhs``.
    rhs : array_like
        Right-hand side of any shape.
    config : GmresConfig, optional
    x0 : array_like, optional
        Initial guess (zero if omitted).
    precondition : callable, optional
        Applies the inverse of a left preconditioner P^{-1}.  Convergence is
        judged on ||P^{-1}(b - A x)|| <= tol ||P^{-1} b||.

    Returns
    -------
    x, SolveReport
    """
    config = config or GmresConfig()
    b = np.asarray(rhs, dtype=complex)
    shape = b.shape

    def A(v):
        return np.asarray(apply(v.reshape(shape)), dtype=complex).reshape(-1)

    if precondition is None:
        def P(v):
            return v
    else:
        def P(v):
            return np.asarray(precondition(v.reshape(shape)), dtype=complex).reshape(-1)

    bf = b.reshape(-1)
    b_norm = np.linalg.norm(bf)
    if b_norm == 0:
        return np.zeros(shape, dtype=complex), SolveReport(0, 0.0, True, 0.0, ())
    Pb = P(bf)
    Pb_norm = np.linalg.norm(Pb)
    if not np.isfinite(Pb_norm) or Pb_norm == 0:
        raise GmresBreakdown("preconditioned right-hand side is not finite or zero")
    target = config.tol * Pb_norm

    x = np.zeros_like(bf) if x0 is None else np.asarray(x0, dtype=complex).reshape(-1).copy()
    m = config.restart
    total = 0
    history = []

    r = P(bf - A(x)) if x0 is not None else Pb.copy()
    beta = np.linalg.norm(r)
    history.append(beta / Pb_norm)
    for _ in range(config.max_outer):
        if beta <= target:
            break
        V = np.zeros((m + 1, bf.size), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        V[0] = r / beta
        k = 0
        for j in range(m):
            # copy: operators may hand back their input
            w = np.array(P(A(V[j])), dtype=complex)
            if not np.all(np.isfinite(w)):
                raise GmresBreakdown(f"non-finite Arnoldi vector at iteration {total + 1}")
            # modified Gram-Schmidt, then one reorthogonalization pass
            for _pass in range(2):
                for i in range(j + 1):
                    hij = np.vdot(V[i], w)
                    H[i, j] += hij
                    w -= hij * V[i]
            h_next = np.linalg.norm(w)
            H[j + 1, j] = h_next
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            total += 1
            k = j + 1
            res = abs(g[j + 1])
            history.append(res / Pb_norm)
            if res <= target or h_next <= 1e-14 * abs(H[j, j]):
                break
            V[j + 1] = w / h_next
        y = np.zeros(k, dtype=complex)
        for i in range(k - 1, -1, -1):
            y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:k]) / H[i, i]
        x = x + y @ V[:k]
        r = P(bf - A(x))
        beta = np.linalg.norm(r)
        if not np.isfinite(beta):
            raise GmresBreakdown("non-finite residual after restart")

    rel = beta / Pb_norm
    true_rel = np.linalg.norm(bf - A(x)) / b_norm
    report = SolveReport(
        iterations=total,
        final_relative_residual=float(rel),
        converged=bool(rel <= config.tol),
        true_relative_residual=float(true_rel),
        residual_history=tuple(float(h) for h in history),
    )
    return x.reshape(shape), report
