"""Implicit Runge-Kutta integration of  -i M1 y' + M2 y - f(t) = 0.

With y' = i M1^{-1} (f - M2 y), the s stage vectors k_l (rows of K) solve

    -i M1 k_l + h sum_j a_lj M2 k_j = -i M1 y_n + h sum_j a_lj f(t_n + c_j h),

i.e. (-i I_s (x) M1 + h A (x) M2) vec(K) = -i 1_s (x) (M1 y_n) + h (A (x) I) vec(F),
solved with GMRES on the (s, n) stage block without forming either
Kronecker product.  The step is completed through

    M1 (y_{n+1} - y_n) = i h sum_l b_l (f_l - M2 k_l).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gmres import GmresConfig, SolveReport, gmres_solve


@dataclass(frozen=True)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        s = self.b.size
        if self.A.shape != (s, s) or self.c.size != s:
            raise ValueError("inconsistent tableau dimensions")
        for arr in (self.A, self.b, self.c):
            arr.setflags(write=False)

    @property
    def s(self):
        return self.b.size

    @property
    def is_diagonally_implicit(self):
        return bool(np.all(np.triu(self.A, 1) == 0))


def gauss3_tableau():
    """Three-stage Gauss-Legendre collocation (order 6)."""
    r = np.sqrt(15.0)
    A = np.array(
        [
            [5 / 36, 2 / 9 - r / 15, 5 / 36 - r / 30],
            [5 / 36 + r / 24, 2 / 9, 5 / 36 - r / 24],
            [5 / 36 + r / 30, 2 / 9 + r / 15, 5 / 36],
        ]
    )
    b = np.array([5 / 18, 4 / 9, 5 / 18])
    c = np.array([1 / 2 - r / 10, 1 / 2, 1 / 2 + r / 10])
    return ButcherTableau(A, b, c, name="gauss3")


@dataclass(frozen=True)
class StepperState:
    """Solution y at time t after ``step_count`` steps.

    ``stages`` keeps the last stage block and is used to warm-start GMRES.
    """

    t: float
    y: np.ndarray
    step_count: int = 0
    stages: Optional[np.ndarray] = field(default=None, repr=False)


class StepFailure(RuntimeError):
    """The stage system of a step could not be solved to tolerance."""

    def __init__(self, message, report: SolveReport, step_index: int | None = None):
        super().__init__(message)
        self.report = report
        self.step_index = step_index


class MatrixSystem:
    """Dense M1, M2 and forcing f(t); the reference implementation for small systems."""

    def __init__(self, M1, M2, forcing: Callable | None = None):
        self.M1 = np.atleast_2d(np.asarray(M1, dtype=complex))
        self.M2 = np.atleast_2d(np.asarray(M2, dtype=complex))
        self.n = self.M1.shape[0]
        self._forcing = forcing

    def apply_M1(self, v):
        return np.asarray(v) @ self.M1.T

    def apply_M2(self, v):
        return np.asarray(v) @ self.M2.T

    def solve_M1(self, v):
        v = np.asarray(v)
        return np.linalg.solve(self.M1, v.reshape(-1, self.n).T).T.reshape(v.shape)

    def forcing(self, t):
        if self._forcing is None:
            return np.zeros(self.n, dtype=complex)
        return np.asarray(self._forcing(t), dtype=complex).reshape(self.n)


def stage_forcing(system, t, h, tab):
    return np.stack([system.forcing(t + cl * h) for cl in tab.c])


def stage_operator(system, h, tab):
    """Matrix-free action of -i I_s (x) M1 + h A (x) M2 on an (s, n) block."""
    A = tab.A

    def apply(K):
        return -1j * system.apply_M1(K) + h * (A @ system.apply_M2(K))

    return apply


def stage_preconditioner(system, h, tab, kind):
    """Inverse of a left preconditioner for the stage system, or None.

    ``stage_mass`` inverts the block -i I_s (x) M1 exactly.  ``separable``
    additionally includes h A (x) (stiffness part of M2) and needs a system
    exposing ``separable_stage_inverse``.
    """
    if kind == "none":
        return None
    if kind == "stage_mass":
        def apply(V):
            return 1j * system.solve_M1(V)
        return apply
    if kind == "separable":
        builder = getattr(system, "separable_stage_inverse", None)
        if builder is None:
            raise ValueError("system does not support the separable preconditioner")
        return builder(h, tab.A)
    raise ValueError(f"unknown preconditioner {kind!r}")


def irk_step(system, state, h, tab, gmres=None, update="mass", F=None, precondition=None):
    """Advance ``state`` by one step of size ``h``.

    ``update="mass"`` completes the step through an exact M1 solve;
    ``update="stages"`` uses the algebraically equivalent
    y_{n+1} = y_n + b^T A^{-1} (K - 1_s y_n).  ``precondition`` overrides the
    preconditioner named in ``gmres`` (useful to reuse one across steps).
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    gmres = gmres or GmresConfig()
    y = np.asarray(state.y, dtype=complex)
    t = state.t
    A = tab.A
    if F is None:
        F = stage_forcing(system, t, h, tab)
    rhs = -1j * np.broadcast_to(system.apply_M1(y), (tab.s, y.size)) + h * (A @ F)
    if precondition is None:
        precondition = stage_preconditioner(system, h, tab, gmres.preconditioner)
    K0 = state.stages if state.stages is not None else np.broadcast_to(y, (tab.s, y.size))
    K, report = gmres_solve(stage_operator(system, h, tab), rhs, gmres, x0=K0, precondition=precondition)
    if not report.converged:
        raise StepFailure(
            f"stage system did not converge at t={t:.6g} "
            f"(relative residual {report.final_relative_residual:.3e})",
            report,
            state.step_count,
        )
    if update == "mass":
        incr = tab.b @ (F - system.apply_M2(K))
        y_new = y + 1j * h * system.solve_M1(incr)
    elif update == "stages":
        d = np.linalg.solve(A.T, tab.b)
        y_new = y + d @ (K - y)
    else:
        raise ValueError(f"unknown update {update!r}")
    return StepperState(t + h, y_new, state.step_count + 1, K)


def step_count(t0, T, h, tol=1e-9):
    """Number of steps of size h from t0 to T; rejects h that does not divide T - t0."""
    if not h > 0:
        raise ValueError("step size must be positive")
    ratio = (T - t0) / h
    n = int(round(ratio))
    if abs(ratio - n) > tol:
        raise ValueError(f"(T - t0)/h = {ratio!r} is not an integer")
    return n


def integrate(system, t0, T, h, tab=None, gmres=None, observer=None, y0=None,
              record=False, update="mass"):
    """Integrate from t0 to T with fixed step h.

    ``observer(step_index, t, y)`` is called for the initial state (index 0)
    and after every step, with a read-only view of y.  Returns the final
    :class:`StepperState`, or ``(state, trajectory)`` when ``record`` is set.
    """
    tab = tab or gauss3_tableau()
    gmres = gmres or GmresConfig()
    nsteps = step_count(t0, T, h)
    precondition = stage_preconditioner(system, h, tab, gmres.preconditioner)
    y = np.array(system.alpha0 if y0 is None else y0, dtype=complex)
    state = StepperState(float(t0), y, 0)
    traj = [(state.t, y.copy())] if record else None

    def notify(st):
        if observer is not None:
            view = st.y.view()
            view.setflags(write=False)
            observer(st.step_count, st.t, view)

    notify(state)
    for i in range(nsteps):
        try:
            state = irk_step(system, state, h, tab, gmres, update=update,
                             precondition=precondition)
        except StepFailure as exc:
            exc.step_index = i
            raise
        # land on the exact grid time instead of accumulating h
        t_exact = T if i == nsteps - 1 else t0 + (i + 1) * h
        state = StepperState(t_exact, state.y, state.step_count, state.stages)
        notify(state)
        if record:
            traj.append((state.t, state.y.copy()))
    if record:
        return state, traj
    return state
