"""End-to-end solves, error norms and convergence sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .assembly import DEFAULT_QUAD_MARGIN, build_system
from .basis import BasisSet
from .gmres import GmresConfig
from .irk import MatrixSystem, gauss3_tableau, integrate
from .orthopoly import lgl_rule
from .problem import problem_by_name

SAMPLE_TIMES = (0.10, 0.25, 0.50, 0.75, 1.00)
DEFAULT_K0 = 1.0


@dataclass(frozen=True)
class RunConfig:
    problem: str = "test1"
    N: int = 18
    h: float = 0.05
    k0: Optional[float] = None
    t0: Optional[float] = None
    T: Optional[float] = None
    quad_margin: int = DEFAULT_QUAD_MARGIN
    gmres: GmresConfig = field(default_factory=GmresConfig)

    def __post_init__(self):
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if not self.h > 0:
            raise ValueError("h must be positive")

    def make_problem(self):
        p = problem_by_name(self.problem, self.k0)
        if self.t0 is None and self.T is None:
            return p
        t0 = p.t0 if self.t0 is None else self.t0
        T = p.T if self.T is None else self.T
        if p.exact is None:
            return replace(p, t0=t0, T=T)
        exact = p.exact
        # keep the initial data consistent with the shifted start time
        return replace(p, t0=t0, T=T, phi=lambda x, y: exact(x, y, t0))


@dataclass(frozen=True)
class ErrorReport:
    t: float
    max_re: float
    max_im: float
    avg_re: float
    avg_im: float
    l2_re: float
    l2_im: float

    def row(self):
        return (self.t, self.max_re, self.max_im, self.avg_re, self.avg_im, self.l2_re, self.l2_im)


ERROR_COLUMNS = ("t", "max_re", "max_im", "avg_re", "avg_im", "l2_re", "l2_im")


def error_grid(problem, N):
    """Physical LGL nodes (N+1 per direction) and 2D weights including the Jacobian."""
    rule = lgl_rule(N)
    x = problem.to_physical(rule.nodes)
    jac = ((problem.d - problem.c) / 2) ** 2
    return x, rule, np.outer(rule.weights, rule.weights) * jac


def reconstruct_solution(alpha, lifted, x, y, t):
    """u(x_p, y_q, t) on a tensor grid of physical points from coefficients alpha.

    u = sum alpha_kj phi_k phi_j + (u1 + u2), evaluated at the mapped points.
    """
    p = lifted.problem
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = p.c - 1e-12 * (p.d - p.c), p.d + 1e-12 * (p.d - p.c)
    if np.any((x < lo) | (x > hi)) or np.any((y < lo) | (y > hi)):
        raise ValueError("grid points must lie in [c, d]^2")
    xr = np.clip(p.to_reference_coord(x), -1.0, 1.0)
    yr = np.clip(p.to_reference_coord(y), -1.0, 1.0)
    alpha = np.asarray(alpha)
    m = int(round(math.sqrt(alpha.size)))
    basis = BasisSet(m + 1)
    A = alpha.reshape(m, m)
    field_ = basis.sample(xr) @ A @ basis.sample(yr).T
    Xr, Yr = np.meshgrid(xr, yr, indexing="ij")
    return field_ + lifted.lifting(Xr, Yr, t)


def discrete_l2_error(numeric, exact, rule, c=-1.0, d=1.0):
    """sqrt(sum (v_N - v)^2 w_k w_m) with weights scaled to (c,d)^2."""
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    n = rule.size
    if numeric.shape != (n, n) or exact.shape != (n, n):
        raise ValueError(f"fields must be sampled on the {n}x{n} LGL grid")
    W = np.outer(rule.weights, rule.weights) * ((d - c) / 2) ** 2
    return float(np.sqrt(np.sum((numeric - exact) ** 2 * W)))


def nodal_errors(u_num, u_exact, rule, c, d, t):
    err = np.asarray(u_num) - np.asarray(u_exact)
    ar, ai = np.abs(err.real), np.abs(err.imag)
    return ErrorReport(
        t=float(t),
        max_re=float(ar.max()),
        max_im=float(ai.max()),
        avg_re=float(ar.mean()),
        avg_im=float(ai.mean()),
        l2_re=discrete_l2_error(np.real(u_num), np.real(u_exact), rule, c, d),
        l2_im=discrete_l2_error(np.imag(u_num), np.imag(u_exact), rule, c, d),
    )


@dataclass
class SolveResult:
    config: RunConfig
    system: object
    snapshots: dict  # t -> coefficient vector
    final_t: float

    @property
    def problem(self):
        return self.system.lifted.problem

    def solution(self, t=None):
        """Nodal solution on the error grid at time t (default: final)."""
        t = self.final_t if t is None else t
        x, _, _ = error_grid(self.problem, self.config.N)
        return x, reconstruct_solution(self.snapshots[t], self.system.lifted, x, x, t)

    def errors(self, t=None):
        p = self.problem
        if p.exact is None:
            raise ValueError("problem has no exact solution attached")
        t = self.final_t if t is None else t
        x, rule, _ = error_grid(p, self.config.N)
        u = reconstruct_solution(self.snapshots[t], self.system.lifted, x, x, t)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return nodal_errors(u, p.exact(X, Y, t), rule, p.c, p.d, t)


def _step_index(t, t0, h, tol=1e-9):
    r = (t - t0) / h
    k = int(round(r))
    if abs(r - k) > tol or k < 0:
        raise ValueError(f"sample time {t} is not on the step grid t0 + k*h")
    return k


def run(config: RunConfig, sample_times: Sequence[float] = ()):
    """Solve one configuration, keeping coefficients at the requested times."""
    problem = config.make_problem()
    system = build_system(problem, config.N, config.quad_margin)
    t0, T = problem.t0, problem.T
    wanted = {}
    for t in sample_times:
        k = _step_index(t, t0, config.h)
        if t > T + 1e-12:
            raise ValueError(f"sample time {t} beyond T={T}")
        wanted[k] = float(t)
    snapshots = {}

    def observer(step, t, y):
        if step in wanted:
            snapshots[wanted[step]] = np.array(y)

    state = integrate(system, t0, T, config.h, gauss3_tableau(), config.gmres, observer=observer)
    snapshots[float(T)] = np.array(state.y)
    return SolveResult(config, system, snapshots, float(T))


def error_table(config: RunConfig, sample_times=SAMPLE_TIMES):
    result = run(config, sample_times)
    return [result.errors(t) for t in sample_times]


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def convergence_sweep(config: RunConfig, Ns: Sequence[int], h=None, workers=1):
    """Rows (N, l2_re, l2_im) at the final time, in the order of ``Ns``."""
    Ns = list(Ns)
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be strictly ascending")
    h = config.h if h is None else h

    def one(N):
        e = run(replace(config, N=N, h=h)).errors()
        return (N, e.l2_re, e.l2_im)

    return _map(one, Ns, workers)


def fit_slope(hs, errs):
    """Least-squares slope of log(err) against log(h); None for fewer than two points."""
    if len(hs) < 2:
        return None
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def surrogate_errors(h, t0=0.0, T=1.0, gmres=None):
    """Error of Gauss-3 on y' = i y, y(0) = 1 at T; returns (|Re err|, |Im err|)."""
    gmres = gmres or GmresConfig(tol=1e-14, preconditioner="none")
    system = MatrixSystem([[1.0]], [[-1.0]])
    state = integrate(system, t0, T, h, gauss3_tableau(), gmres, y0=[1.0])
    err = state.y[0] - np.exp(1j * (T - t0))
    return abs(err.real), abs(err.imag)


def time_order_sweep(config: RunConfig, hs: Sequence[float], N=None, workers=1):
    """Rows (h, l2_re, l2_im) and the fitted order.

    ``config.problem == "surrogate"`` runs the scalar test y' = i y instead
    of a PDE.  The slope is fitted to the combined error sqrt(re^2 + im^2).
    """
    hs = list(hs)
    if config.problem == "surrogate":
        rows = [(h,) + surrogate_errors(h) for h in hs]
    else:
        N = config.N if N is None else N

        def one(h):
            e = run(replace(config, N=N, h=h)).errors()
            return (h, e.l2_re, e.l2_im)

        rows = _map(one, hs, workers)
    slope = fit_slope([r[0] for r in rows], [math.hypot(r[1], r[2]) for r in rows])
    return rows, slope


def error_surface(config: RunConfig):
    """Long-format rows (x, y, |Re err|, |Im err|) at the final time."""
    result = run(config)
    p = result.problem
    x, u = result.solution()
    X, Y = np.meshgrid(x, x, indexing="ij")
    err = u - p.exact(X, Y, result.final_t)
    return [
        (X[i, j], Y[i, j], abs(err[i, j].real), abs(err[i, j].imag))
        for i in range(x.size)
        for j in range(x.size)
    ]
