"""Problem definitions on (c,d)^2 and their homogenized image on (-1,1)^2.

The equation is  -i u_t = Laplacian(u) + psi(x, y) u  with Dirichlet data

    g1: bottom edge y = c   (parametrised by x)
    g2: top edge    y = d   (parametrised by x)
    g3: left edge   x = c   (parametrised by y)
    g4: right edge  x = d   (parametrised by y)

All field callables must accept broadcastable numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

COMPAT_TOL = 1e-8
FD_STEP = 1e-3


class CompatibilityError(ValueError):
    """Initial and boundary data disagree on the boundary."""


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data g(s, t) on one edge with its t- and s-derivatives."""

    value: Callable
    dt: Callable
    dss: Callable


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form solution u(x, y, t) with the derivatives needed for verification."""

    value: Callable
    dt: Callable
    dxx: Callable
    dyy: Callable

    def __call__(self, x, y, t):
        return self.value(x, y, t)

    def boundary(self, c, d):
        """Boundary records (g1, g2, g3, g4) obtained by tracing this solution."""
        v, dt, dxx, dyy = self.value, self.dt, self.dxx, self.dyy
        return (
            BoundaryData(lambda s, t: v(s, c, t), lambda s, t: dt(s, c, t), lambda s, t: dxx(s, c, t)),
            BoundaryData(lambda s, t: v(s, d, t), lambda s, t: dt(s, d, t), lambda s, t: dxx(s, d, t)),
            BoundaryData(lambda s, t: v(c, s, t), lambda s, t: dt(c, s, t), lambda s, t: dyy(c, s, t)),
            BoundaryData(lambda s, t: v(d, s, t), lambda s, t: dt(d, s, t), lambda s, t: dyy(d, s, t)),
        )


@dataclass(frozen=True)
class SchrodingerProblem:
    c: float
    d: float
    t0: float
    T: float
    psi: Callable
    phi: Callable
    g1: BoundaryData
    g2: BoundaryData
    g3: BoundaryData
    g4: BoundaryData
    exact: Optional[ExactSolution] = None
    name: str = "custom"

    def __post_init__(self):
        if not self.d > self.c:
            raise ValueError("domain requires d > c")
        if not self.T > self.t0:
            raise ValueError("time interval requires T > t0")
        self.check_compatibility()

    def check_compatibility(self, tol=COMPAT_TOL, samples=17):
        """Raise :class:`CompatibilityError` if phi's trace or the corners disagree with g."""
        c, d, t0 = self.c, self.d, self.t0
        s = np.linspace(c, d, samples)
        edges = (
            ("g1", self.g1, self.phi(s, np.full_like(s, c))),
            ("g2", self.g2, self.phi(s, np.full_like(s, d))),
            ("g3", self.g3, self.phi(np.full_like(s, c), s)),
            ("g4", self.g4, self.phi(np.full_like(s, d), s)),
        )
        for label, g, trace in edges:
            err = np.max(np.abs(g.value(s, t0) - trace))
            if err > tol:
                raise CompatibilityError(f"initial data differs from {label} by {err:.3e}")
        for t in (self.t0, 0.5 * (self.t0 + self.T), self.T):
            corners = (
                (self.g1.value(c, t), self.g3.value(c, t)),
                (self.g1.value(d, t), self.g4.value(c, t)),
                (self.g2.value(c, t), self.g3.value(d, t)),
                (self.g2.value(d, t), self.g4.value(d, t)),
            )
            for a, b in corners:
                if abs(a - b) > tol:
                    raise CompatibilityError(
                        f"boundary data disagree at a corner at t={t}: {abs(a - b):.3e}"
                    )

    def to_physical(self, xr):
        return self.c + 0.5 * (np.asarray(xr) + 1.0) * (self.d - self.c)

    def to_reference_coord(self, x):
        return 2.0 * (np.asarray(x) - self.c) / (self.d - self.c) - 1.0


class LiftRecord(NamedTuple):
    value: np.ndarray
    dt: np.ndarray
    laplacian: np.ndarray


class LiftedProblem:
    """Problem mapped to (-1,1)^2 with the boundary data lifted out.

    ``lift`` returns the bilinear-type blend u1 + u2 of the boundary data,
    its time derivative and its Laplacian in reference coordinates.  The
    homogenized unknown u_hat = u_tilde - (u1 + u2) satisfies

        -i u_hat_t = gamma Lap(u_hat) + psi_tilde u_hat + f_tilde

    with zero Dirichlet data.
    """

    def __init__(self, problem: SchrodingerProblem):
        self.problem = problem
        self.gamma = (2.0 / (problem.d - problem.c)) ** 2
        self.t0 = problem.t0
        self.T = problem.T

    def psi_tilde(self, xr, yr):
        p = self.problem
        return p.psi(p.to_physical(xr), p.to_physical(yr))

    def phi_tilde(self, xr, yr):
        p = self.problem
        return p.phi(p.to_physical(xr), p.to_physical(yr))

    def _edge(self, g, sr, t):
        s = self.problem.to_physical(sr)
        # d^2/ds_ref^2 = ((d-c)/2)^2 d^2/ds^2
        return g.value(s, t), g.dt(s, t), g.dss(s, t) / self.gamma

    def lift(self, xr, yr, t):
        p = self.problem
        xr, yr = np.broadcast_arrays(np.asarray(xr, dtype=float), np.asarray(yr, dtype=float))
        gb, gb_t, gb_ss = self._edge(p.g1, xr, t)
        gt, gt_t, gt_ss = self._edge(p.g2, xr, t)
        gl, gl_t, gl_ss = self._edge(p.g3, yr, t)
        gr, gr_t, gr_ss = self._edge(p.g4, yr, t)
        # corner values of u1 at x = -1 and x = +1
        cb = [self._edge(p.g1, np.float64(e), t) for e in (-1.0, 1.0)]
        ct = [self._edge(p.g2, np.float64(e), t) for e in (-1.0, 1.0)]

        def blend(lo, hi, w):
            return 0.5 * (hi - lo) * w + 0.5 * (hi + lo)

        u1 = blend(gb, gt, yr)
        u1_t = blend(gb_t, gt_t, yr)
        u1_lap = blend(gb_ss, gt_ss, yr)
        hl = gl - blend(cb[0][0], ct[0][0], yr)
        hr = gr - blend(cb[1][0], ct[1][0], yr)
        hl_t = gl_t - blend(cb[0][1], ct[0][1], yr)
        hr_t = gr_t - blend(cb[1][1], ct[1][1], yr)
        u2 = blend(hl, hr, xr)
        u2_t = blend(hl_t, hr_t, xr)
        # the corner correction is linear in y, so it drops out of d^2/dy^2
        u2_lap = blend(gl_ss, gr_ss, xr)
        return LiftRecord(u1 + u2, u1_t + u2_t, u1_lap + u2_lap)

    def lifting(self, xr, yr, t):
        return self.lift(xr, yr, t).value

    def f_tilde(self, xr, yr, t):
        rec = self.lift(xr, yr, t)
        return 1j * rec.dt + self.gamma * rec.laplacian + self.psi_tilde(xr, yr) * rec.value

    def phi_hat(self, xr, yr):
        return self.phi_tilde(xr, yr) - self.lift(xr, yr, self.t0).value


def to_reference(problem):
    return LiftedProblem(problem)


def lift(lifted, xr, yr, t):
    return lifted.lift(xr, yr, t)


def forcing_f_tilde(lifted, xr, yr, t):
    return lifted.f_tilde(xr, yr, t)


def lifted_initial(lifted, xr, yr):
    return lifted.phi_hat(xr, yr)


def residual(problem, candidate, x, y, t, step=FD_STEP):
    """PDE residual -i u_t - Lap(u) - psi u of ``candidate`` at physical points.

    ``candidate`` is either an :class:`ExactSolution` or a plain callable
    u(x, y, t).  Derivatives are always taken by fourth-order central
    differences so the check is independent of any analytic derivative formulas.
    """
    u = candidate if not isinstance(candidate, ExactSolution) else candidate.value
    h = step
    x, y, t = (np.asarray(a, dtype=float) for a in (x, y, t))
    u0 = u(x, y, t)

    def d1(f):
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)

    def d2(f):
        return (-f(2 * h) + 16 * f(h) - 30 * u0 + 16 * f(-h) - f(-2 * h)) / (12 * h * h)

    u_t = d1(lambda s: u(x, y, t + s))
    lap = d2(lambda s: u(x + s, y, t)) + d2(lambda s: u(x, y + s, t))
    return -1j * u_t - lap - problem.psi(x, y) * u0


def zero_dirichlet_problem(phi, psi, c=-1.0, d=1.0, t0=0.0, T=1.0, name="homogeneous"):
    """Problem with g1 = g2 = g3 = g4 = 0; ``phi`` must vanish on the boundary."""

    def zero(s, t):
        return np.zeros(np.shape(s), dtype=complex) if np.ndim(s) else 0j

    g = BoundaryData(zero, zero, zero)
    return SchrodingerProblem(c, d, t0, T, psi, phi, g, g, g, g, name=name)


def _problem_from_exact(exact, psi, c, d, t0, T, name):
    g1, g2, g3, g4 = exact.boundary(c, d)
    return SchrodingerProblem(
        c, d, t0, T, psi, lambda x, y: exact.value(x, y, t0), g1, g2, g3, g4,
        exact=exact, name=name,
    )


def test_problem_1():
    """psi = 3 - 2 tanh^2 x - 2 tanh^2 y on (0,1)^2, u = i e^{it} sech x sech y."""

    def value(x, y, t):
        return 1j * np.exp(1j * t) / (np.cosh(x) * np.cosh(y))

    def dt(x, y, t):
        return 1j * value(x, y, t)

    def dxx(x, y, t):
        return value(x, y, t) * (2 * np.tanh(x) ** 2 - 1)

    def dyy(x, y, t):
        return value(x, y, t) * (2 * np.tanh(y) ** 2 - 1)

    def psi(x, y):
        return 3 - 2 * np.tanh(x) ** 2 - 2 * np.tanh(y) ** 2

    exact = ExactSolution(value, dt, dxx, dyy)
    return _problem_from_exact(exact, psi, 0.0, 1.0, 0.0, 1.0, "test1")


def test_problem_2(k0):
    """Free Gaussian wave packet with wavenumber k0 on (-2.5, 2.5)^2, psi = 0."""
    k0 = float(k0)
    if not np.isfinite(k0):
        raise ValueError("k0 must be finite")

    def value(x, y, t):
        a = 1 + 4j * t
        return np.exp(-(x**2 + y**2 + 1j * k0 * x + 1j * k0**2 * t) / a) / a

    def dt(x, y, t):
        a = 1 + 4j * t
        q = x**2 + y**2 + 1j * k0 * x + 1j * k0**2 * t
        return value(x, y, t) * (-4j / a - 1j * k0**2 / a + 4j * q / a**2)

    def dxx(x, y, t):
        a = 1 + 4j * t
        return value(x, y, t) * (((2 * x + 1j * k0) / a) ** 2 - 2 / a)

    def dyy(x, y, t):
        a = 1 + 4j * t
        return value(x, y, t) * ((2 * y / a) ** 2 - 2 / a)

    def psi(x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    exact = ExactSolution(value, dt, dxx, dyy)
    return _problem_from_exact(exact, psi, -2.5, 2.5, 0.0, 1.0, "test2")


# keep pytest from collecting the factories above when imported into tests
test_problem_1.__test__ = False
test_problem_2.__test__ = False


def problem_by_name(name, k0=None):
    if name == "test1":
        return test_problem_1()
    if name == "test2":
        if k0 is None:
            raise ValueError("test2 requires k0")
        return test_problem_2(k0)
    raise ValueError(f"unknown problem {name!r} (expected 'test1' or 'test2')")
