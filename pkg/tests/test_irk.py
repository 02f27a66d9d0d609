import numpy as np
import pytest

from legendre_schrodinger.assembly import build_system
from legendre_schrodinger.gmres import GmresConfig
from legendre_schrodinger.irk import (
    ButcherTableau,
    MatrixSystem,
    StepFailure,
    StepperState,
    gauss3_tableau,
    integrate,
    irk_step,
    stage_forcing,
    step_count,
)
from legendre_schrodinger.kronvec import kron
from legendre_schrodinger.problem import test_problem_1, zero_dirichlet_problem
from legendre_schrodinger.solver import fit_slope, surrogate_errors

R15 = np.sqrt(15.0)


def random_system(n, seed):
    """Hermitian positive definite M1, Hermitian M2 and a smooth forcing."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    M1 = G @ G.conj().T / n + np.eye(n)
    H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    M2 = (H + H.conj().T) / 2
    f0, f1 = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    return MatrixSystem(M1, M2, lambda t: f0 * np.cos(t) + f1 * t)


def dense_stage_solve(system, y, t, h, tab):
    n, s = system.n, tab.s
    K = -1j * kron(np.eye(s), system.M1) + h * kron(tab.A, system.M2)
    F = np.stack([system.forcing(t + c * h) for c in tab.c])
    rhs = -1j * np.tile(system.M1 @ y, s) + h * kron(tab.A, np.eye(n)) @ F.reshape(-1)
    return np.linalg.solve(K, rhs).reshape(s, n), F


def test_gauss3_closed_forms():
    tab = gauss3_tableau()
    np.testing.assert_array_equal(tab.b, [5 / 18, 4 / 9, 5 / 18])
    np.testing.assert_array_equal(tab.c, [0.5 - R15 / 10, 0.5, 0.5 + R15 / 10])
    assert tab.c[1] == 0.5
    assert abs(tab.b.sum() - 1) <= 1e-15
    np.testing.assert_allclose(tab.A.sum(axis=1), tab.c, atol=1e-15)
    row2 = (5 / 36 + R15 / 24) + 2 / 9 + (5 / 36 - R15 / 24)
    assert row2 == pytest.approx(0.5, abs=1e-15)
    assert not tab.is_diagonally_implicit
    assert tab.s == 3


def test_gauss3_order_conditions_through_six():
    # simplifying assumptions B(6) and C(3) hold for 3-stage Gauss
    tab = gauss3_tableau()
    for k in range(1, 7):
        assert tab.b @ tab.c ** (k - 1) == pytest.approx(1 / k, abs=1e-15)
    for q in range(1, 4):
        np.testing.assert_allclose(tab.A @ tab.c ** (q - 1), tab.c**q / q, atol=1e-15)


def test_tableau_is_immutable_and_validated():
    tab = gauss3_tableau()
    with pytest.raises(ValueError):
        tab.A[0, 0] = 1.0
    with pytest.raises(ValueError):
        ButcherTableau(np.zeros((2, 2)), np.ones(3), np.ones(3))


def test_one_step_exponential():
    system = MatrixSystem([[1.0]], [[-1.0]])
    state = irk_step(system, StepperState(0.0, np.array([1.0 + 0j])), 0.1, gauss3_tableau(),
                     GmresConfig(preconditioner="none"))
    assert abs(state.y[0] - np.exp(0.1j)) <= 1e-9
    assert state.t == pytest.approx(0.1) and state.step_count == 1


def test_constant_forcing_step_is_exact():
    system = MatrixSystem([[1.0]], [[0.0]], lambda t: np.array([1.0]))
    y0 = np.array([0.3 - 0.2j])
    for update in ("mass", "stages"):
        state = irk_step(system, StepperState(0.0, y0), 0.25, gauss3_tableau(), update=update)
        assert abs(state.y[0] - (y0[0] + 0.25j)) <= 1e-15


@pytest.mark.parametrize("n", [1, 4, 9, 25])
def test_stage_solve_matches_dense_oracle(n):
    tab = gauss3_tableau()
    system = random_system(n, n)
    rng = np.random.default_rng(100 + n)
    cfg = GmresConfig(tol=1e-13, restart=80, preconditioner="stage_mass")
    for _ in range(5):
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        t, h = rng.uniform(0, 1), rng.uniform(0.01, 0.2)
        K_ref, F = dense_stage_solve(system, y, t, h, tab)
        state = irk_step(system, StepperState(t, y), h, tab, cfg)
        np.testing.assert_allclose(state.stages, K_ref, atol=1e-9)
        y_ref = y + 1j * h * np.linalg.solve(system.M1, tab.b @ (F - K_ref @ system.M2.T))
        np.testing.assert_allclose(state.y, y_ref, atol=1e-9)
        alt = irk_step(system, StepperState(t, y), h, tab, cfg, update="stages")
        np.testing.assert_allclose(alt.y, state.y, atol=1e-9)


def test_matrix_free_step_matches_dense_system():
    system = build_system(test_problem_1(), 6)
    dense = MatrixSystem(system.dense_M1(), system.dense_M2(), system.forcing)
    tab = gauss3_tableau()
    cfg = GmresConfig(tol=1e-13)
    y = system.alpha0
    a = irk_step(system, StepperState(0.0, y), 0.05, tab, cfg)
    b = irk_step(dense, StepperState(0.0, y), 0.05, tab, cfg)
    np.testing.assert_allclose(a.y, b.y, atol=1e-11)
    sep = irk_step(system, StepperState(0.0, y), 0.05, tab, GmresConfig(tol=1e-13, preconditioner="separable"))
    np.testing.assert_allclose(sep.y, a.y, atol=1e-11)


def test_separable_requires_support():
    system = MatrixSystem([[1.0]], [[-1.0]])
    with pytest.raises(ValueError):
        irk_step(system, StepperState(0.0, np.array([1.0])), 0.1, gauss3_tableau(),
                 GmresConfig(preconditioner="separable"))


def test_bad_step_and_update():
    system = MatrixSystem([[1.0]], [[-1.0]])
    st = StepperState(0.0, np.array([1.0]))
    with pytest.raises(ValueError):
        irk_step(system, st, 0.0, gauss3_tableau())
    with pytest.raises(ValueError):
        irk_step(system, st, 0.1, gauss3_tableau(), update="euler")


def test_zero_steps_returns_initial_state():
    system = MatrixSystem([[1.0]], [[-1.0]])
    state = integrate(system, 0.5, 0.5, 0.1, y0=[2.0])
    assert state.t == 0.5 and state.step_count == 0
    assert state.y[0] == 2.0


def test_step_count():
    assert step_count(0, 1, 0.05) == 20
    assert step_count(0, 1, 1 / 3) == 3
    with pytest.raises(ValueError):
        step_count(0, 1, 0.03)
    with pytest.raises(ValueError):
        step_count(0, 1, -0.1)


def test_observer_and_trajectory():
    system = MatrixSystem([[1.0]], [[-1.0]])
    seen = []

    def observer(k, t, y):
        assert not y.flags.writeable
        seen.append((k, t))

    state, traj = integrate(system, 0.0, 1.0, 0.25, observer=observer, y0=[1.0], record=True)
    assert [k for k, _ in seen] == [0, 1, 2, 3, 4]
    assert [t for _, t in seen] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(traj) == 5 and state.t == 1.0
    for t, y in traj:
        assert abs(y[0] - np.exp(1j * t)) <= 1e-7


def test_step_failure_carries_report():
    system = random_system(10, 3)
    cfg = GmresConfig(tol=1e-14, restart=1, max_outer=1, preconditioner="none")
    with pytest.raises(StepFailure) as info:
        integrate(system, 0.0, 1.0, 0.5, gmres=cfg, y0=np.ones(10))
    assert info.value.step_index == 0
    assert not info.value.report.converged


def test_surrogate_order_at_least_five_and_a_half():
    hs = [0.2, 0.1, 0.05, 0.025]
    errs = [np.hypot(*surrogate_errors(h)) for h in hs]
    assert fit_slope(hs, errs) >= 5.5


def homogeneous_system(N=8):
    bump = lambda x, y: (1 - x**2) * (1 - y**2) * np.exp(1j * (x + 0.5 * y))  # noqa: E731
    psi = lambda x, y: 1 + np.cos(2 * x) * y**2  # noqa: E731
    return build_system(zero_dirichlet_problem(bump, psi), N)


@pytest.mark.parametrize("tol", [1e-12, 1e-8])
def test_mass_drift_bounded_by_solver_tolerance(tol):
    system = homogeneous_system()
    steps = 20
    m0 = system.mass(system.alpha0)
    state = integrate(system, 0.0, 1.0, 1 / steps, gmres=GmresConfig(tol=tol))
    drift = abs(system.mass(state.y) - m0) / m0
    assert drift <= 10 * tol * steps


def test_stage_forcing_shape():
    system = random_system(3, 0)
    F = stage_forcing(system, 0.2, 0.1, gauss3_tableau())
    assert F.shape == (3, 3)
    np.testing.assert_allclose(F[1], system.forcing(0.25))
