import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legendre_schrodinger.basis import (
    BasisSet,
    GridTransform,
    MassFactorizationError,
    MassMatrix,
    analyze,
    mass_matrix,
    mass_solve,
    synthesize,
)
from legendre_schrodinger.orthopoly import legendre_eval, lgl_rule


def quadrature_matrices(N):
    """Stiffness and mass matrices of the basis by exact LGL quadrature."""
    rule = lgl_rule(N + 2)
    b = BasisSet(N)
    S, D = b.sample(rule.nodes), b.sample_deriv(rule.nodes)
    w = rule.weights
    return D.T @ (w[:, None] * D), S.T @ (w[:, None] * S)


def test_basis_eval_examples():
    b = BasisSet(6)
    assert b.eval(0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert b.eval(0, -1.0) == pytest.approx(0.0, abs=1e-15)
    assert b.eval(0, 0.0) == pytest.approx(1.5 / np.sqrt(6), abs=1e-15)
    assert b.eval(1, 0.5) == pytest.approx(0.296464, abs=1e-6)
    oracle = (legendre_eval(1, 0.5) - legendre_eval(3, 0.5)) / np.sqrt(10)
    assert b.eval(1, 0.5) == pytest.approx(oracle, abs=1e-15)


def test_basis_index_and_size_checks():
    with pytest.raises(IndexError):
        BasisSet(5).eval(4, 0.0)
    with pytest.raises(ValueError):
        BasisSet(1)
    assert BasisSet(8).dim == 7


def test_basis_vanishes_at_endpoints():
    S = BasisSet(20).sample(np.array([-1.0, 1.0]))
    assert np.max(np.abs(S)) <= 1e-14


def test_mass_matrix_examples():
    B = mass_matrix(8).to_dense()
    assert B[0, 0] == pytest.approx(0.4, abs=1e-15)
    assert B[0, 2] == pytest.approx(-2 / (5 * np.sqrt(84)), abs=1e-15)
    assert B[0, 1] == 0.0
    assert B[1, 1] == pytest.approx(2 / 21, abs=1e-15)


@pytest.mark.parametrize("N", [4, 8, 16, 32])
def test_matrices_match_quadrature(N):
    Sq, Bq = quadrature_matrices(N)
    np.testing.assert_allclose(Sq, np.eye(N - 1), atol=1e-12)
    np.testing.assert_allclose(mass_matrix(N).to_dense(), Bq, atol=1e-12)


def test_mass_matrix_bandwidth():
    B = mass_matrix(12).to_dense()
    i, j = np.indices(B.shape)
    assert np.all(B[(np.abs(i - j) != 0) & (np.abs(i - j) != 2)] == 0)
    np.testing.assert_array_equal(B, B.T)


def test_matmul_both_sides():
    M = mass_matrix(9)
    Bd = M.to_dense()
    rng = np.random.default_rng(0)
    X = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    np.testing.assert_allclose(M @ X, Bd @ X, atol=1e-14)
    np.testing.assert_allclose(X @ M, X @ Bd, atol=1e-14)
    v = rng.standard_normal(8)
    np.testing.assert_allclose(M @ v, Bd @ v, atol=1e-14)
    np.testing.assert_allclose(v @ M, v @ Bd, atol=1e-14)


def test_matmul_batched_along_second_last_axis():
    M = mass_matrix(6)
    Bd = M.to_dense()
    X = np.random.default_rng(1).standard_normal((3, 5, 5))
    np.testing.assert_allclose(M @ X, Bd @ X, atol=1e-14)
    np.testing.assert_allclose(X @ M, X @ Bd, atol=1e-14)
    np.testing.assert_allclose(M.solve(M @ X), X, atol=1e-12)


def test_mass_matrix_dimension_mismatch():
    with pytest.raises(ValueError):
        mass_matrix(6) @ np.ones((4, 4))


def test_mass_solve_recovers_random_e():
    M = mass_matrix(14)
    Bd = M.to_dense()
    rng = np.random.default_rng(2)
    E = rng.standard_normal((13, 13)) + 1j * rng.standard_normal((13, 13))
    np.testing.assert_allclose(mass_solve(M, Bd @ E @ Bd), E, atol=1e-11)


def test_mass_solve_zero_and_scalar():
    M = mass_matrix(10)
    np.testing.assert_array_equal(mass_solve(M, np.zeros((9, 9))), 0)
    M1 = mass_matrix(2)
    assert M1.dim == 1
    b = M1.diag[0]
    x = mass_solve(M1, np.array([[3.0]]))
    assert x[0, 0] * b * b == pytest.approx(3.0)


def test_indefinite_bands_rejected():
    with pytest.raises(MassFactorizationError):
        MassMatrix(diag=np.array([1.0, 1.0, -1.0]), off2=np.array([0.0]))
    with pytest.raises(ValueError):
        MassMatrix(diag=np.ones(4), off2=np.ones(1))


def test_synthesize_examples():
    x = np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(synthesize(np.zeros((5, 5)), x), 0)
    a = np.zeros((5, 5))
    a[0, 0] = 1
    assert synthesize(a, [0.0])[0, 0] == pytest.approx(0.375, abs=1e-12)
    with pytest.raises(ValueError):
        synthesize(np.zeros((3, 4)), x)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(4, 16), seed=st.integers(0, 2**32 - 1))
def test_synthesized_field_vanishes_on_edges(N, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((N - 1, N - 1)) + 1j * rng.standard_normal((N - 1, N - 1))
    s = np.linspace(-1, 1, 9)
    edge = np.array([-1.0, 1.0])
    scale = np.abs(a).sum()
    assert np.max(np.abs(synthesize(a, edge, s))) <= 1e-13 * scale
    assert np.max(np.abs(synthesize(a, s, edge))) <= 1e-13 * scale


def test_analyze_examples():
    N = 6
    rule = lgl_rule(N + 2)
    b = BasisSet(N)
    B = mass_matrix(N).to_dense()
    X, Y = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    np.testing.assert_array_equal(analyze(np.zeros_like(X), rule, N), 0)
    g00 = analyze(b.eval(0, X) * b.eval(0, Y), rule, N)
    np.testing.assert_allclose(g00, np.outer(B[:, 0], B[:, 0]), atol=1e-14)
    assert g00[0, 0] == pytest.approx(0.16, abs=1e-14)
    g10 = analyze(b.eval(1, X) * b.eval(0, Y), rule, N)
    assert g10[1, 0] == pytest.approx((2 / 21) * 0.4, abs=1e-14)


def test_grid_transform_requires_fine_rule():
    with pytest.raises(ValueError):
        GridTransform(BasisSet(8), lgl_rule(9))


def test_grid_transform_round_trip():
    # analyze(synthesize(alpha)) = B alpha B when the quadrature is exact
    N = 9
    tr = GridTransform(BasisSet(N), lgl_rule(N + 2))
    M = mass_matrix(N)
    a = np.random.default_rng(5).standard_normal((2, N - 1, N - 1))
    np.testing.assert_allclose(mass_solve(M, tr.analyze(tr.synthesize(a))), a, atol=1e-12)
    with pytest.raises(ValueError):
        tr.analyze(np.ones((3, 3)))
