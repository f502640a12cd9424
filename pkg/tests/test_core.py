import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsspec import (
    BoundaryMatrixError,
    StructuralError,
    SymplecticSystem,
    as_boundary,
    block_ab,
    fundamental_solutions,
    lagrange_residual,
    psi_from_v,
    psi_ranks,
    random_boundary,
    random_system,
    semi_inner_product,
    semi_norm,
    sl_scalar,
    solve_ivp,
    space_dimensions,
    symplectic_unit,
    v_from_psi,
    validate_system,
)
from helpers import complex_normal


def test_symplectic_unit_layout():
    J = symplectic_unit(2)
    assert np.array_equal(J, np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]]))
    assert np.array_equal(J @ J, -np.eye(4))


def test_scalar_family_validates():
    rep = validate_system(sl_scalar([0, 1, 2]))
    assert rep.passed and not rep.failing
    assert set(rep.to_dict()) == {"passed", "tol", "residuals", "failing"}


def test_identity_weight_is_not_isotropic():
    sys = SymplecticSystem(np.tile(np.eye(2), (2, 1, 1)), np.tile(np.eye(2), (2, 1, 1)))
    rep = validate_system(sys)
    assert not rep.passed
    assert rep.failing["psi_isotropic"] == [0, 1]


def test_skew_weight_is_not_hermitian():
    J = symplectic_unit(1)
    sys = SymplecticSystem(np.tile(np.eye(2), (1, 1, 1)), J[None])
    rep = validate_system(sys)
    assert not rep.passed
    assert rep.failing["psi_hermitian"] == [0]


def test_non_symplectic_coefficient_reported():
    S = np.array([[[2.0, 0], [0, 1.0]]])
    rep = validate_system(SymplecticSystem(S, np.zeros((1, 2, 2))))
    assert rep.failing["symplectic_S"] == [0]


def test_small_asymmetry_is_symmetrized():
    Psi = np.array([[[0, 0], [1e-14, 1.0]]])
    sys = SymplecticSystem(np.eye(2)[None], Psi)
    assert np.array_equal(sys.Psi, sys.Psi.conj().transpose(0, 2, 1))
    assert validate_system(sys).passed


def test_shape_errors():
    with pytest.raises(StructuralError):
        SymplecticSystem(np.eye(3)[None], np.eye(3)[None])
    with pytest.raises(StructuralError):
        SymplecticSystem(np.eye(2)[None], np.zeros((2, 2, 2)))
    with pytest.raises(StructuralError):
        SymplecticSystem(np.zeros((0, 2, 2)), np.zeros((0, 2, 2)))


def test_coefficients_are_read_only():
    sys = sl_scalar([0, 1])
    with pytest.raises(ValueError):
        sys.S[0, 0, 0] = 5


def test_boundary_matrix_checks():
    assert as_boundary([1, 0], 1).shape == (1, 2)
    with pytest.raises(BoundaryMatrixError):
        as_boundary([[2, 0]], 1)
    with pytest.raises(BoundaryMatrixError):
        as_boundary([[1, 0, 0, 0]], 2)
    # rows orthonormal but not J-isotropic
    with pytest.raises(BoundaryMatrixError):
        as_boundary([[1, 0, 0, 0], [0, 0, 1, 0]], 2)


def test_block_family_derived_v():
    a, b = 2.0, 3.0
    sys = block_ab(a, b, 2)
    r = np.sqrt(a * b)
    I2 = np.eye(2)
    expected = np.block([[-r * I2, -b * I2], [a * I2, r * I2]])
    for k in range(3):
        assert np.allclose(v_from_psi(sys, k), expected, atol=1e-14)


def test_zero_weight_gives_zero_v():
    sys = sl_scalar([0, 0, 0])
    assert np.array_equal(v_from_psi(sys, 0), np.zeros((2, 2)))


def test_weight_recovered_from_v():
    rng = np.random.default_rng(1)
    sys = random_system(rng, 2, 3)
    for k in range(4):
        assert np.abs(psi_from_v(sys, k) - sys.Psi[k]).max() <= 1e-12


def test_index_out_of_range():
    with pytest.raises(IndexError):
        v_from_psi(sl_scalar([0, 1]), 1)


def test_constant_sequence_norm():
    v = [0, 1, 2.5, 4]
    sys = sl_scalar(v)
    z = np.tile([0.0, 1.0], (len(v), 1))
    assert semi_norm(sys, z) == pytest.approx(np.sqrt(4), abs=1e-14)
    assert semi_norm(sys, sys.zeros()) == 0.0


def test_semi_inner_product_matches_loop():
    rng = np.random.default_rng(2)
    sys = random_system(rng, 2, 4)
    z = complex_normal(rng, (6, 4))
    u = complex_normal(rng, (6, 4))
    brute = 0
    for k in range(5):
        for i in range(4):
            for j in range(4):
                brute += np.conj(z[k, i]) * sys.Psi[k, i, j] * u[k, j]
    assert abs(semi_inner_product(sys, z, u) - brute) <= 1e-12 * (1 + abs(brute))
    # the final index never contributes
    z2 = z.copy()
    z2[-1] = 100
    assert semi_inner_product(sys, z2, u) == semi_inner_product(sys, z, u)


def test_semi_inner_product_columns():
    rng = np.random.default_rng(3)
    sys = random_system(rng, 2, 2)
    Z = complex_normal(rng, (4, 4, 3))
    G = semi_inner_product(sys, Z, Z)
    assert G.shape == (3, 3)
    assert abs(G[1, 2] - semi_inner_product(sys, Z[:, :, 1], Z[:, :, 2])) <= 1e-12
    with pytest.raises(StructuralError):
        semi_inner_product(sys, Z[:3], Z[:3])


def test_space_dimensions():
    assert space_dimensions(sl_scalar([0, 1, 2, 3]))[1] == 3
    assert space_dimensions(sl_scalar([0, 0, 0]))[1] == 0
    sys = block_ab(1.0, 2.0, 3)
    assert space_dimensions(sys) == (4 * 5, 2 * 4)
    assert psi_ranks(sys) == [2, 2, 2, 2]


def test_wronskian_identity_for_propagated_solutions():
    rng = np.random.default_rng(4)
    sys = random_system(rng, 2, 3)
    alpha = random_boundary(rng, 2)
    lam = 0.3 + 0.7j
    z = fundamental_solutions(sys, alpha, lam).Phi
    u = fundamental_solutions(sys, alpha, np.conj(lam)).Phi
    assert lagrange_residual(sys, lam, np.conj(lam), z, u) <= 1e-11
    assert lagrange_residual(sys, lam, lam, sys.zeros(), sys.zeros()) == 0.0


@given(seed=st.integers(0, 2**31), n=st.integers(1, 3), N=st.integers(0, 5))
def test_lagrange_formula_with_forcing(seed, n, N):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, n, N)
    lam, nu = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    f, g = complex_normal(rng, (N + 2, 2 * n)), complex_normal(rng, (N + 2, 2 * n))
    z = solve_ivp(sys, lam, complex_normal(rng, 2 * n), f)
    u = solve_ivp(sys, nu, complex_normal(rng, 2 * n), g)
    scale = 1 + np.abs(z).max() * np.abs(u).max()
    assert lagrange_residual(sys, lam, nu, z, u, f, g) <= 1e-10 * scale


@given(seed=st.integers(0, 2**31), n=st.integers(1, 3), N=st.integers(0, 6))
def test_random_systems_validate(seed, n, N):
    rng = np.random.default_rng(seed)
    assert validate_system(random_system(rng, n, N)).passed
