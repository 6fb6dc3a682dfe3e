import numpy as np
import pytest
from hypothesis import given, strategies as st

from bipartition import (
    DivisionSpec,
    PhysicsError,
    SymplecticTransform,
    classify_division,
    extend_point_transform,
    forward_moments,
    invert_moments,
    symplectic_form,
    two_body_transform,
    validate_symplectic,
)
from bipartition.phase_space import local_symplectic, random_symplectic, symplectic_eigenvalues

from conftest import M_E, M_P

seeds = st.integers(0, 2**32 - 1)


def J_by_hand(n):
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[i, n + i] = 1.0
        J[n + i, i] = -1.0
    return J


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_symplectic_form_layout(n):
    J = symplectic_form(n)
    assert np.array_equal(J, J_by_hand(n))
    assert np.array_equal(J @ J, -np.eye(2 * n))


def test_symplectic_form_is_read_only():
    with pytest.raises(ValueError):
        symplectic_form(2)[0, 0] = 3.0


def test_naive_completion_of_two_body_map_is_not_canonical():
    # positions mapped to (X, r) while momenta are left alone
    T = np.array([[M_E / (M_E + M_P), M_P / (M_E + M_P)], [1.0, -1.0]])
    S = np.block([[T, np.zeros((2, 2))], [np.zeros((2, 2)), np.eye(2)]])
    J = J_by_hand(2)
    assert np.max(np.abs(S @ J @ S.T - J)) > 0.5
    assert validate_symplectic(S) is False


def test_two_body_momentum_rows_frozen():
    S = two_body_transform(M_E, M_P).S
    M = M_E + M_P
    assert validate_symplectic(S)
    # X = (m_e x_e + m_p x_p)/M, r = x_e - x_p
    assert np.allclose(S[:2, :2], [[1 / 1837, 1836 / 1837], [1, -1]], rtol=0, atol=1e-15)
    # P = p_e + p_p, p_r = (m_p p_e - m_e p_p)/M
    assert np.allclose(S[2:, 2:], [[1.0, 1.0], [M_P / M, -M_E / M]], rtol=0, atol=1e-15)
    assert np.all(S[:2, 2:] == 0) and np.all(S[2:, :2] == 0)


def test_momentum_completion_solves_canonicity_condition():
    # blockdiag(T, U) is canonical iff T U^T = I
    T = np.array([[0.3, 1.2], [-0.7, 2.0]])
    S = extend_point_transform(T).S
    U = S[2:, 2:]
    assert np.allclose(T @ U.T, np.eye(2), atol=1e-14)
    assert S.shape == (4, 4) and validate_symplectic(S)


def test_singular_position_map_refused():
    with pytest.raises(PhysicsError):
        extend_point_transform([[1.0, 2.0], [2.0, 4.0]])


def test_two_body_rejects_wrong_mode_count_and_bad_mass():
    with pytest.raises(ValueError):
        two_body_transform(1.0, 2.0, n_modes=3)
    with pytest.raises(PhysicsError):
        two_body_transform(-1.0, 2.0)


def test_validate_checks_mode_count():
    with pytest.raises(ValueError):
        validate_symplectic(np.eye(4), n_modes=3)


def test_transform_rejects_malformed_input():
    with pytest.raises(ValueError):
        SymplecticTransform(np.eye(3))
    with pytest.raises(ValueError):
        SymplecticTransform(np.eye(4), d=np.zeros(3))


def test_invert_means_hydrogen_frozen():
    S = two_body_transform(M_E, M_P)
    means, covars = invert_moments([0.0, 1.0], np.diag([0.25, 0.5]), S)
    # x_e = X + m_p r / M, x_p = X - m_e r / M
    assert means == pytest.approx([1836 / 1837, -1 / 1837], abs=1e-15)
    expected = np.array([[0.25 + 0.5 * (1836 / 1837) ** 2, 0.25 - 0.5 * 1836 / 1837 ** 2],
                         [0.25 - 0.5 * 1836 / 1837 ** 2, 0.25 + 0.5 / 1837 ** 2]])
    assert np.allclose(covars, expected, rtol=0, atol=1e-14)


def test_invert_isotropic_covariance_equal_masses():
    S = two_body_transform(1.0, 1.0)
    s2 = 0.3
    _, covars = invert_moments([0.0, 0.0], s2 * np.eye(2), S)
    assert np.allclose(covars, s2 * np.array([[1.25, 0.75], [0.75, 1.25]]), atol=1e-15)


def test_moment_round_trip_full_phase_space(rng):
    S = two_body_transform(M_E, M_P)
    m = rng.normal(size=4)
    A = rng.normal(size=(4, 4))
    C = A @ A.T
    fm, fc = forward_moments(m, C, S)
    bm, bc = invert_moments(fm, fc, S)
    assert np.max(np.abs(bm - m)) <= 1e-12
    assert np.max(np.abs(bc - C)) <= 1e-12


def test_complementary_refused_for_moments():
    theta = 0.4
    R = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    S = SymplecticTransform(R)  # one-mode phase rotation, x' contains p
    assert classify_division(S) == "complementary"
    with pytest.raises(PhysicsError, match="complementary"):
        invert_moments([0.0], [[1.0]], S)
    with pytest.raises(PhysicsError):
        forward_moments([0.0], [[1.0]], S)


def test_moment_shape_and_psd_errors():
    S = two_body_transform(1.0, 1.0)
    with pytest.raises(ValueError):
        invert_moments([0.0, 0.0, 0.0], np.eye(3), S)
    with pytest.raises(PhysicsError):
        invert_moments([0.0, 0.0], np.diag([1.0, -1.0]), S)


def test_classification_point_and_complementary():
    assert classify_division(two_body_transform(M_E, M_P)) == "point_like"
    swap = np.array([[0.0, 1.0], [-1.0, 0.0]])  # x -> p, p -> -x
    assert classify_division(swap) == "complementary"
    with pytest.raises(PhysicsError):
        classify_division(np.diag([2.0, 2.0]))


def test_inverse_and_composition_with_displacement():
    S = two_body_transform(2.0, 3.0)
    shifted = SymplecticTransform(S.S, np.array([0.1, -0.2, 0.3, 0.4]), "native", "cm_rel")
    z = np.array([0.5, -1.0, 0.25, 2.0])
    zeta = shifted.S @ z + shifted.d
    back = shifted.inverse()
    assert np.allclose(back.S @ zeta + back.d, z, atol=1e-14)
    ident = shifted.then(back)
    assert np.allclose(ident.S, np.eye(4), atol=1e-14) and np.allclose(ident.d, 0, atol=1e-14)
    assert (back.source_division, back.target_division) == ("cm_rel", "native")


def test_symplectic_eigenvalues_thermal_diagonal():
    sigma = np.diag([1.5, 0.7, 1.5, 0.7])
    assert symplectic_eigenvalues(sigma) == pytest.approx([1.5, 0.7])


def test_symplectic_eigenvalues_non_positive_falls_back():
    # indefinite matrix: eigenvalues of iJA for A = diag(1, -1) on one mode are +-1
    assert symplectic_eigenvalues(np.diag([1.0, -1.0])) == pytest.approx([1.0])


def test_division_validation_messages():
    with pytest.raises(ValueError, match="assigned twice"):
        DivisionSpec("d", {"a": [0, 1], "b": [1]}).check(2)
    with pytest.raises(ValueError, match="does not cover"):
        DivisionSpec("d", {"a": [0]}).check(2)
    with pytest.raises(ValueError, match="outside"):
        DivisionSpec("d", {"a": [0], "b": [2]}).check(2)
    with pytest.raises(ValueError, match="exactly two"):
        DivisionSpec("d", {"a": [0], "b": [1], "c": [2]}).halves(3)


# ---- properties -----------------------------------------------------------

@given(seed=seeds, n=st.integers(1, 4))
def test_random_symplectic_is_canonical(seed, n):
    S = random_symplectic(n, np.random.default_rng(seed))
    assert validate_symplectic(S)
    assert abs(np.linalg.det(S) - 1.0) < 1e-8


@given(seed=seeds)
def test_hundred_compositions_drift_below_1e9(seed):
    rng = np.random.default_rng(seed)
    total = SymplecticTransform.identity(2)
    for _ in range(100):
        total = total.then(SymplecticTransform(random_symplectic(2, rng, scale=0.05)))
    assert total.residual() < 1e-9


@given(seed=seeds, n=st.integers(1, 4))
def test_point_completion_canonical_for_random_maps(seed, n):
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(n, n)) + 3 * np.eye(n)
    S = extend_point_transform(T)
    assert S.residual() <= 1e-10 * max(1.0, np.linalg.cond(T))
    assert classify_division(S) == "point_like"


@given(seed=seeds, n=st.integers(2, 4))
def test_classification_invariant_under_mode_permutation(seed, n):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    P = np.eye(n)[perm]
    Pz = np.block([[P, np.zeros((n, n))], [np.zeros((n, n)), P]])
    point = extend_point_transform(rng.normal(size=(n, n)) + 3 * np.eye(n)).S
    generic = random_symplectic(n, rng)
    for S in (point, generic):
        assert classify_division(Pz @ S @ Pz.T) == classify_division(S)
    assert classify_division(generic) == "complementary"


@given(seed=seeds)
def test_moment_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    m1, m2 = rng.uniform(0.1, 2000.0, size=2)
    S = two_body_transform(m1, m2)
    means = rng.normal(size=2)
    A = rng.normal(size=(2, 2))
    cov = A @ A.T
    bm, bc = invert_moments(*forward_moments(means, cov, S), S)
    assert np.max(np.abs(bm - means)) <= 1e-12
    assert np.max(np.abs(bc - cov)) <= 1e-12 * max(1.0, np.max(np.abs(cov)))


@given(seed=seeds)
def test_local_symplectic_respects_division(seed):
    rng = np.random.default_rng(seed)
    a, b = random_symplectic(1, rng), random_symplectic(2, rng)
    S = local_symplectic({frozenset([1]): a, frozenset([0, 2]): b}, 3)
    assert validate_symplectic(S)
    # no entries couple mode 1 to modes 0 and 2
    idx1 = [1, 4]
    rest = [0, 2, 3, 5]
    assert np.all(S[np.ix_(idx1, rest)] == 0) and np.all(S[np.ix_(rest, idx1)] == 0)
