import numpy as np
import pytest
from hypothesis import given, strategies as st

from bipartition import (
    DivisionSpec,
    PhysicsError,
    QuadraticHamiltonian,
    SymplecticTransform,
    build,
    classify_division,
    extend_point_transform,
    harmonic_two_body,
    normal_modes,
    partition_blocks,
    transform_hamiltonian,
    trap,
)
from bipartition.hamiltonian import decoupled_form_residual
from bipartition.phase_space import random_symplectic, symplectic_eigenvalues

from conftest import M_E, M_P

seeds = st.integers(0, 2**32 - 1)
EP = DivisionSpec("ep", {"e": [0], "p": [1]})
CM_R = DivisionSpec("cm_r", {"CM": [0], "R": [1]})


def test_build_layout():
    H = build([2.0, 4.0], [[3.0, 0.5], [0.5, 1.0]])
    expected = np.array([[3.0, 0.5, 0, 0], [0.5, 1.0, 0, 0], [0, 0, 0.5, 0], [0, 0, 0, 0.25]])
    assert np.array_equal(H.M, expected)
    assert H.energy([1.0, 0.0, 0.0, 2.0]) == pytest.approx(0.5 * 3.0 + 0.5 * 0.25 * 4.0)


def test_build_rejects_bad_input():
    with pytest.raises(PhysicsError):
        build([1.0, 0.0], np.eye(2))
    with pytest.raises(ValueError):
        build([1.0, 1.0], [[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(ValueError):
        QuadraticHamiltonian(np.eye(3))


def test_hydrogen_coupling_native_vs_cm_rel(hydrogen, cm_rel):
    native = partition_blocks(hydrogen, EP)
    # only the x_e x_p entry couples the halves: Frobenius norm 1
    assert native.coupling_norm == pytest.approx(1.0, abs=1e-15)
    moved = partition_blocks(transform_hamiltonian(hydrogen, cm_rel), CM_R)
    assert moved.coupling_norm < 1e-12


def test_cm_rel_coefficients_reduced_mass(hydrogen, cm_rel):
    M = transform_hamiltonian(hydrogen, cm_rel).M
    mu = M_E * M_P / (M_E + M_P)
    # H = P^2/2M + p_r^2/2mu + r^2/2
    assert M[2, 2] == pytest.approx(1 / (M_E + M_P), rel=1e-13)
    assert M[3, 3] == pytest.approx(1 / mu, rel=1e-13)
    assert M[1, 1] == pytest.approx(1.0, rel=1e-13)
    assert abs(M[0, 0]) < 1e-12


def test_pair_rotation_decouples(pair):
    c = 1 / np.sqrt(2)
    rot = extend_point_transform([[c, c], [c, -c]], target="normal")
    H_q = transform_hamiltonian(pair, rot)
    blocks = partition_blocks(H_q, DivisionSpec("q", {"Q1": [0], "Q2": [1]}))
    assert blocks.coupling_norm < 1e-12
    assert np.diag(H_q.M)[:2] == pytest.approx([1.5, 0.5], abs=1e-14)


def test_reassembly_bit_identical(rng):
    A = rng.normal(size=(6, 6))
    H = QuadraticHamiltonian(A + A.T)
    div = DivisionSpec("d", {"a": [2], "b": [0, 1]})
    assert np.array_equal(partition_blocks(H, div).reassemble(), H.M)


def test_pair_normal_modes_frozen(pair):
    nm = normal_modes(pair)
    assert nm.frequencies == pytest.approx([np.sqrt(1.5), np.sqrt(0.5)], abs=1e-14)
    c = 1 / np.sqrt(2)
    assert np.allclose(nm.modal_matrix, [[c, c], [c, -c]], atol=1e-14)
    assert classify_division(nm.S_nm) == "point_like"
    assert decoupled_form_residual(pair, nm) < 1e-12


def test_uncoupled_pair_gives_monomial_transform():
    H = build([1.0, 1.0], np.diag([0.25, 4.0]))
    nm = normal_modes(H)
    assert nm.frequencies == pytest.approx([2.0, 0.5])
    S = nm.S_nm.S
    mono = np.abs(S) > 1e-14
    assert np.all(mono.sum(axis=0) == 1) and np.all(mono.sum(axis=1) == 1)
    # faster oscillator (mode 1) comes first
    assert mono[0, 1] and mono[1, 0]


def test_equal_frequencies_are_ordered_deterministically():
    H = build([1.0, 1.0], np.eye(2))
    a, b = normal_modes(H), normal_modes(H)
    assert np.array_equal(a.S_nm.S, b.S_nm.S)
    assert decoupled_form_residual(H, a) < 1e-12


def test_free_mode_needs_trap(hydrogen):
    with pytest.raises(PhysicsError, match="trap"):
        normal_modes(hydrogen)
    trapped = trap(hydrogen, [0], 0.1)
    assert decoupled_form_residual(trapped, normal_modes(trapped)) < 1e-10


def test_williamson_route_with_cross_terms(rng):
    A = rng.normal(size=(6, 6))
    M = A @ A.T + 0.5 * np.eye(6)
    assert np.max(np.abs(M[:3, 3:])) > 0
    H = QuadraticHamiltonian(M)
    nm = normal_modes(H)
    assert nm.S_nm.residual() < 1e-10
    assert decoupled_form_residual(H, nm) < 1e-10
    assert nm.frequencies == pytest.approx(symplectic_eigenvalues(M), rel=1e-10)
    assert np.all(np.diff(nm.frequencies) <= 0)


def test_transform_linear_term_energy_shift():
    H = QuadraticHamiltonian(build([1.0, 2.0], [[2.0, 0.3], [0.3, 1.0]]).M,
                             np.array([0.1, -0.2, 0.3, 0.05]))
    S = SymplecticTransform(random_symplectic(2, np.random.default_rng(3)),
                            np.array([0.4, -0.1, 0.2, 0.7]))
    H2 = transform_hamiltonian(H, S)
    z1, z2 = np.array([0.3, 0.1, -0.5, 1.0]), np.array([-1.0, 0.2, 0.0, 0.4])
    lhs = H2.energy(S.S @ z1 + S.d) - H2.energy(S.S @ z2 + S.d)
    assert lhs == pytest.approx(H.energy(z1) - H.energy(z2), abs=1e-12)


def test_non_canonical_transform_rejected(pair):
    with pytest.raises(PhysicsError):
        transform_hamiltonian(pair, SymplecticTransform(np.diag([2.0, 1.0, 1.0, 1.0])))


def test_harmonic_two_body_matches_hydrogen(hydrogen):
    assert np.array_equal(harmonic_two_body(M_E, M_P).M, hydrogen.M)


# ---- properties -----------------------------------------------------------

@given(k=st.floats(0.5, 5.0), C=st.floats(-0.45, 0.45), m=st.floats(0.1, 10.0))
def test_equal_mass_splitting_identity(k, C, m):
    C = C * k
    nm = normal_modes(build([m, m], [[k, C], [C, k]]))
    w_hi, w_lo = nm.frequencies
    assert abs(w_hi ** 2 - w_lo ** 2) == pytest.approx(2 * abs(C) / m, rel=1e-9, abs=1e-12)


@given(seed=seeds, n=st.integers(1, 4))
def test_normal_modes_decouple_random_systems(seed, n):
    rng = np.random.default_rng(seed)
    masses = rng.uniform(0.2, 5.0, size=n)
    A = rng.normal(size=(n, n))
    H = build(masses, A @ A.T + 0.3 * np.eye(n))
    nm = normal_modes(H)
    scale = float(np.max(nm.frequencies))
    assert nm.S_nm.residual() < 1e-10
    assert decoupled_form_residual(H, nm) < 1e-10 * max(1.0, scale)
    assert classify_division(nm.S_nm) == "point_like"


@given(seed=seeds, n=st.integers(1, 3))
def test_symplectic_spectrum_invariant_under_transform(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2 * n, 2 * n))
    H = QuadraticHamiltonian(A @ A.T + np.eye(2 * n))
    S = SymplecticTransform(random_symplectic(n, rng))
    moved = transform_hamiltonian(H, S)
    assert moved.spectrum() == pytest.approx(H.spectrum(), rel=1e-8)
