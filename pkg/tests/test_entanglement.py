import numpy as np
import pytest
from hypothesis import given, strategies as st

from bipartition import (
    DivisionSpec,
    GaussianState,
    PhysicsError,
    apply_transform,
    compare_divisions,
    entanglement_entropy,
    entanglement_report,
    ground_state,
    log_negativity,
    partial_transpose,
    product_state,
    reduce,
    SymplecticTransform,
)
from bipartition.entanglement import state_in_frame, von_neumann_entropy
from bipartition.phase_space import local_symplectic, random_symplectic

seeds = st.integers(0, 2**32 - 1)
SPLIT = DivisionSpec("12", {"1": [0], "2": [1]})


def tmsv(r):
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    sigma = 0.5 * np.array([[c, s, 0, 0], [s, c, 0, 0], [0, 0, c, -s], [0, 0, -s, c]])
    return GaussianState(np.zeros(4), sigma)


def tmsv_entropy(r):
    c2, s2 = np.cosh(r) ** 2, np.sinh(r) ** 2
    return c2 * np.log(c2) - s2 * np.log(s2)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_two_mode_squeezed_vacuum_closed_form(r, split12):
    s = tmsv(r)
    assert log_negativity(s, split12) == pytest.approx(2 * r, rel=1e-12)
    assert entanglement_entropy(s, split12) == pytest.approx(tmsv_entropy(r), rel=1e-12)


def test_tmsv_frozen_values(split12):
    rep = entanglement_report(tmsv(0.5), split12)
    assert rep.log_negativity == pytest.approx(1.0, abs=1e-12)
    assert rep.entropy_of_entanglement == pytest.approx(0.659453, abs=1e-6)
    assert rep.verdict == "entangled" and rep.separable is False
    assert rep.min_ppt_symplectic_eigenvalue == pytest.approx(0.5 * np.exp(-1.0))


def test_partial_transpose_flips_selected_momenta():
    sigma = np.arange(16.0).reshape(4, 4)
    sigma = sigma + sigma.T
    div = DivisionSpec("d", {"a": [0], "b": [1]})
    flipped = partial_transpose(sigma, div)
    sign = np.array([1, 1, -1, 1])
    assert np.array_equal(flipped, sign[:, None] * sigma * sign[None, :])
    other = partial_transpose(sigma, div, part="b")
    sign = np.array([1, 1, 1, -1])
    assert np.array_equal(other, sign[:, None] * sigma * sign[None, :])
    with pytest.raises(ValueError):
        partial_transpose(sigma, div, part="c")


def test_product_vacuum_is_exactly_separable(split12):
    rep = entanglement_report(GaussianState.vacuum(2), split12)
    assert rep.log_negativity == 0.0
    assert rep.entropy_of_entanglement == 0.0
    assert rep.verdict == "separable" and rep.separable is True


def test_pair_ground_state_log_negativity(pair, split12):
    # E_N = 1/2 ln(w+/w-) = 1/4 ln 3 for the symmetric pair
    g = ground_state(pair)
    assert log_negativity(g, split12) == pytest.approx(0.25 * np.log(3), rel=1e-12)
    assert log_negativity(g, split12) == pytest.approx(0.274653, abs=1e-6)
    assert entanglement_entropy(g, split12) == pytest.approx(0.0943925, abs=1e-7)


def test_hydrogen_division_dependence(hydrogen, cm_rel):
    s = product_state(hydrogen, cm_rel, [0], width_ratio=2.0)
    ep = DivisionSpec("ep", {"e": [0], "p": [1]})
    cmr = DivisionSpec("cm_r", {"CM": [0], "R": [1]}, frame="cm_rel")
    reports = compare_divisions(s, [ep, cmr], {"cm_rel": cm_rel})
    assert reports[0].log_negativity == pytest.approx(1.44351, abs=1e-5)
    assert reports[0].entropy_of_entanglement == pytest.approx(1.07591, abs=1e-5)
    assert reports[1].log_negativity < 1e-10
    assert reports[1].entropy_of_entanglement == 0.0
    assert [r.verdict for r in reports] == ["entangled", "separable"]
    # sequence form, keyed by target division
    again = compare_divisions(s, [ep, cmr], [cm_rel])
    assert again[0].log_negativity == reports[0].log_negativity


def test_missing_transforms_all_listed(pair):
    g = ground_state(pair)
    divs = [DivisionSpec("a", {"x": [0], "y": [1]}, frame="f1"),
            DivisionSpec("b", {"x": [0], "y": [1]}, frame="f2")]
    with pytest.raises(ValueError, match=r"\['f1', 'f2'\]"):
        compare_divisions(g, divs, {})
    with pytest.raises(ValueError, match="unreachable"):
        state_in_frame(g, divs[0], None)


def test_mixed_state_entropy_refused(split12):
    mixed = GaussianState(np.zeros(4), np.eye(4))
    with pytest.raises(PhysicsError, match="pure"):
        entanglement_entropy(mixed, split12)
    rep = entanglement_report(mixed, split12)
    assert rep.entropy_of_entanglement is None and rep.verdict == "separable"


def test_thermal_entropy_formula():
    nu = 1.5
    assert von_neumann_entropy([nu]) == pytest.approx(2 * np.log(2) - np.log(1))
    assert von_neumann_entropy([0.5, 0.5]) == 0.0


def test_multimode_split_undecided_when_ppt():
    div = DivisionSpec("2x2", {"a": [0, 1], "b": [2, 3]})
    rep = entanglement_report(GaussianState.vacuum(4), div)
    assert rep.verdict == "undecided" and rep.separable is None
    sq = tmsv(0.3).sigma
    big = 0.5 * np.eye(8)
    idx = [0, 2, 4, 6]  # modes 0 and 2, one per side
    big[np.ix_(idx, idx)] = sq
    ent = GaussianState(np.zeros(8), big)
    assert entanglement_report(ent, div).verdict == "entangled"


# ---- properties -----------------------------------------------------------

def random_pure(rng, n=2):
    S = random_symplectic(n, rng)
    return GaussianState(np.zeros(2 * n), 0.5 * S @ S.T)


@given(seed=seeds)
def test_log_negativity_invariant_under_local_transforms(seed):
    rng = np.random.default_rng(seed)
    state = random_pure(rng)
    L = local_symplectic({frozenset([0]): random_symplectic(1, rng),
                          frozenset([1]): random_symplectic(1, rng)}, 2)
    moved = apply_transform(state, SymplecticTransform(L))
    assert abs(log_negativity(moved, SPLIT) - log_negativity(state, SPLIT)) < 1e-9


@given(seed=seeds)
def test_pure_state_negativity_entropy_relation(seed):
    rng = np.random.default_rng(seed)
    state = random_pure(rng)
    nu = reduce(state, [0]).spectrum()[0]
    expected_en = -np.log(2 * nu - np.sqrt(max(4 * nu ** 2 - 1, 0.0)))
    assert log_negativity(state, SPLIT) == pytest.approx(expected_en, abs=1e-8)
    assert entanglement_entropy(state, SPLIT) == pytest.approx(
        entanglement_entropy(state, SPLIT, part="2"), abs=1e-8)


@given(seed=seeds, n=st.integers(2, 4))
def test_separable_verdict_implies_zero_negativity(seed, n):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    modes = rng.permutation(n)
    div = DivisionSpec("d", {"a": modes[:k].tolist(), "b": modes[k:].tolist()})
    nu = rng.uniform(0.5, 2.0, size=n)
    state = GaussianState(np.zeros(2 * n), np.diag(np.concatenate([nu, nu])))
    blocks = {frozenset(modes[:k].tolist()): random_symplectic(k, rng),
              frozenset(modes[k:].tolist()): random_symplectic(n - k, rng)}
    local = apply_transform(state, SymplecticTransform(local_symplectic(blocks, n)))
    rep = entanglement_report(local, div)
    assert rep.verdict in ("separable", "undecided")
    assert rep.log_negativity == 0.0
