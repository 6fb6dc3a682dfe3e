"""Entanglement of a Gaussian state relative to a chosen division.

All logarithms are natural. Separability is decided by the PPT criterion,
which is exact when one side of the bipartition is a single mode; for
larger splits a vanishing negativity yields the verdict ``"undecided"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import PhysicsError
from .gaussian_state import GaussianState, apply_transform, reduce, symplectic_spectrum
from .phase_space import DivisionSpec, SymplecticTransform

PPT_TOL = 1e-9
ENTROPY_PURITY_TOL = 1e-6


@dataclass(frozen=True)
class EntanglementReport:
    division: str
    parts: tuple[str, str]
    log_negativity: float
    entropy_of_entanglement: float | None
    min_ppt_symplectic_eigenvalue: float
    verdict: str  # "separable" | "entangled" | "undecided"
    ppt_spectrum: tuple[float, ...]
    reduced_spectra: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    @property
    def separable(self) -> bool | None:
        return {"separable": True, "entangled": False}.get(self.verdict)


def _part_modes(div: DivisionSpec, n: int, part: str | None):
    (name_a, modes_a), (name_b, modes_b) = div.halves(n)
    if part is None or part == name_a:
        return modes_a
    if part == name_b:
        return modes_b
    raise ValueError(f"division {div.name!r} has no part {part!r}")


def partial_transpose(sigma, div: DivisionSpec, part: str | None = None) -> np.ndarray:
    """Flip the sign of the chosen part's momenta (first part by default)."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    modes = _part_modes(div, n, part)
    flip = np.ones(2 * n)
    flip[[n + i for i in modes]] = -1.0
    return flip[:, None] * sigma * flip[None, :]


def _negativity_terms(nu_pt: np.ndarray) -> np.ndarray:
    # eigenvalues within tolerance of 1/2 count as separable, keeping
    # "separable => E_N == 0" exact
    terms = -np.log(2.0 * nu_pt)
    terms[nu_pt >= 0.5 - PPT_TOL] = 0.0
    return terms


def log_negativity(state: GaussianState, div: DivisionSpec) -> float:
    """``E_N = sum_k max(0, -ln 2 nu~_k)`` over the partially transposed spectrum."""
    nu_pt = symplectic_spectrum(partial_transpose(state.sigma, div))
    return float(np.sum(_negativity_terms(nu_pt)))


def von_neumann_entropy(nu) -> float:
    """Entropy of a Gaussian state from its symplectic eigenvalues."""
    total = 0.0
    for v in np.atleast_1d(nu):
        if v <= 0.5 + 1e-12:  # pure mode up to round-off
            continue
        total += (v + 0.5) * np.log(v + 0.5) - (v - 0.5) * np.log(v - 0.5)
    return float(total)


def entanglement_entropy(state: GaussianState, div: DivisionSpec, part: str | None = None) -> float:
    """Entropy of entanglement of a pure state across ``div``."""
    nu = state.spectrum()
    if np.max(np.abs(nu - 0.5)) > ENTROPY_PURITY_TOL:
        raise PhysicsError(
            f"entropy of entanglement needs a pure global state; symplectic "
            f"eigenvalues deviate from 1/2 by up to {np.max(np.abs(nu - 0.5)):.3e}")
    modes = _part_modes(div, state.n_modes, part)
    return von_neumann_entropy(reduce(state, modes).spectrum())


def entanglement_report(state: GaussianState, div: DivisionSpec) -> EntanglementReport:
    n = state.n_modes
    (name_a, modes_a), (name_b, modes_b) = div.halves(n)
    nu_pt = symplectic_spectrum(partial_transpose(state.sigma, div))
    e_n = float(np.sum(_negativity_terms(nu_pt)))
    min_pt = float(np.min(nu_pt))
    if min_pt < 0.5 - PPT_TOL:
        verdict = "entangled"
    elif min(len(modes_a), len(modes_b)) == 1:
        verdict = "separable"
    else:
        verdict = "undecided"
    nu = state.spectrum()
    entropy = None
    if np.max(np.abs(nu - 0.5)) <= ENTROPY_PURITY_TOL:
        entropy = entanglement_entropy(state, div)
    reduced = {
        name_a: tuple(float(v) for v in reduce(state, modes_a).spectrum()),
        name_b: tuple(float(v) for v in reduce(state, modes_b).spectrum()),
    }
    return EntanglementReport(
        division=div.name,
        parts=(name_a, name_b),
        log_negativity=e_n,
        entropy_of_entanglement=entropy,
        min_ppt_symplectic_eigenvalue=min_pt,
        verdict=verdict,
        ppt_spectrum=tuple(float(v) for v in nu_pt),
        reduced_spectra=reduced,
    )


def _registry(transforms) -> dict[str, SymplecticTransform]:
    if transforms is None:
        return {}
    if isinstance(transforms, Mapping):
        return dict(transforms)
    return {t.target_division: t for t in transforms}


def state_in_frame(state: GaussianState, div: DivisionSpec, transforms=None) -> GaussianState:
    """Express ``state`` in the coordinates ``div`` is defined in."""
    if div.frame is None:
        return state
    registry = _registry(transforms)
    if div.frame not in registry:
        raise ValueError(
            f"division {div.name!r} is unreachable: no transform named {div.frame!r} "
            f"(registered: {sorted(registry)})")
    return apply_transform(state, registry[div.frame])


def compare_divisions(state: GaussianState, divisions: Sequence[DivisionSpec],
                      transforms=None) -> list[EntanglementReport]:
    """One :class:`EntanglementReport` per division of the same state.

    ``transforms`` maps frame names to transforms (a sequence is keyed by
    each transform's ``target_division``). Every missing frame is reported
    at once.
    """
    registry = _registry(transforms)
    missing = sorted({d.frame for d in divisions if d.frame is not None and d.frame not in registry})
    if missing:
        raise ValueError(
            f"unreachable divisions: missing transforms {missing} "
            f"(registered: {sorted(registry)})")
    return [entanglement_report(state_in_frame(state, d, registry), d) for d in divisions]
