"""Gaussian states: first and second moments in xxpp ordering.

The vacuum covariance is ``I/2`` (hbar = 1), so a state is physical when
every symplectic eigenvalue is at least 1/2, and pure when all equal 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import PhysicsError
from .hamiltonian import (
    QuadraticHamiltonian,
    _require_positive,
    normal_modes,
    partition_blocks,
    transform_hamiltonian,
)
from .phase_space import (
    DivisionSpec,
    SymplecticTransform,
    _frozen,
    mode_indices,
    symplectic_eigenvalues,
)

VALIDITY_TOL = 1e-9
PURITY_TOL = 1e-9


def symplectic_spectrum(sigma) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix, descending."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValueError(f"covariance must be 2n x 2n, got shape {sigma.shape}")
    if np.max(np.abs(sigma - sigma.T)) > 1e-12 * max(1.0, np.max(np.abs(sigma))):
        raise ValueError("covariance matrix is not symmetric")
    return symplectic_eigenvalues(sigma)


def is_physical(sigma, tol: float = VALIDITY_TOL) -> bool:
    try:
        nu = symplectic_spectrum(sigma)
    except ValueError:
        return False
    return bool(np.min(nu) >= 0.5 - tol)


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
            raise ValueError(f"covariance must be 2n x 2n, got shape {sigma.shape}")
        if mean.shape != (sigma.shape[0],):
            raise ValueError(f"mean has shape {mean.shape}, expected ({sigma.shape[0]},)")
        nu = symplectic_spectrum(sigma)
        if np.min(nu) < 0.5 - VALIDITY_TOL:
            raise PhysicsError(
                f"covariance violates the uncertainty principle: smallest "
                f"symplectic eigenvalue {np.min(nu):.12g} < 1/2")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "sigma", _frozen(0.5 * (sigma + sigma.T)))

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0] // 2

    def spectrum(self) -> np.ndarray:
        return symplectic_spectrum(self.sigma)

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return bool(np.max(np.abs(self.spectrum() - 0.5)) <= tol)

    def purity(self) -> float:
        """``Tr rho^2 = prod_k 1/(2 nu_k)``."""
        return float(np.prod(0.5 / self.spectrum()))

    @classmethod
    def vacuum(cls, n: int) -> "GaussianState":
        return cls(np.zeros(2 * n), 0.5 * np.eye(2 * n))


def apply_transform(state: GaussianState, S: SymplecticTransform) -> GaussianState:
    """``mean -> S mean + d``, ``sigma -> S sigma S^T``."""
    if S.dim != state.sigma.shape[0]:
        raise ValueError(f"transform is {S.dim}-dimensional, state {state.sigma.shape[0]}")
    S.require_symplectic()
    return GaussianState(S.S @ state.mean + S.d, S.S @ state.sigma @ S.S.T)


def reduce(state: GaussianState, modes: Iterable[int]) -> GaussianState:
    """Marginal state of the selected modes (order of ``modes`` is ignored)."""
    modes = sorted(set(int(m) for m in modes))
    n = state.n_modes
    if not modes:
        raise ValueError("cannot reduce to an empty set of modes")
    if modes[0] < 0 or modes[-1] >= n:
        raise ValueError(f"mode indices {modes} out of range 0..{n - 1}")
    idx = mode_indices(modes, n)
    return GaussianState(state.mean[idx], state.sigma[np.ix_(idx, idx)])


def ground_state(H: QuadraticHamiltonian) -> GaussianState:
    """Ground state of a confining quadratic Hamiltonian.

    Built as the vacuum of the normal modes and carried back, so no Riccati
    equation is solved. With a linear term the mean sits at ``-M^-1 b``.
    """
    try:
        _require_positive(H.M)
    except PhysicsError as exc:
        raise PhysicsError(
            f"{exc}; no ground state exists. Regularize free modes with a trap "
            "(hamiltonian.trap) or prepare them as wavepackets (product_state)") from None
    S = normal_modes(H).S_nm.S
    S_inv = np.linalg.inv(S)
    sigma = 0.5 * S_inv @ S_inv.T
    mean = -np.linalg.solve(H.M, H.b) + 0.0  # no negative zeros
    return GaussianState(mean, sigma)


def wavepacket_covariance(width: float) -> np.ndarray:
    """Minimum-uncertainty packet with position standard deviation ``width``."""
    if not width > 0:
        raise PhysicsError(f"wavepacket width must be positive, got {width}")
    return np.diag([width ** 2, 0.25 / width ** 2])


def product_state(H: QuadraticHamiltonian, S: SymplecticTransform,
                  free_modes: Sequence[int], width: float | None = None,
                  width_ratio: float | None = None) -> GaussianState:
    """Product of wavepackets on ``free_modes`` and the ground state of the rest.

    ``free_modes`` index the coordinates produced by ``S``; the Hamiltonian
    must not couple them to the remaining modes there. The packet width is
    either given directly or as ``width_ratio`` times the ground-state
    position spread of the first bound mode. Default width is 1.0. The
    result is returned in native coordinates.
    """
    if width is not None and width_ratio is not None:
        raise ValueError("give either width or width_ratio, not both")
    n = H.n_modes
    free = sorted(set(int(i) for i in free_modes))
    bound = [i for i in range(n) if i not in free]
    H_new = transform_hamiltonian(H, S)
    sigma = np.zeros((2 * n, 2 * n))
    mean = np.zeros(2 * n)
    bound_sigma = None
    if bound:
        if free:
            blocks = partition_blocks(H_new, DivisionSpec("product", {"free": free, "bound": bound}))
            if blocks.coupling_norm > 1e-10 * max(1.0, float(np.max(np.abs(H_new.M)))):
                raise PhysicsError(
                    f"free modes {free} are coupled to modes {bound} "
                    f"(coupling norm {blocks.coupling_norm:.3e}); not a product split")
            bound_state = ground_state(
                QuadraticHamiltonian(blocks.H_F, H_new.b[blocks.index_F]))
        else:
            bound_state = ground_state(H_new)
        bound_sigma = bound_state.sigma
        ib = mode_indices(bound, n)
        sigma[np.ix_(ib, ib)] = bound_sigma
        mean[ib] = bound_state.mean
    if width_ratio is not None:
        if bound_sigma is None:
            raise ValueError("width_ratio needs at least one bound mode")
        width = width_ratio * float(np.sqrt(bound_sigma[0, 0]))
    elif width is None:
        width = 1.0
    packet = wavepacket_covariance(width)
    for i in free:
        sigma[np.ix_([i, i + n], [i, i + n])] = packet
    native = apply_transform(GaussianState(mean, sigma), S.inverse())
    return native
