"""Brute-force cross-check: two-particle wavefunctions sampled on a grid.

A pure two-mode Gaussian is written out as ``psi(x1, x2)`` on an N x N
lattice; its singular values give the Schmidt coefficients directly, with
no reference to covariance-matrix formulas.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsError
from .gaussian_state import GaussianState, apply_transform
from .phase_space import SymplecticTransform

DEFAULT_POINTS = 512
DEFAULT_EXTENT = 6.0  # half-width of the grid in marginal standard deviations


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    x1: np.ndarray
    x2: np.ndarray
    amplitudes: np.ndarray

    @property
    def dx(self) -> float:
        return float(self.x1[1] - self.x1[0])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.dx ** 2)


def wavefunction(state: GaussianState):
    """Position-space wavefunction of a pure Gaussian state as a callable.

    For ``psi = exp(-1/2 (x-m)^T G (x-m) + i p.x)`` the position and cross
    covariances fix ``G = sigma_xx^-1 / 2 - i sigma_xx^-1 sigma_xp``.
    The returned function accepts an array of shape ``(..., n)``.
    """
    if not state.is_pure(1e-8):
        raise PhysicsError("only pure states have a wavefunction")
    n = state.n_modes
    sxx = state.sigma[:n, :n]
    sxp = state.sigma[:n, n:]
    sxx_inv = np.linalg.inv(sxx)
    G = 0.5 * sxx_inv - 1j * sxx_inv @ sxp
    G = 0.5 * (G + G.T)
    mx, mp = state.mean[:n], state.mean[n:]
    amp = (np.linalg.det(G.real) / np.pi ** n) ** 0.25

    def psi(x):
        x = np.asarray(x, dtype=float)
        y = x - mx
        quad = np.einsum("...i,ij,...j->...", y, G, y)
        return amp * np.exp(-0.5 * quad + 1j * (x @ mp))

    return psi


def pullback(psi, position_map, shift=None):
    """Wavefunction in old coordinates given one in ``q = T x + c`` coordinates."""
    T = np.asarray(position_map, dtype=float)
    c = np.zeros(T.shape[0]) if shift is None else np.asarray(shift, dtype=float)
    jac = np.sqrt(abs(np.linalg.det(T)))

    def psi_old(x):
        x = np.asarray(x, dtype=float)
        return jac * psi(x @ T.T + c)

    return psi_old


def synthesize(state: GaussianState, transform: SymplecticTransform | None = None,
               L: float | None = None, N: int = DEFAULT_POINTS) -> GridWavefunction:
    """Sample a pure two-mode state on a uniform grid.

    With ``transform`` the state is first carried into that frame. The grid
    spans ``mean +- L`` on each axis; ``L`` defaults to six times the widest
    marginal standard deviation and is widened (with a warning) if smaller.
    """
    if transform is not None:
        state = apply_transform(state, transform)
    if state.n_modes != 2:
        raise ValueError(f"the grid oracle handles two modes, got {state.n_modes}")
    if not state.is_pure(1e-8):
        raise PhysicsError("the grid oracle needs a pure state")
    spread = float(np.sqrt(max(state.sigma[0, 0], state.sigma[1, 1])))
    needed = DEFAULT_EXTENT * spread
    if L is None:
        L = needed
    elif L < needed:
        warnings.warn(
            f"grid half-width {L:g} covers fewer than {DEFAULT_EXTENT:g} standard "
            f"deviations; expanding to {needed:g}", RuntimeWarning, stacklevel=2)
        L = needed
    offsets = np.linspace(-L, L, N)
    x1 = state.mean[0] + offsets
    x2 = state.mean[1] + offsets
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    values = wavefunction(state)(np.stack([X1, X2], axis=-1))
    dx = offsets[1] - offsets[0]
    values = values / np.sqrt(np.sum(np.abs(values) ** 2) * dx ** 2)
    if np.max(np.abs(values.imag)) == 0.0:
        values = values.real
    return GridWavefunction(x1, x2, values)


def schmidt_spectrum(psi: GridWavefunction) -> np.ndarray:
    """Schmidt coefficients ``C_i`` (descending) from the grid amplitudes."""
    if abs(psi.norm - 1.0) > 1e-8:
        raise PhysicsError(f"wavefunction is not normalized (norm {psi.norm:.10f})")
    C = np.linalg.svd(psi.amplitudes * psi.dx, compute_uv=False)
    if abs(np.sum(C ** 2) - 1.0) > 1e-6:
        raise PhysicsError("Schmidt coefficients do not square-sum to 1")
    return C


def oracle_measures(spectrum) -> tuple[float, float]:
    """``(-sum C^2 ln C^2, 2 ln sum C)`` for a pure-state Schmidt spectrum."""
    C = np.asarray(spectrum, dtype=float)
    if C.size == 0:
        raise ValueError("empty Schmidt spectrum")
    if abs(np.sum(C ** 2) - 1.0) > 1e-6:
        raise ValueError("Schmidt spectrum is not normalized")
    p = C[C > 0] ** 2
    entropy = float(-np.sum(p * np.log(p)))
    neg = float(2.0 * np.log(np.sum(np.abs(C))))
    return max(entropy, 0.0), max(neg, 0.0)
