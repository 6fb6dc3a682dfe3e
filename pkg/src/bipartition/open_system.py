"""Gaussian diffusion/damping acting on chosen modes, and division shielding.

Moments obey

    d mean / dt  = A mean + J b
    d sigma / dt = A sigma + sigma A^T + D

with ``A = J M - Gamma``. Each fixed step is integrated exactly (matrix
exponential plus Van Loan's integral for the noise), so the step size
matters only for sampling and for the validity guard, which halves the
step whenever a candidate covariance would become unphysical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .entanglement import log_negativity
from .errors import NumericalFailure, PhysicsError
from .gaussian_state import GaussianState, apply_transform, is_physical
from .hamiltonian import QuadraticHamiltonian
from .phase_space import DivisionSpec, SymplecticTransform, mode_indices, symplectic_form

DEFAULT_DT = 1e-3
VALIDITY_TOL = 1e-9
MIN_DT = 1e-12
RATE_ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Environment acting on ``target_modes``.

    ``diffusion`` is a PSD matrix over the targets' phase-space coordinates
    ordered ``(x_targets..., p_targets...)``, in covariance per unit time.
    ``damping`` is an energy relaxation rate: both quadratures of each
    target mode decay at ``damping / 2``. With ``frame`` the targets refer
    to that transform's output coordinates.
    """

    target_modes: tuple[int, ...]
    diffusion: np.ndarray
    damping: float = 0.0
    frame: SymplecticTransform | None = None

    def __post_init__(self):
        modes = tuple(sorted(set(int(i) for i in self.target_modes)))
        D = np.atleast_2d(np.asarray(self.diffusion, dtype=float))
        k = 2 * len(modes)
        if D.shape != (k, k):
            raise ValueError(f"diffusion must be {k}x{k} for modes {modes}, got {D.shape}")
        if np.max(np.abs(D - D.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(D), initial=0.0)):
            raise ValueError("diffusion matrix is not symmetric")
        if k and np.min(np.linalg.eigvalsh(D)) < -1e-12 * max(1.0, np.max(np.abs(D), initial=0.0)):
            raise PhysicsError("diffusion matrix is not positive semidefinite")
        if self.damping < 0:
            raise PhysicsError(f"damping rate must be nonnegative, got {self.damping}")
        object.__setattr__(self, "target_modes", modes)
        object.__setattr__(self, "diffusion", D)

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls((), np.zeros((0, 0)))

    def generators(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Diffusion ``D`` and damping ``Gamma`` in native coordinates."""
        if any(not 0 <= i < n for i in self.target_modes):
            raise ValueError(f"noise targets {self.target_modes} outside 0..{n - 1}")
        D = np.zeros((2 * n, 2 * n))
        G = np.zeros((2 * n, 2 * n))
        if self.target_modes:
            idx = mode_indices(self.target_modes, n)
            D[np.ix_(idx, idx)] = self.diffusion
            G[idx, idx] = 0.5 * self.damping
        if self.frame is not None:
            if self.frame.dim != 2 * n:
                raise ValueError("noise frame dimension does not match the system")
            S_inv = self.frame.require_symplectic().S_inv
            D = S_inv @ D @ S_inv.T
            G = S_inv @ G @ self.frame.S
        return 0.5 * (D + D.T), G


class _Propagator:
    """Exact one-step map for a fixed step size."""

    def __init__(self, A: np.ndarray, D: np.ndarray, c: np.ndarray, dt: float):
        dim = A.shape[0]
        # Van Loan: expm([[-A, D], [0, A^T]] dt) = [[., F12], [0, F22]],
        # Phi = F22^T and the noise integral is Phi F12.
        block = np.zeros((2 * dim, 2 * dim))
        block[:dim, :dim] = -A
        block[:dim, dim:] = D
        block[dim:, dim:] = A.T
        F = expm(block * dt)
        self.phi = F[dim:, dim:].T
        Q = self.phi @ F[:dim, dim:]
        self.Q = 0.5 * (Q + Q.T)
        aug = np.zeros((dim + 1, dim + 1))
        aug[:dim, :dim] = A
        aug[:dim, dim] = c
        self.shift = expm(aug * dt)[:dim, dim]
        self.dt = dt

    def __call__(self, mean, sigma):
        sigma = self.phi @ sigma @ self.phi.T + self.Q
        return self.phi @ mean + self.shift, 0.5 * (sigma + sigma.T)


class _Integrator:
    def __init__(self, H: QuadraticHamiltonian, noise: NoiseSpec, dt: float):
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        n = H.n_modes
        D, G = noise.generators(n)
        J = symplectic_form(n)
        self.A = J @ H.M - G
        self.D = D
        self.c = J @ H.b
        self.dt = dt
        self._cache: dict[float, _Propagator] = {}

    def _prop(self, h: float) -> _Propagator:
        if h not in self._cache:
            self._cache[h] = _Propagator(self.A, self.D, self.c, h)
        return self._cache[h]

    def advance(self, mean, sigma, duration: float):
        """Advance by ``duration`` in steps of at most ``dt``."""
        remaining = duration
        h = self.dt
        while remaining > 1e-15 * max(1.0, duration):
            step = min(h, remaining)
            new_mean, new_sigma = self._prop(step)(mean, sigma)
            if not is_physical(new_sigma, VALIDITY_TOL):
                h = step / 2
                if h < MIN_DT:
                    raise NumericalFailure(
                        f"step size underflow (dt < {MIN_DT:g}) while keeping the "
                        "covariance physical; the noise model violates the "
                        "uncertainty principle (damping without enough diffusion?)")
                continue
            mean, sigma = new_mean, new_sigma
            remaining -= step
        return mean, sigma


def evolve(state: GaussianState, H: QuadraticHamiltonian, noise: NoiseSpec,
           t: float, dt: float = DEFAULT_DT) -> GaussianState:
    if t < 0:
        raise ValueError(f"evolution time must be nonnegative, got {t}")
    if H.n_modes != state.n_modes:
        raise ValueError("state and Hamiltonian have different mode counts")
    mean, sigma = _Integrator(H, noise, dt).advance(state.mean, state.sigma, t)
    return GaussianState(mean, sigma)


def trajectory(state: GaussianState, H: QuadraticHamiltonian, noise: NoiseSpec,
               times: Sequence[float], dt: float = DEFAULT_DT) -> list[GaussianState]:
    """States at each of the (nondecreasing) ``times``."""
    times = [float(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])) or (times and times[0] < 0):
        raise ValueError("sample times must be nonnegative and nondecreasing")
    integ = _Integrator(H, noise, dt)
    mean, sigma = state.mean, state.sigma
    out, now = [], 0.0
    for t in times:
        mean, sigma = integ.advance(mean, sigma, t - now)
        now = t
        out.append(GaussianState(mean, sigma))
    return out


def _division_en(state, div, frame):
    """Log-negativity of ``div``, whose indices refer to ``frame`` coordinates."""
    if frame is not None:
        state = apply_transform(state, frame)
    return log_negativity(state, div)


def decoherence_time(state: GaussianState, H: QuadraticHamiltonian, noise: NoiseSpec,
                     div: DivisionSpec, frame: SymplecticTransform | None = None,
                     horizon: float = 10.0, dt: float = DEFAULT_DT,
                     rtol: float = 1e-3, probes: int = 256) -> float:
    """First time the division's log-negativity drops below ``1/e`` of its start.

    The horizon is scanned at ``probes`` evenly spaced times, then the
    first bracketing interval is bisected to well inside ``rtol``.
    Returns ``inf`` if no crossing occurs before ``horizon``.
    """
    e0 = _division_en(state, div, frame)
    if e0 <= 0:
        raise PhysicsError(f"division {div.name!r} carries no entanglement to lose")
    threshold = e0 / math.e
    integ = _Integrator(H, noise, dt)
    h = horizon / probes
    mean, sigma = state.mean, state.sigma
    t_lo = 0.0
    for k in range(1, probes + 1):
        m_new, s_new = integ.advance(mean, sigma, h)
        if _division_en(GaussianState(m_new, s_new), div, frame) < threshold:
            break
        mean, sigma = m_new, s_new
        t_lo = k * h
    else:
        return math.inf
    lo, hi = 0.0, h
    while hi - lo > 1e-3 * rtol * (t_lo + hi):
        mid = 0.5 * (lo + hi)
        m_mid, s_mid = integ.advance(mean, sigma, mid)
        if _division_en(GaussianState(m_mid, s_mid), div, frame) < threshold:
            hi = mid
        else:
            lo = mid
    return t_lo + hi


@dataclass(frozen=True)
class ShieldRank:
    name: str
    degradation_rate: float
    initial_log_negativity: float


def shielded_division_search(state: GaussianState, H: QuadraticHamiltonian, noise: NoiseSpec,
                             candidates: Sequence[tuple[str, SymplecticTransform | None, DivisionSpec]],
                             step: float = DEFAULT_DT) -> list[ShieldRank]:
    """Rank divisions by how fast the environment erodes their entanglement.

    The rate is ``(E_N(0) - E_N(step)) / step``; rates below 1e-9 count as
    zero. Lower rates rank first, ties keep declaration order.
    """
    if not candidates:
        raise ValueError("shield search needs at least one candidate division")
    for name, S, _ in candidates:
        if S is not None:
            S.require_symplectic()
    later = evolve(state, H, noise, step, dt=step)
    ranks = []
    for name, S, div in candidates:
        e0 = _division_en(state, div, S)
        e1 = _division_en(later, div, S)
        rate = (e0 - e1) / step
        if abs(rate) < RATE_ZERO_TOL:
            rate = 0.0
        ranks.append(ShieldRank(name, rate, e0))
    return sorted(ranks, key=lambda r: r.degradation_rate)
