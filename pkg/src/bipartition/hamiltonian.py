"""Quadratic Hamiltonians, their division blocks, and normal-mode decoupling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import schur

from .errors import PhysicsError
from .phase_space import (
    DivisionSpec,
    SymplecticTransform,
    _frozen,
    mode_indices,
    symplectic_eigenvalues,
    symplectic_form,
)

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """``H(z) = 1/2 z^T M z + b^T z`` in xxpp ordering."""

    M: np.ndarray
    b: np.ndarray | None = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ValueError(f"Hamiltonian matrix must be 2n x 2n, got shape {M.shape}")
        asym = np.max(np.abs(M - M.T))
        if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(M))):
            raise ValueError(f"Hamiltonian matrix is not symmetric (max asymmetry {asym:.2e})")
        b = np.zeros(M.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        if b.shape != (M.shape[0],):
            raise ValueError(f"linear term has shape {b.shape}, expected ({M.shape[0]},)")
        object.__setattr__(self, "M", _frozen(0.5 * (M + M.T)))
        object.__setattr__(self, "b", _frozen(b))

    @property
    def n_modes(self) -> int:
        return self.M.shape[0] // 2

    @property
    def drift(self) -> np.ndarray:
        """Generator ``A = J M`` of the linear equations of motion."""
        return symplectic_form(self.n_modes) @ self.M

    def energy(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.M @ z + self.b @ z)

    def spectrum(self) -> np.ndarray:
        """Symplectic eigenvalues of ``M`` (the mode frequencies when ``M > 0``)."""
        return symplectic_eigenvalues(self.M)

    def is_positive_definite(self) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self.M)) > 0)


@dataclass(frozen=True, eq=False)
class PartitionBlocks:
    division: str
    parts: tuple[str, str]
    index_E: np.ndarray
    index_F: np.ndarray
    H_E: np.ndarray
    H_F: np.ndarray
    H_EF: np.ndarray

    @property
    def coupling_norm(self) -> float:
        return float(np.linalg.norm(self.H_EF))

    def reassemble(self) -> np.ndarray:
        dim = len(self.index_E) + len(self.index_F)
        M = np.zeros((dim, dim))
        M[np.ix_(self.index_E, self.index_E)] = self.H_E
        M[np.ix_(self.index_F, self.index_F)] = self.H_F
        M[np.ix_(self.index_E, self.index_F)] = self.H_EF
        M[np.ix_(self.index_F, self.index_E)] = self.H_EF.T
        return M


@dataclass(frozen=True, eq=False)
class NormalModeResult:
    frequencies: np.ndarray
    S_nm: SymplecticTransform
    modal_matrix: np.ndarray  # columns: sign-fixed mode shapes in mass-weighted positions


def build(masses: Sequence[float], V) -> QuadraticHamiltonian:
    """``H = sum p_i^2 / 2 m_i + 1/2 x^T V x``."""
    masses = np.asarray(masses, dtype=float)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n = len(masses)
    if np.any(masses <= 0):
        raise PhysicsError(f"masses must be positive, got {masses.tolist()}")
    if V.shape != (n, n):
        raise ValueError(f"potential matrix must be {n}x{n}, got {V.shape}")
    if np.max(np.abs(V - V.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(V))):
        raise ValueError("potential matrix is not symmetric")
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = V
    M[n:, n:] = np.diag(1.0 / masses)
    return QuadraticHamiltonian(M)


def harmonic_two_body(m1: float, m2: float, stiffness: float = 1.0) -> QuadraticHamiltonian:
    """Two particles bound by ``1/2 k (x1 - x2)^2``; the centre of mass is free."""
    V = stiffness * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return build([m1, m2], V)


def trap(H: QuadraticHamiltonian, modes: Sequence[int], stiffness: float) -> QuadraticHamiltonian:
    """Add ``1/2 k x_i^2`` on each listed mode (regularizes free modes)."""
    M = np.array(H.M)
    for i in modes:
        M[i, i] += stiffness
    return QuadraticHamiltonian(M, H.b)


def partition_blocks(H: QuadraticHamiltonian, div: DivisionSpec) -> PartitionBlocks:
    """Split ``M`` into subsystem blocks and the cross-coupling block."""
    n = H.n_modes
    (name_E, modes_E), (name_F, modes_F) = div.halves(n)
    iE = mode_indices(modes_E, n)
    iF = mode_indices(modes_F, n)
    M = H.M
    return PartitionBlocks(
        division=div.name,
        parts=(name_E, name_F),
        index_E=iE,
        index_F=iF,
        H_E=M[np.ix_(iE, iE)].copy(),
        H_F=M[np.ix_(iF, iF)].copy(),
        H_EF=M[np.ix_(iE, iF)].copy(),
    )


def transform_hamiltonian(H: QuadraticHamiltonian, S: SymplecticTransform) -> QuadraticHamiltonian:
    """Rewrite ``H`` in the coordinates ``zeta = S z + d``.

    ``M' = S^-T M S^-1`` and ``b' = S^-T b - M' d`` (constants dropped).
    """
    if S.dim != H.M.shape[0]:
        raise ValueError(f"transform is {S.dim}-dimensional, Hamiltonian {H.M.shape[0]}")
    S.require_symplectic()
    S_inv = S.S_inv
    M_new = S_inv.T @ H.M @ S_inv
    M_new = 0.5 * (M_new + M_new.T)
    b_new = S_inv.T @ H.b - M_new @ S.d
    return QuadraticHamiltonian(M_new, b_new)


def _require_positive(M: np.ndarray) -> None:
    evals = np.linalg.eigvalsh(M)
    if evals[0] <= 0:
        raise PhysicsError(
            f"Hamiltonian matrix is not positive definite: eigenvalue {evals[0]:.6g} "
            "<= 0 (free or unstable mode; add a confining trap)")


def _sign_fix(columns: np.ndarray) -> np.ndarray:
    """Flip columns so the first non-negligible entry is positive."""
    out = columns.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.max(np.abs(col))))
        if lead.size and col[lead[0]] < 0:
            out[:, k] = -col
    return out


def _mode_order(freqs: np.ndarray, shapes: np.ndarray) -> np.ndarray:
    """Descending frequency; ties broken lexicographically on participation vectors."""
    scale = max(1.0, float(np.max(np.abs(freqs))))
    rounded = np.round(freqs / scale, 10)
    participation = shapes ** 2 / np.sum(shapes ** 2, axis=0)
    keys = [tuple(-participation[:, k]) for k in range(len(freqs))]
    return np.array(sorted(range(len(freqs)), key=lambda k: (-rounded[k], keys[k])))


def _sym_power(A: np.ndarray, power: float) -> np.ndarray:
    w, U = np.linalg.eigh(A)
    return (U * w ** power) @ U.T


def _mass_weighted_modes(M: np.ndarray):
    n = M.shape[0] // 2
    V, K = M[:n, :n], M[n:, n:]
    K_inv_half = _sym_power(K, -0.5)
    # y = K^-1/2 x turns the kinetic term into 1/2 |p_y|^2
    V_w = _sym_power(K, 0.5) @ V @ _sym_power(K, 0.5)
    omega2, O = np.linalg.eigh(0.5 * (V_w + V_w.T))
    freqs = np.sqrt(omega2)
    O = _sign_fix(O)
    order = _mode_order(freqs, O)
    freqs, O = freqs[order], O[:, order]
    T = np.diag(np.sqrt(freqs)) @ O.T @ K_inv_half
    S = np.zeros_like(M)
    S[:n, :n] = T
    S[n:, n:] = np.linalg.inv(T).T
    return freqs, S, O


def _williamson_modes(M: np.ndarray):
    n = M.shape[0] // 2
    J = symplectic_form(n)
    M_inv_half = _sym_power(M, -0.5)
    skew = M_inv_half @ J @ M_inv_half
    T, Z = schur(skew, output="real")
    us, vs, ts = [], [], []
    for k in range(n):
        a, b = 2 * k, 2 * k + 1
        t = T[a, b]
        if t > 0:
            us.append(Z[:, a]); vs.append(Z[:, b])
        else:
            us.append(Z[:, b]); vs.append(Z[:, a])
        ts.append(abs(t))
    ts = np.array(ts)
    freqs = 1.0 / ts
    K = np.column_stack(us + vs)
    X = M_inv_half @ K @ np.diag(np.concatenate([ts, ts]) ** -0.5)
    # flip (u, v) pairs together to keep X symplectic
    shapes = X[:n, :n].copy()
    for k in range(n):
        col = shapes[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.max(np.abs(col))))
        if lead.size and col[lead[0]] < 0:
            X[:, k] *= -1
            X[:, k + n] *= -1
    shapes = X[:n, :n]
    order = _mode_order(freqs, shapes)
    perm = np.concatenate([order, order + n])
    X = X[:, perm]
    freqs = freqs[order]
    S = np.linalg.inv(X)
    norms = np.linalg.norm(X[:n, :n], axis=0)
    return freqs, S, X[:n, :n] / norms


def normal_modes(H: QuadraticHamiltonian) -> NormalModeResult:
    """Symplectic normal form: ``S_nm^-T M S_nm^-1 = diag(w) (+) diag(w)``.

    Without position-momentum cross terms the transform is point-like
    (mass-weighted eigenmodes scaled by ``sqrt(w)``); otherwise a general
    Williamson decomposition is used.
    """
    M = H.M
    n = H.n_modes
    _require_positive(M)
    if np.max(np.abs(M[:n, n:])) <= 1e-14 * max(1.0, np.max(np.abs(M))):
        freqs, S, shapes = _mass_weighted_modes(M)
    else:
        freqs, S, shapes = _williamson_modes(M)
    return NormalModeResult(
        frequencies=_frozen(freqs),
        S_nm=SymplecticTransform(S, None, "native", "normal_modes"),
        modal_matrix=_frozen(shapes),
    )


def decoupled_form_residual(H: QuadraticHamiltonian, result: NormalModeResult) -> float:
    """Max deviation of the transformed matrix from ``diag(w) (+) diag(w)``."""
    M_nm = transform_hamiltonian(H, result.S_nm).M
    target = np.diag(np.concatenate([result.frequencies, result.frequencies]))
    return float(np.max(np.abs(M_nm - target)))
