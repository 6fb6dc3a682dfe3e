"""Phase-space conventions, linear canonical transformations and divisions.

Vectors are ordered ``z = (x_1, ..., x_n, p_1, ..., p_n)`` throughout, with
hbar = 1. A division of the composite system is a :class:`DivisionSpec`
living in the coordinates produced by some :class:`SymplecticTransform`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import PhysicsError

CANONICITY_TOL = 1e-10
POINT_LIKE_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def symplectic_form(n: int) -> np.ndarray:
    """Return ``J = [[0, I], [-I, 0]]`` for ``n`` modes (read-only, cached)."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    J.setflags(write=False)
    return J


def mode_indices(modes: Sequence[int], n: int) -> np.ndarray:
    """Phase-space row indices (positions then momenta) of the given modes."""
    modes = np.asarray(sorted(modes), dtype=int)
    return np.concatenate([modes, modes + n])


@dataclass(frozen=True)
class ModeSystem:
    labels: tuple[str, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        masses = tuple(float(m) for m in self.masses)
        if not labels:
            raise ValueError("a mode system needs at least one mode")
        if len(labels) != len(masses):
            raise ValueError(
                f"{len(labels)} labels but {len(masses)} masses")
        if len(set(labels)) != len(labels):
            raise ValueError(f"mode labels must be unique, got {labels}")
        if any(not m > 0 for m in masses):
            raise PhysicsError(f"masses must be strictly positive, got {masses}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "masses", masses)

    @property
    def n_modes(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class DivisionSpec:
    """Named assignment of modes to subsystems.

    ``frame`` names the transform whose output coordinates the mode indices
    refer to; ``None`` means the native coordinates.
    """

    name: str
    parts: Mapping[str, frozenset]
    frame: str | None = None

    def __post_init__(self):
        parts = {str(k): frozenset(int(i) for i in v) for k, v in dict(self.parts).items()}
        object.__setattr__(self, "parts", parts)

    @classmethod
    def bipartition(cls, name, first, second, labels=("A", "B"), frame=None):
        return cls(name, {labels[0]: first, labels[1]: second}, frame)

    def check(self, n_modes: int) -> None:
        seen: set[int] = set()
        for part, modes in self.parts.items():
            if not modes:
                raise ValueError(f"division {self.name!r}: part {part!r} is empty")
            bad = [i for i in modes if not 0 <= i < n_modes]
            if bad:
                raise ValueError(
                    f"division {self.name!r}: part {part!r} has mode indices "
                    f"{sorted(bad)} outside 0..{n_modes - 1}")
            overlap = seen & modes
            if overlap:
                raise ValueError(
                    f"division {self.name!r}: modes {sorted(overlap)} assigned twice")
            seen |= modes
        missing = set(range(n_modes)) - seen
        if missing:
            raise ValueError(
                f"division {self.name!r} does not cover modes {sorted(missing)}")

    def halves(self, n_modes: int) -> tuple[tuple[str, frozenset], tuple[str, frozenset]]:
        """Validate as a bipartition and return its two ``(name, modes)`` parts."""
        self.check(n_modes)
        if len(self.parts) != 2:
            raise ValueError(
                f"division {self.name!r} has {len(self.parts)} parts; "
                "a bipartition needs exactly two")
        a, b = self.parts.items()
        return a, b


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    """Affine phase-space map ``zeta = S z + d``.

    Canonicity is not enforced here so that candidate matrices can be
    inspected; everything that moves states or Hamiltonians checks it.
    """

    S: np.ndarray
    d: np.ndarray | None = None
    source_division: str = "native"
    target_division: str = "transformed"

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
            raise ValueError(
                f"transform matrix must be square with even size, got shape {S.shape}")
        d = np.zeros(S.shape[0]) if self.d is None else np.asarray(self.d, dtype=float)
        if d.shape != (S.shape[0],):
            raise ValueError(
                f"displacement has shape {d.shape}, expected ({S.shape[0]},)")
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_modes(self) -> int:
        return self.S.shape[0] // 2

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def residual(self) -> float:
        J = symplectic_form(self.n_modes)
        return float(np.max(np.abs(self.S @ J @ self.S.T - J)))

    def is_symplectic(self, tol: float = CANONICITY_TOL) -> bool:
        return self.residual() <= tol

    def require_symplectic(self, tol: float = CANONICITY_TOL) -> "SymplecticTransform":
        res = self.residual()
        if res > tol:
            raise PhysicsError(
                f"transform {self.source_division!r} -> {self.target_division!r} "
                f"is not canonical: max|S J S^T - J| = {res:.3e} > {tol:.1e}")
        return self

    @property
    def S_inv(self) -> np.ndarray:
        return np.linalg.inv(self.S)

    def inverse(self) -> "SymplecticTransform":
        S_inv = self.S_inv
        return SymplecticTransform(S_inv, -S_inv @ self.d,
                                   self.target_division, self.source_division)

    def then(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """Apply ``self`` first, then ``other``."""
        if other.dim != self.dim:
            raise ValueError(f"cannot compose {self.dim}- and {other.dim}-dimensional maps")
        return SymplecticTransform(other.S @ self.S, other.S @ self.d + other.d,
                                   self.source_division, other.target_division)

    def retarget(self, source=None, target=None) -> "SymplecticTransform":
        return SymplecticTransform(
            self.S, self.d,
            self.source_division if source is None else source,
            self.target_division if target is None else target)

    @property
    def position_block(self) -> np.ndarray:
        n = self.n_modes
        return self.S[:n, :n]

    @classmethod
    def identity(cls, n: int, source="native", target="native") -> "SymplecticTransform":
        return cls(np.eye(2 * n), None, source, target)


def _as_matrix(S) -> np.ndarray:
    if isinstance(S, SymplecticTransform):
        return S.S
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    return S


def validate_symplectic(S, tol: float = CANONICITY_TOL, n_modes: int | None = None) -> bool:
    """True iff ``max|S J S^T - J| <= tol``.

    ``S`` may be a :class:`SymplecticTransform` or a plain array; passing
    ``n_modes`` additionally checks the dimension against a mode system.
    """
    S = _as_matrix(S)
    if S.shape[0] % 2:
        raise ValueError(f"phase-space matrices have even size, got {S.shape[0]}")
    n = S.shape[0] // 2
    if n_modes is not None and n != n_modes:
        raise ValueError(
            f"transform acts on {n} modes but the system has {n_modes}")
    J = symplectic_form(n)
    return bool(np.max(np.abs(S @ J @ S.T - J)) <= tol)


def extend_point_transform(position_map, source="native", target="transformed") -> SymplecticTransform:
    """Complete a configuration-space map ``x' = T x`` to a canonical one.

    Momenta transform with ``T^{-T}`` so that ``p' . dx'`` is preserved.
    """
    T = np.asarray(position_map, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"position map must be square, got shape {T.shape}")
    if np.linalg.matrix_rank(T) < T.shape[0]:
        raise PhysicsError("position map is singular; no canonical completion exists")
    n = T.shape[0]
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = T
    S[n:, n:] = np.linalg.inv(T).T
    return SymplecticTransform(S, None, source, target)


def two_body_transform(m1: float, m2: float, n_modes: int = 2,
                       source="native", target="cm_rel") -> SymplecticTransform:
    """Centre-of-mass / relative coordinates for two particles on a line.

    New mode 0 is ``X = (m1 x1 + m2 x2)/(m1 + m2)``, new mode 1 is
    ``r = x1 - x2``. Conjugate momenta are ``P = p1 + p2`` and
    ``p_r = (m2 p1 - m1 p2)/(m1 + m2)``.
    """
    if n_modes != 2:
        raise ValueError(
            f"the two-body transform acts on exactly 2 modes, system has {n_modes}")
    if not (m1 > 0 and m2 > 0):
        raise PhysicsError(f"masses must be positive, got {m1}, {m2}")
    total = m1 + m2
    T = np.array([[m1 / total, m2 / total], [1.0, -1.0]])
    return extend_point_transform(T, source, target)


def classify_division(S, tol: float = POINT_LIKE_TOL) -> str:
    """``"point_like"`` if new positions ignore old momenta, else ``"complementary"``."""
    M = _as_matrix(S)
    n = M.shape[0] // 2
    if isinstance(S, SymplecticTransform):
        S.require_symplectic()
    elif not validate_symplectic(M):
        raise PhysicsError("classify_division needs a canonical transform")
    return "point_like" if np.max(np.abs(M[:n, n:]), initial=0.0) <= tol else "complementary"


def _moment_shapes(means, covars, n):
    means = np.asarray(means, dtype=float)
    covars = np.asarray(covars, dtype=float)
    if means.shape not in ((n,), (2 * n,)):
        raise ValueError(f"means must have length {n} or {2 * n}, got {means.shape}")
    k = means.shape[0]
    if covars.shape != (k, k):
        raise ValueError(f"covariance must be {k}x{k} to match the means, got {covars.shape}")
    if np.max(np.abs(covars - covars.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(covars))):
        raise ValueError("covariance matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(covars)) < -1e-12 * max(1.0, np.max(np.abs(covars))):
        raise PhysicsError("covariance matrix is not positive semidefinite")
    return means, covars, k


def _point_like_or_refuse(S: SymplecticTransform) -> None:
    if classify_division(S) != "point_like":
        raise PhysicsError(
            "refusing moment inversion through a complementary division: the "
            "transform mixes positions with momenta, which lack simultaneous "
            "sharp values, so configuration values cannot be recovered")


def forward_moments(means, covars, S: SymplecticTransform):
    """Push first and second moments through a point-like transform.

    Accepts either position-sector moments (length ``n``) or full
    phase-space moments (length ``2n``).
    """
    _point_like_or_refuse(S)
    n = S.n_modes
    means, covars, k = _moment_shapes(means, covars, n)
    A = S.S[:k, :k]
    return A @ means + S.d[:k], A @ covars @ A.T


def invert_moments(means, covars, S: SymplecticTransform):
    """Recover original-coordinate means and covariances from transformed ones.

    Linear propagation: ``means' = S^-1 (means - d)``,
    ``covars' = S^-1 covars S^-T``. Only point-like transforms qualify;
    for those the position block inverts on its own.
    """
    _point_like_or_refuse(S)
    n = S.n_modes
    means, covars, k = _moment_shapes(means, covars, n)
    # S is block lower-triangular, so the leading k x k block of S^-1 is the
    # inverse of the leading block of S.
    A = S.S[:k, :k]
    new_means = np.linalg.solve(A, means - S.d[:k])
    A_inv = np.linalg.inv(A)
    new_covars = A_inv @ covars @ A_inv.T
    return new_means, 0.5 * (new_covars + new_covars.T)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random symplectic matrix ``expm(J H)`` with ``H`` a random symmetric generator."""
    G = rng.normal(scale=scale, size=(2 * n, 2 * n))
    H = 0.5 * (G + G.T)
    return expm(symplectic_form(n) @ H)


def local_symplectic(blocks: Mapping[frozenset, np.ndarray], n: int) -> np.ndarray:
    """Embed per-part symplectic matrices into a division-respecting global one."""
    S = np.zeros((2 * n, 2 * n))
    for modes, block in blocks.items():
        idx = mode_indices(modes, n)
        S[np.ix_(idx, idx)] = block
    return S


def symplectic_eigenvalues(matrix) -> np.ndarray:
    """Magnitudes of the eigenvalues of ``iJ matrix``, one per mode, descending.

    Uses the Hermitian form ``L^T (iJ) L`` when the matrix is positive
    definite (``matrix = L L^T``) and falls back to a general eigensolve.
    """
    A = np.asarray(matrix, dtype=float)
    n = A.shape[0] // 2
    J = symplectic_form(n)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        vals = np.sort(np.abs(np.linalg.eigvals(1j * J @ A)))[::-1]
        return vals[::2].copy()
    vals = np.linalg.eigvalsh(L.T @ (1j * J) @ L)
    return vals[n:][::-1].copy()
