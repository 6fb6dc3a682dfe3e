"""Configuration documents (TOML, ``schema = 1``).

Layout::

    schema = 1
    title = "optional free text"

    [system]            labels, masses
    [potential]         matrix (n x n), linear (2n, optional)
    [potential.trap]    frame (transform name, optional), modes, stiffness
    [transforms.NAME]   builder = "two_body" | "normal_modes" | "point" | "matrix"
                        position_map (point); matrix, displacement (matrix)
    [divisions.NAME]    parts = {PART = [mode, ...], ...}; transform (optional)
    [state]             kind = "ground" | "product"
                        product: transform, free_modes, width | width_ratio
    [noise]             modes, diffusion, damping, transform (optional)
    [moments]           transform, means, covariance
    [run]               tol, grid, horizon, dt, time, samples, division, candidates

Validation is strict: unknown keys are errors, and every problem found is
reported together with its key path.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .gaussian_state import GaussianState, ground_state, product_state
from .hamiltonian import QuadraticHamiltonian, build, normal_modes, transform_hamiltonian, trap
from .open_system import NoiseSpec
from .phase_space import (
    DivisionSpec,
    ModeSystem,
    SymplecticTransform,
    extend_point_transform,
    two_body_transform,
)

SCHEMA_VERSION = 1
BUILDERS = ("two_body", "normal_modes", "point", "matrix")

_TOP_KEYS = {"schema", "title", "system", "potential", "transforms", "divisions",
             "state", "noise", "moments", "run"}
_SECTION_KEYS = {
    "system": {"labels", "masses"},
    "potential": {"matrix", "linear", "trap"},
    "potential.trap": {"frame", "modes", "stiffness"},
    "transform": {"builder", "position_map", "matrix", "displacement"},
    "division": {"parts", "transform"},
    "state": {"kind", "transform", "free_modes", "width", "width_ratio"},
    "noise": {"modes", "diffusion", "damping", "transform"},
    "moments": {"transform", "means", "covariance"},
    "run": {"tol", "grid", "horizon", "dt", "time", "samples", "division", "candidates"},
}


@dataclass
class RunParams:
    tol: float = 1e-10
    grid: int = 512
    horizon: float = 10.0
    dt: float = 1e-3
    time: float = 1.0
    samples: int = 11
    division: str | None = None
    candidates: list[str] | None = None


@dataclass
class TransformEntry:
    name: str
    builder: str
    position_map: np.ndarray | None = None
    matrix: np.ndarray | None = None
    displacement: np.ndarray | None = None


@dataclass
class StateEntry:
    kind: str = "ground"
    transform: str | None = None
    free_modes: list[int] = field(default_factory=list)
    width: float | None = None
    width_ratio: float | None = None


@dataclass
class NoiseEntry:
    modes: list[int]
    diffusion: np.ndarray
    damping: float = 0.0
    transform: str | None = None


@dataclass
class MomentsEntry:
    transform: str
    means: np.ndarray
    covariance: np.ndarray


@dataclass
class TrapEntry:
    modes: list[int]
    stiffness: float
    frame: str | None = None


@dataclass
class ConfigDocument:
    path: str
    title: str
    system: ModeSystem
    potential: np.ndarray
    linear: np.ndarray | None
    trap: TrapEntry | None
    transforms: dict[str, TransformEntry]
    divisions: dict[str, DivisionSpec]
    state: StateEntry
    noise: NoiseEntry | None
    moments: MomentsEntry | None
    run: RunParams
    schema: int = SCHEMA_VERSION

    @property
    def n_modes(self) -> int:
        return self.system.n_modes

    # expansion into library objects

    def base_hamiltonian(self) -> QuadraticHamiltonian:
        H = build(self.system.masses, self.potential)
        if self.linear is not None:
            H = QuadraticHamiltonian(H.M, self.linear)
        return H

    def hamiltonian(self) -> QuadraticHamiltonian:
        H = self.base_hamiltonian()
        if self.trap is None:
            return H
        if self.trap.frame is None:
            return trap(H, self.trap.modes, self.trap.stiffness)
        S = self._expand(self.transforms[self.trap.frame], H)
        trapped = trap(transform_hamiltonian(H, S), self.trap.modes, self.trap.stiffness)
        return transform_hamiltonian(trapped, S.inverse())

    def _expand(self, entry: TransformEntry, H: QuadraticHamiltonian) -> SymplecticTransform:
        if entry.builder == "two_body":
            m1, m2 = self.system.masses
            S = two_body_transform(m1, m2, self.n_modes)
        elif entry.builder == "normal_modes":
            S = normal_modes(H).S_nm
        elif entry.builder == "point":
            S = extend_point_transform(entry.position_map)
        else:
            S = SymplecticTransform(entry.matrix, entry.displacement)
        return S.retarget(source="native", target=entry.name)

    def build_transforms(self, H: QuadraticHamiltonian | None = None) -> dict[str, SymplecticTransform]:
        """Expand every named transform. ``normal_modes`` uses the (trapped) Hamiltonian."""
        H = self.hamiltonian() if H is None else H
        base = self.base_hamiltonian()
        out = {}
        for name, entry in self.transforms.items():
            # a trap defined through a transform must not depend on itself
            src = base if (self.trap is not None and self.trap.frame == name) else H
            out[name] = self._expand(entry, src)
        return out

    def prepare_state(self, H=None, transforms=None) -> GaussianState:
        H = self.hamiltonian() if H is None else H
        if self.state.kind == "ground":
            return ground_state(H)
        transforms = self.build_transforms(H) if transforms is None else transforms
        S = transforms[self.state.transform]
        return product_state(H, S, self.state.free_modes,
                             width=self.state.width, width_ratio=self.state.width_ratio)

    def noise_spec(self, transforms=None) -> NoiseSpec:
        if self.noise is None:
            return NoiseSpec.none()
        frame = None
        if self.noise.transform is not None:
            transforms = self.build_transforms() if transforms is None else transforms
            frame = transforms[self.noise.transform]
        return NoiseSpec(tuple(self.noise.modes), self.noise.diffusion,
                         self.noise.damping, frame)


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def err(self, where: str, msg: str) -> None:
        self.errors.append(f"{where}: {msg}")

    def table(self, value, where) -> dict | None:
        if not isinstance(value, dict):
            self.err(where, f"expected a table, got {type(value).__name__}")
            return None
        return value

    def keys(self, table: dict, allowed: set, where: str) -> None:
        for key in sorted(set(table) - allowed):
            self.err(f"{where}.{key}" if where else key, "unknown key")

    def number(self, value, where, positive=False, nonneg=False) -> float | None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.err(where, f"expected a number, got {value!r}")
            return None
        value = float(value)
        if positive and not value > 0:
            self.err(where, f"must be positive, got {value}")
            return None
        if nonneg and value < 0:
            self.err(where, f"must be nonnegative, got {value}")
            return None
        return value

    def integer(self, value, where, positive=False) -> int | None:
        if isinstance(value, bool) or not isinstance(value, int):
            self.err(where, f"expected an integer, got {value!r}")
            return None
        if positive and value <= 0:
            self.err(where, f"must be positive, got {value}")
            return None
        return value

    def string(self, value, where) -> str | None:
        if not isinstance(value, str):
            self.err(where, f"expected a string, got {value!r}")
            return None
        return value

    def array(self, value, where, shape) -> np.ndarray | None:
        try:
            arr = np.array(value, dtype=float)
        except (TypeError, ValueError):
            self.err(where, "expected a numeric array")
            return None
        if arr.shape != shape:
            self.err(where, f"expected shape {shape}, got {arr.shape}")
            return None
        return arr

    def modes(self, value, where, n) -> list[int] | None:
        if not isinstance(value, list) or not all(
                isinstance(i, int) and not isinstance(i, bool) for i in value):
            self.err(where, f"expected a list of mode indices, got {value!r}")
            return None
        bad = [i for i in value if not 0 <= i < n]
        if bad:
            self.err(where, f"mode indices {bad} outside 0..{n - 1}")
            return None
        if len(set(value)) != len(value):
            self.err(where, "repeated mode index")
            return None
        return list(value)

    def ref(self, value, where, names, kind) -> str | None:
        name = self.string(value, where)
        if name is not None and name not in names:
            self.err(where, f"unknown {kind} {name!r} (defined: {sorted(names)})")
            return None
        return name


def parse_text(text: str, path: str = "<string>") -> ConfigDocument:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        where = f"line {line}" if line else "parse"
        raise ConfigError([f"{where}: {getattr(exc, 'msg', str(exc))}"], path) from None
    return _validate(raw, path)


def parse(path) -> ConfigDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read file: {exc.strerror}"], str(path)) from None
    return parse_text(text, str(path))


def _validate(raw: dict, path: str) -> ConfigDocument:
    c = _Checker()
    c.keys(raw, _TOP_KEYS, "")

    schema = raw.get("schema")
    if schema is None:
        c.err("schema", "missing (expected schema = 1)")
    elif schema != SCHEMA_VERSION:
        c.err("schema", f"unsupported version {schema!r} (this build reads {SCHEMA_VERSION})")
    title = raw.get("title", "")
    if not isinstance(title, str):
        c.err("title", "expected a string")
        title = ""

    # system
    system = None
    sys_raw = c.table(raw.get("system"), "system") if "system" in raw else None
    if "system" not in raw:
        c.err("system", "missing section")
    if sys_raw is not None:
        c.keys(sys_raw, _SECTION_KEYS["system"], "system")
        masses = sys_raw.get("masses")
        if not isinstance(masses, list) or not masses:
            c.err("system.masses", "expected a nonempty list of masses")
        else:
            ms = [c.number(m, f"system.masses[{i}]", positive=True) for i, m in enumerate(masses)]
            labels = sys_raw.get("labels", [f"x{i + 1}" for i in range(len(masses))])
            if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
                c.err("system.labels", "expected a list of strings")
            elif len(labels) != len(masses):
                c.err("system.labels", f"{len(labels)} labels for {len(masses)} masses")
            elif len(set(labels)) != len(labels):
                c.err("system.labels", "labels must be unique")
            elif None not in ms:
                system = ModeSystem(tuple(labels), tuple(ms))
    n = system.n_modes if system else None

    # potential
    potential = linear = None
    trap_entry = None
    pot_raw = c.table(raw.get("potential"), "potential") if "potential" in raw else None
    if "potential" not in raw:
        c.err("potential", "missing section")
    transforms_raw = raw.get("transforms", {})
    transform_names = set(transforms_raw) if isinstance(transforms_raw, dict) else set()
    if pot_raw is not None:
        c.keys(pot_raw, _SECTION_KEYS["potential"], "potential")
        if "matrix" not in pot_raw:
            c.err("potential.matrix", "missing")
        elif n is not None:
            potential = c.array(pot_raw["matrix"], "potential.matrix", (n, n))
            if potential is not None and np.max(np.abs(potential - potential.T)) > 1e-12:
                c.err("potential.matrix", "must be symmetric")
                potential = None
        if "linear" in pot_raw and n is not None:
            linear = c.array(pot_raw["linear"], "potential.linear", (2 * n,))
        if "trap" in pot_raw:
            tr = c.table(pot_raw["trap"], "potential.trap")
            if tr is not None:
                c.keys(tr, _SECTION_KEYS["potential.trap"], "potential.trap")
                frame = None
                if "frame" in tr:
                    frame = c.ref(tr["frame"], "potential.trap.frame", transform_names, "transform")
                modes = c.modes(tr.get("modes"), "potential.trap.modes", n) if n else None
                stiff = c.number(tr.get("stiffness"), "potential.trap.stiffness", positive=True)
                if modes is not None and stiff is not None:
                    trap_entry = TrapEntry(modes, stiff, frame)

    # transforms
    transforms: dict[str, TransformEntry] = {}
    if c.table(transforms_raw, "transforms") is not None:
        for name, t_raw in transforms_raw.items():
            where = f"transforms.{name}"
            t_raw = c.table(t_raw, where)
            if t_raw is None:
                continue
            c.keys(t_raw, _SECTION_KEYS["transform"], where)
            builder = c.string(t_raw.get("builder"), f"{where}.builder")
            if builder is None:
                continue
            if builder not in BUILDERS:
                c.err(f"{where}.builder", f"unknown builder {builder!r} (one of {BUILDERS})")
                continue
            entry = TransformEntry(name, builder)
            if builder == "two_body" and n is not None and n != 2:
                c.err(f"{where}.builder", f"two_body needs exactly 2 modes, system has {n}")
            if builder == "point":
                if "position_map" not in t_raw:
                    c.err(f"{where}.position_map", "required for builder 'point'")
                elif n is not None:
                    entry.position_map = c.array(t_raw["position_map"], f"{where}.position_map", (n, n))
            if builder == "matrix":
                if "matrix" not in t_raw:
                    c.err(f"{where}.matrix", "required for builder 'matrix'")
                elif n is not None:
                    entry.matrix = c.array(t_raw["matrix"], f"{where}.matrix", (2 * n, 2 * n))
                if "displacement" in t_raw and n is not None:
                    entry.displacement = c.array(t_raw["displacement"], f"{where}.displacement", (2 * n,))
            for key in ("position_map", "matrix", "displacement"):
                if key in t_raw and not (
                        (key == "position_map" and builder == "point")
                        or (key in ("matrix", "displacement") and builder == "matrix")):
                    c.err(f"{where}.{key}", f"not used by builder {builder!r}")
            transforms[name] = entry

    # divisions
    divisions: dict[str, DivisionSpec] = {}
    div_raw = raw.get("divisions", {})
    if "divisions" not in raw:
        c.err("divisions", "missing section (at least one division)")
    elif c.table(div_raw, "divisions") is not None:
        for name, d_raw in div_raw.items():
            where = f"divisions.{name}"
            d_raw = c.table(d_raw, where)
            if d_raw is None:
                continue
            c.keys(d_raw, _SECTION_KEYS["division"], where)
            frame = None
            if "transform" in d_raw:
                frame = c.ref(d_raw["transform"], f"{where}.transform", transform_names, "transform")
                if frame is None:
                    continue
            parts_raw = c.table(d_raw.get("parts"), f"{where}.parts")
            if parts_raw is None or n is None:
                continue
            parts = {}
            for part, modes in parts_raw.items():
                m = c.modes(modes, f"{where}.parts.{part}", n)
                if m is not None:
                    parts[part] = m
            if len(parts) != len(parts_raw):
                continue
            spec = DivisionSpec(name, parts, frame)
            try:
                spec.halves(n)
            except ValueError as exc:
                c.err(f"{where}.parts", str(exc))
                continue
            divisions[name] = spec

    # state
    state = StateEntry()
    if "state" in raw:
        st = c.table(raw["state"], "state")
        if st is not None:
            c.keys(st, _SECTION_KEYS["state"], "state")
            kind = st.get("kind", "ground")
            if kind not in ("ground", "product"):
                c.err("state.kind", f"expected 'ground' or 'product', got {kind!r}")
            state.kind = kind
            if kind == "product":
                if "transform" not in st:
                    c.err("state.transform", "required when kind = 'product'")
                else:
                    state.transform = c.ref(st["transform"], "state.transform",
                                            transform_names, "transform")
                if n is not None:
                    fm = c.modes(st.get("free_modes", []), "state.free_modes", n)
                    state.free_modes = fm or []
                if "width" in st and "width_ratio" in st:
                    c.err("state", "give either width or width_ratio, not both")
                if "width" in st:
                    state.width = c.number(st["width"], "state.width", positive=True)
                if "width_ratio" in st:
                    state.width_ratio = c.number(st["width_ratio"], "state.width_ratio", positive=True)
            else:
                for key in ("transform", "free_modes", "width", "width_ratio"):
                    if key in st:
                        c.err(f"state.{key}", "only used when kind = 'product'")

    # noise
    noise = None
    if "noise" in raw:
        nz = c.table(raw["noise"], "noise")
        if nz is not None and n is not None:
            c.keys(nz, _SECTION_KEYS["noise"], "noise")
            modes = c.modes(nz.get("modes"), "noise.modes", n)
            frame = None
            if "transform" in nz:
                frame = c.ref(nz["transform"], "noise.transform", transform_names, "transform")
            damping = c.number(nz.get("damping", 0.0), "noise.damping", nonneg=True)
            if modes is not None:
                if modes != sorted(modes):
                    c.err("noise.modes", "list modes in increasing order (diffusion rows follow it)")
                k = 2 * len(modes)
                D = c.array(nz.get("diffusion"), "noise.diffusion", (k, k))
                if D is not None:
                    if np.max(np.abs(D - D.T), initial=0.0) > 1e-12:
                        c.err("noise.diffusion", "must be symmetric")
                    elif k and np.min(np.linalg.eigvalsh(D)) < -1e-12:
                        c.err("noise.diffusion", "must be positive semidefinite")
                    elif damping is not None:
                        noise = NoiseEntry(modes, D, damping, frame)

    # moments
    moments = None
    if "moments" in raw:
        mo = c.table(raw["moments"], "moments")
        if mo is not None and n is not None:
            c.keys(mo, _SECTION_KEYS["moments"], "moments")
            frame = c.ref(mo.get("transform"), "moments.transform", transform_names, "transform")
            means = mo.get("means")
            k = len(means) if isinstance(means, list) else None
            if k not in (n, 2 * n):
                c.err("moments.means", f"expected {n} (positions) or {2 * n} (phase space) values")
            else:
                mv = c.array(means, "moments.means", (k,))
                cv = c.array(mo.get("covariance", np.zeros((k, k)).tolist()),
                             "moments.covariance", (k, k))
                if frame is not None and mv is not None and cv is not None:
                    moments = MomentsEntry(frame, mv, cv)

    # run
    run = RunParams()
    if "run" in raw:
        rr = c.table(raw["run"], "run")
        if rr is not None:
            c.keys(rr, _SECTION_KEYS["run"], "run")
            for key in ("tol", "horizon", "dt", "time"):
                if key in rr:
                    v = c.number(rr[key], f"run.{key}", positive=(key != "time"), nonneg=True)
                    if v is not None:
                        setattr(run, key, v)
            for key in ("grid", "samples"):
                if key in rr:
                    v = c.integer(rr[key], f"run.{key}", positive=True)
                    if v is not None:
                        setattr(run, key, v)
            if "grid" in rr and isinstance(rr["grid"], int) and 0 < rr["grid"] < 16:
                c.err("run.grid", "need at least 16 grid points")
            if "division" in rr:
                run.division = c.ref(rr["division"], "run.division", set(div_raw), "division")
            if "candidates" in rr:
                cand = rr["candidates"]
                if not isinstance(cand, list) or not cand:
                    c.err("run.candidates", "expected a nonempty list of division names")
                else:
                    refs = [c.ref(x, f"run.candidates[{i}]", set(div_raw), "division")
                            for i, x in enumerate(cand)]
                    if None not in refs:
                        run.candidates = refs

    if c.errors:
        raise ConfigError(c.errors, path)
    return ConfigDocument(
        path=path, title=title, system=system, potential=potential, linear=linear,
        trap=trap_entry, transforms=transforms, divisions=divisions, state=state,
        noise=noise, moments=moments, run=run)
