"""Command implementations behind the CLI. Each returns a :class:`Report`."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import entanglement, gaussian_state, oracle
from .config import ConfigDocument
from .entanglement import compare_divisions, entanglement_report, state_in_frame
from .errors import ConfigError, PhysicsError
from .gaussian_state import apply_transform, ground_state
from .hamiltonian import decoupled_form_residual, normal_modes, partition_blocks, transform_hamiltonian
from .open_system import decoherence_time, shielded_division_search, trajectory
from .phase_space import classify_division, forward_moments, invert_moments
from .report import Report

COMMANDS = ("validate", "partition", "normal-modes", "ground-state", "entangle", "compare",
            "invert-means", "evolve", "shield-search", "oracle-check")

ORACLE_TOL = 1e-3
ROUND_TRIP_TOL = 1e-12


def _new_report(command: str, doc: ConfigDocument) -> Report:
    r = doc.run
    rep = Report(command=command, config=doc.path)
    rep.tolerances = {
        "canonicity": r.tol,
        "point_like_block": 1e-12,
        "state_validity": gaussian_state.VALIDITY_TOL,
        "ppt_separability": entanglement.PPT_TOL,
        "entropy_purity": entanglement.ENTROPY_PURITY_TOL,
        "oracle_agreement": ORACLE_TOL,
        "grid_points": r.grid,
        "horizon": r.horizon,
        "dt": r.dt,
    }
    return rep


def _frame_transform(doc, transforms, div):
    return None if div.frame is None else transforms[div.frame]


def cmd_validate(doc: ConfigDocument, rep: Report) -> None:
    H = doc.hamiltonian()
    rep.add("system", "hamiltonian", "modes", doc.n_modes, "config.parse")
    rep.add("system", "hamiltonian", "positive_definite", H.is_positive_definite(),
            "hamiltonian.QuadraticHamiltonian")
    rep.add("system", "hamiltonian", "divisions", len(doc.divisions), "config.parse")
    transforms = doc.build_transforms(H)
    for name, S in transforms.items():
        src = "phase_space.validate_symplectic"
        residual = S.residual()
        ok = residual <= doc.run.tol
        rep.add("transforms", name, "builder", doc.transforms[name].builder, "config.parse")
        rep.add("transforms", name, "residual", residual, src)
        rep.add("transforms", name, "canonical", ok, src)
        if ok:
            rep.add("transforms", name, "class", classify_division(S), "phase_space.classify_division")
        else:
            rep.fail(f"transform {name!r} is not canonical (residual {residual:.3e} > {doc.run.tol:g})", 3)


def cmd_partition(doc: ConfigDocument, rep: Report) -> None:
    H = doc.hamiltonian()
    transforms = doc.build_transforms(H)
    spectrum = H.spectrum()
    for name, div in doc.divisions.items():
        S = _frame_transform(doc, transforms, div)
        H_div = H if S is None else transform_hamiltonian(H, S)
        blocks = partition_blocks(H_div, div)
        rep.add("divisions", name, "frame", div.frame or "native", "config.parse")
        rep.add("divisions", name, "parts", "|".join(blocks.parts), "config.parse")
        rep.add("divisions", name, "coupling_norm", blocks.coupling_norm, "hamiltonian.partition_blocks")
        rep.add("divisions", name, "interacting", blocks.coupling_norm > doc.run.tol,
                "hamiltonian.partition_blocks")
        rep.add("divisions", name, "spectrum_drift",
                float(np.max(np.abs(H_div.spectrum() - spectrum))), "hamiltonian.transform_hamiltonian")
        rep.add("divisions", name, "H_E", blocks.H_E, "hamiltonian.partition_blocks")
        rep.add("divisions", name, "H_F", blocks.H_F, "hamiltonian.partition_blocks")
        rep.add("divisions", name, "H_EF", blocks.H_EF, "hamiltonian.partition_blocks")


def cmd_normal_modes(doc: ConfigDocument, rep: Report) -> None:
    H = doc.hamiltonian()
    nm = normal_modes(H)
    src = "hamiltonian.normal_modes"
    for k, w in enumerate(nm.frequencies):
        rep.add("modes", f"Q{k + 1}", "frequency", w, src)
        rep.add("modes", f"Q{k + 1}", "shape", nm.modal_matrix[:, k], src)
    rep.add("transform", "normal_modes", "residual_diag_form", decoupled_form_residual(H, nm), src)
    rep.add("transform", "normal_modes", "canonicity_residual", nm.S_nm.residual(),
            "phase_space.validate_symplectic")
    rep.add("transform", "normal_modes", "class", classify_division(nm.S_nm),
            "phase_space.classify_division")
    rep.add("transform", "normal_modes", "S", nm.S_nm.S, src)


def cmd_ground_state(doc: ConfigDocument, rep: Report) -> None:
    H = doc.hamiltonian()
    g = ground_state(H)
    A = H.drift
    residual = float(np.max(np.abs(A @ g.sigma + g.sigma @ A.T)))
    src = "gaussian_state.ground_state"
    rep.add("state", "ground", "purity", g.purity(), "gaussian_state.GaussianState.purity")
    rep.add("state", "ground", "stationarity_residual", residual, src)
    rep.add("state", "ground", "symplectic_spectrum", g.spectrum(), "gaussian_state.symplectic_spectrum")
    rep.add("state", "ground", "mean", g.mean, src)
    rep.add("state", "ground", "sigma", g.sigma, src)


def _state(doc):
    H = doc.hamiltonian()
    transforms = doc.build_transforms(H)
    return H, transforms, doc.prepare_state(H, transforms)


def _describe_state(doc, rep, state):
    src = "config.prepare_state"
    rep.add("state", doc.state.kind, "pure", state.is_pure(), "gaussian_state.GaussianState.is_pure")
    rep.add("state", doc.state.kind, "min_symplectic_eigenvalue", float(np.min(state.spectrum())),
            "gaussian_state.symplectic_spectrum")
    if doc.state.kind == "product":
        rep.add("state", doc.state.kind, "frame", doc.state.transform, src)


def cmd_entangle(doc: ConfigDocument, rep: Report) -> None:
    H, transforms, state = _state(doc)
    _describe_state(doc, rep, state)
    reports = compare_divisions(state, list(doc.divisions.values()), transforms)
    for r in reports:
        src = "entanglement.entanglement_report"
        rep.add("divisions", r.division, "parts", "|".join(r.parts), "config.parse")
        rep.add("divisions", r.division, "log_negativity", r.log_negativity, "entanglement.log_negativity")
        rep.add("divisions", r.division, "entropy", r.entropy_of_entanglement,
                "entanglement.entanglement_entropy")
        rep.add("divisions", r.division, "min_ppt_nu", r.min_ppt_symplectic_eigenvalue, src)
        rep.add("divisions", r.division, "verdict", r.verdict, src)
        rep.add("divisions", r.division, "ppt_spectrum", list(r.ppt_spectrum), src)
        for part, spec in r.reduced_spectra.items():
            rep.add("divisions", r.division, f"reduced_spectrum[{part}]", list(spec),
                    "gaussian_state.reduce")


def cmd_compare(doc: ConfigDocument, rep: Report) -> None:
    H, transforms, state = _state(doc)
    _describe_state(doc, rep, state)
    reports = compare_divisions(state, list(doc.divisions.values()), transforms)
    for r in reports:
        frame = doc.divisions[r.division].frame or "native"
        rep.add("divisions", r.division, "frame", frame, "config.parse")
        rep.add("divisions", r.division, "log_negativity", r.log_negativity, "entanglement.log_negativity")
        rep.add("divisions", r.division, "entropy", r.entropy_of_entanglement,
                "entanglement.entanglement_entropy")
        rep.add("divisions", r.division, "verdict", r.verdict, "entanglement.compare_divisions")
    verdicts = {r.verdict for r in reports}
    rep.add("summary", "state", "division_dependent",
            "separable" in verdicts and "entangled" in verdicts, "entanglement.compare_divisions")


def cmd_invert_means(doc: ConfigDocument, rep: Report) -> None:
    if doc.moments is None:
        raise ConfigError(["moments: section required by invert-means"], doc.path)
    transforms = doc.build_transforms()
    S = transforms[doc.moments.transform]
    means, covars = invert_moments(doc.moments.means, doc.moments.covariance, S)
    back_m, back_c = forward_moments(means, covars, S)
    residual = max(float(np.max(np.abs(back_m - doc.moments.means))),
                   float(np.max(np.abs(back_c - doc.moments.covariance))))
    labels = list(doc.system.labels)
    if len(means) == 2 * doc.n_modes:
        labels = [f"x_{l}" for l in labels] + [f"p_{l}" for l in labels]
    src = "phase_space.invert_moments"
    for label, m, v in zip(labels, means, np.diag(covars)):
        rep.add("moments", label, "mean", m, src)
        rep.add("moments", label, "std", float(np.sqrt(max(v, 0.0))), src)
    rep.add("moments", "all", "covariance", covars, src)
    rep.add("check", doc.moments.transform, "round_trip_residual", residual, "phase_space.forward_moments")
    if residual > ROUND_TRIP_TOL * max(1.0, float(np.max(np.abs(doc.moments.covariance)))):
        rep.fail(f"moment round trip residual {residual:.3e} exceeds {ROUND_TRIP_TOL:g}", 4)


def cmd_evolve(doc: ConfigDocument, rep: Report) -> None:
    H, transforms, state = _state(doc)
    noise = doc.noise_spec(transforms)
    run = doc.run
    times = np.linspace(0.0, run.time, run.samples)
    states = trajectory(state, H, noise, times, dt=run.dt)
    src = "open_system.evolve"
    for t, s in zip(times, states):
        item = f"t={t:.6g}"
        rep.add("trajectory", item, "time", float(t), src)
        rep.add("trajectory", item, "purity", s.purity(), "gaussian_state.GaussianState.purity")
        rep.add("trajectory", item, "min_nu", float(np.min(s.spectrum())), "gaussian_state.symplectic_spectrum")
        for name, div in doc.divisions.items():
            rep.add("trajectory", item, f"E_N[{name}]",
                    entanglement.log_negativity(state_in_frame(s, div, transforms), div),
                    "entanglement.log_negativity")
    targets = [run.division] if run.division else list(doc.divisions)
    for name in targets:
        div = doc.divisions[name]
        frame = _frame_transform(doc, transforms, div)
        try:
            tau = decoherence_time(state, H, noise, div, frame, horizon=run.horizon, dt=run.dt)
        except PhysicsError as exc:
            rep.messages.append(f"{name}: {exc}")
            continue
        rep.add("decoherence", name, "time", tau, "open_system.decoherence_time")


def cmd_shield_search(doc: ConfigDocument, rep: Report) -> None:
    H, transforms, state = _state(doc)
    noise = doc.noise_spec(transforms)
    names = doc.run.candidates or list(doc.divisions)
    candidates = [(n, _frame_transform(doc, transforms, doc.divisions[n]), doc.divisions[n])
                  for n in names]
    ranking = shielded_division_search(state, H, noise, candidates, step=doc.run.dt)
    src = "open_system.shielded_division_search"
    for k, r in enumerate(ranking, 1):
        rep.add("ranking", r.name, "rank", k, src)
        rep.add("ranking", r.name, "degradation_rate", r.degradation_rate, src)
        rep.add("ranking", r.name, "initial_log_negativity", r.initial_log_negativity,
                "entanglement.log_negativity")


def cmd_oracle_check(doc: ConfigDocument, rep: Report) -> None:
    H, transforms, state = _state(doc)
    if state.n_modes != 2:
        raise PhysicsError("oracle-check handles two-mode systems only")
    if not state.is_pure(1e-8):
        raise PhysicsError("oracle-check needs a pure state")
    for name, div in doc.divisions.items():
        S = _frame_transform(doc, transforms, div)
        local = state if S is None else apply_transform(state, S)
        g = entanglement_report(local, div)
        psi = oracle.synthesize(local, N=doc.run.grid)
        s_or, e_or = oracle.oracle_measures(oracle.schmidt_spectrum(psi))
        ds = abs(g.entropy_of_entanglement - s_or)
        de = abs(g.log_negativity - e_or)
        ok = ds < ORACLE_TOL and de < ORACLE_TOL
        rep.add("oracle", name, "S_gauss", g.entropy_of_entanglement, "entanglement.entanglement_entropy")
        rep.add("oracle", name, "S_oracle", s_or, "oracle.oracle_measures")
        rep.add("oracle", name, "dS", ds, "oracle.oracle_measures")
        rep.add("oracle", name, "E_N_gauss", g.log_negativity, "entanglement.log_negativity")
        rep.add("oracle", name, "E_N_oracle", e_or, "oracle.oracle_measures")
        rep.add("oracle", name, "dE_N", de, "oracle.oracle_measures")
        rep.add("oracle", name, "agree", ok, "oracle.schmidt_spectrum")
        if not ok:
            rep.fail(f"division {name!r}: Gaussian and grid oracle disagree beyond {ORACLE_TOL:g}", 4)


_DISPATCH = {
    "validate": cmd_validate,
    "partition": cmd_partition,
    "normal-modes": cmd_normal_modes,
    "ground-state": cmd_ground_state,
    "entangle": cmd_entangle,
    "compare": cmd_compare,
    "invert-means": cmd_invert_means,
    "evolve": cmd_evolve,
    "shield-search": cmd_shield_search,
    "oracle-check": cmd_oracle_check,
}


def run(command: str, doc: ConfigDocument, tol=None, grid=None, horizon=None) -> Report:
    """Execute ``command`` on a parsed document; CLI overrides replace run parameters."""
    if command not in _DISPATCH:
        raise ValueError(f"unknown command {command!r} (one of {', '.join(COMMANDS)})")
    overrides = {k: v for k, v in (("tol", tol), ("grid", grid), ("horizon", horizon)) if v is not None}
    if overrides:
        doc = replace(doc, run=replace(doc.run, **overrides))
    rep = _new_report(command, doc)
    _DISPATCH[command](doc, rep)
    return rep
