"""Command-line experiment harness.

Subcommands chain the library into reproducible workflows: exact-trajectory
generation (`gen-data`), generator fitting (`train`), fidelity evaluation
(`eval`), two-axis parameter scans (`scan`), stationary-state analysis
(`stationary`) and model inspection (`interpret`).  Every command is a pure
function of (config, input files, seed); all emitted times are in units of
1/omega.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field, fields, replace

import numpy as np

from .spin_algebra import build_pauli_basis, coherence_to_matrix
from .lindblad_generator import (assemble_generator, propagate,
                                 stationary_state, extract_hamiltonian,
                                 kossakowski_from_factors, jump_decomposition,
                                 save_model, load_model)
from .trainer import TrainConfig, build_dataset, train, save_loss_curves, \
    save_checkpoint
from .many_body_sim import (SpinChainModel, Trajectory, generate_trajectory,
                            save_trajectory, load_trajectory, CapacityError)
from .metrics import i_err, fvu, stationary_error, ErrorReport

SIGMA_Z_SUM_COMPONENTS = (11, 14)  # sigma_z(x)1 and 1(x)sigma_z basis slots


class ConfigError(ValueError):
    pass


@dataclass
class SimulationBlock:
    dt: float = 0.01
    T_train: float = 10.0
    T_extrapolate: float = 20.0
    n_trajectories: int = 50
    n_eval_trajectories: int = 10
    seed: int = 1234
    max_sites: int = 12


@dataclass
class ScanBlock:
    axis1_name: str = ""
    axis1_values: tuple = ()
    axis2_name: str = ""
    axis2_values: tuple = ()


@dataclass
class MetricsBlock:
    a: float = 5.0
    b: float = 10.0
    n_initial_conditions: int = 10
    # stationary windows longer than this many steps are refused rather
    # than silently computed for hours
    max_window_steps: int = 2_000_000


@dataclass
class PathsBlock:
    data_dir: str = "data"
    model_dir: str = "models"
    report_dir: str = "reports"


@dataclass
class ExperimentConfig:
    model: SpinChainModel
    simulation: SimulationBlock = field(default_factory=SimulationBlock)
    training: TrainConfig = field(default_factory=TrainConfig)
    scan: ScanBlock = field(default_factory=ScanBlock)
    metrics: MetricsBlock = field(default_factory=MetricsBlock)
    paths: PathsBlock = field(default_factory=PathsBlock)


def _block(cls, payload, name):
    payload = dict(payload or {})
    known = {f.name for f in fields(cls)}
    bad = set(payload) - known
    if bad:
        raise ConfigError(f"unknown keys in {name} block: {sorted(bad)}")
    if "axis1_values" in payload:
        payload["axis1_values"] = tuple(payload["axis1_values"])
    if "axis2_values" in payload:
        payload["axis2_values"] = tuple(payload["axis2_values"])
    return cls(**payload)


def _check_divides(dt, T, what):
    if abs(T - round(T / dt) * dt) > 1e-12:
        raise ConfigError(f"dt={dt} does not divide {what}={T}")


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if "model" not in raw:
        raise ConfigError(f"{path}: missing required 'model' block")
    mraw = dict(raw["model"])
    if "subsystem_sites" in mraw:
        mraw["subsystem_sites"] = tuple(mraw["subsystem_sites"])
    try:
        model = SpinChainModel(**mraw)
    except TypeError as exc:
        raise ConfigError(f"{path}: bad model block ({exc})") from exc
    cfg = ExperimentConfig(
        model=model,
        simulation=_block(SimulationBlock, raw.get("simulation"), "simulation"),
        training=_block(TrainConfig, raw.get("training"), "training"),
        scan=_block(ScanBlock, raw.get("scan"), "scan"),
        metrics=_block(MetricsBlock, raw.get("metrics"), "metrics"),
        paths=_block(PathsBlock, raw.get("paths"), "paths"))
    sim = cfg.simulation
    if sim.dt <= 0:
        raise ConfigError("simulation.dt must be positive")
    _check_divides(sim.dt, sim.T_train, "T_train")
    _check_divides(sim.dt, sim.T_extrapolate, "T_extrapolate")
    if sim.T_extrapolate < sim.T_train:
        raise ConfigError("T_extrapolate must be >= T_train")
    return cfg


def derive_seed(base, *parts):
    """Stable 63-bit stream seed from a base seed and a label path."""
    text = f"{base}|" + "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


def _dirs(cfg, out):
    p = cfg.paths
    d = {k: os.path.join(out, v) for k, v in
         (("data", p.data_dir), ("model", p.model_dir), ("report", p.report_dir))}
    for v in d.values():
        os.makedirs(v, exist_ok=True)
    return d


def _gen_one(model, dt, n_steps, seed, path, max_sites):
    traj = generate_trajectory(model, dt, n_steps, seed, max_sites=max_sites)
    save_trajectory(path, traj)
    return os.path.basename(path)


def cmd_gen_data(cfg, out, threads=1):
    """Write train/eval trajectory files and a deterministic manifest."""
    dirs = _dirs(cfg, out)
    sim = cfg.simulation
    n_steps = int(round(sim.T_extrapolate / sim.dt))
    jobs = []
    for role, count in (("train", sim.n_trajectories),
                        ("eval", sim.n_eval_trajectories)):
        for i in range(count):
            seed = derive_seed(sim.seed, role, i)
            path = os.path.join(dirs["data"], f"{role}_{i:03d}.csv")
            jobs.append((role, cfg.model, sim.dt, n_steps, seed, path,
                         sim.max_sites))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            list(pool.map(_gen_worker, jobs))
    else:
        for job in jobs:
            _gen_worker(job)
    manifest = {
        "model": asdict(cfg.model),
        "simulation": asdict(sim),
        "train_files": [os.path.basename(j[5]) for j in jobs if j[0] == "train"],
        "eval_files": [os.path.basename(j[5]) for j in jobs if j[0] == "eval"],
    }
    mpath = os.path.join(dirs["data"], "manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return mpath


def _gen_worker(job):
    _, model, dt, n_steps, seed, path, max_sites = job
    return _gen_one(model, dt, n_steps, seed, path, max_sites)


def _load_manifest(manifest_path):
    if not os.path.exists(manifest_path):
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    return manifest, os.path.dirname(manifest_path)


def cmd_train(cfg, manifest_path, out):
    """Fit a generator on the manifest's training files, t <= T_train."""
    dirs = _dirs(cfg, out)
    manifest, data_dir = _load_manifest(manifest_path)
    sim = cfg.simulation
    keep = int(round(sim.T_train / sim.dt)) + 1
    trajs = []
    for name in manifest["train_files"]:
        traj = load_trajectory(os.path.join(data_dir, name))
        trajs.append(Trajectory(model=traj.model, dt=traj.dt,
                                snapshots=traj.snapshots[:keep],
                                seed=traj.seed))
    split_rng = np.random.default_rng(derive_seed(sim.seed, "split"))
    ds = build_dataset(trajs, split_fraction=0.8, rng=split_rng)
    result = train(cfg.training, ds)
    basis = build_pauli_basis(2)
    model_path = os.path.join(dirs["model"], "model.json")
    save_model(model_path, result.params, basis, sim.dt,
               extra={"final_train_loss": result.train_history[-1],
                      "final_val_loss": result.val_history[-1]})
    save_checkpoint(os.path.join(dirs["model"], "checkpoint.json"),
                    result.params, result.final_state,
                    result.train_history, result.val_history,
                    sim.dt, basis.convention_id)
    save_loss_curves(os.path.join(dirs["report"], "loss_curves.csv"),
                     result.train_history, result.val_history)
    return model_path


def _model_trajectory(L, v0, dt, n_steps):
    M = propagate(L, dt)
    out = np.empty((n_steps + 1, v0.size))
    out[0] = v0
    v = v0.copy()
    for k in range(1, n_steps + 1):
        v = M @ v
        out[k] = v
    return out


def _window_view(traj, t_lo, t_hi):
    k_lo = int(round(t_lo / traj.dt))
    k_hi = int(round(t_hi / traj.dt))
    return Trajectory(model=getattr(traj, "model", None), dt=traj.dt,
                      snapshots=traj.snapshots[k_lo:k_hi + 1])


def _epsilon_pipeline(cfg, gm, out_dirs=None):
    """Stationary-state distance for the config's exact dynamics.

    Returns (epsilon, status, info, trajectories or None).  Long windows are
    regenerated at a coarser grid under metrics.max_window_steps.
    """
    info = stationary_state(gm)
    if info.no_gap:
        return math.nan, "no_gap", info, None
    if info.non_unique or info.v_st is None:
        return math.nan, "non_unique", info, None
    met, sim = cfg.metrics, cfg.simulation
    horizon = met.b * info.tau
    stride = max(1, int(math.ceil(horizon / sim.dt / met.max_window_steps)))
    dt_eps = sim.dt * stride
    n_steps = int(math.ceil(horizon / dt_eps))
    if n_steps > met.max_window_steps:
        return math.nan, "window_budget_exceeded", info, None
    trajs = []
    for k in range(met.n_initial_conditions):
        seed = derive_seed(sim.seed, "stationary", k)
        trajs.append(generate_trajectory(cfg.model, dt_eps, n_steps, seed,
                                         max_sites=sim.max_sites))
    eps = stationary_error(trajs, info.v_st, info.tau, met.a, met.b)
    return eps, "ok", info, trajs


def cmd_eval(cfg, model_path, manifest_path, out):
    """Fidelity report for a learned model against the eval trajectories."""
    dirs = _dirs(cfg, out)
    params, basis, model_dt, _ = load_model(model_path)
    manifest, data_dir = _load_manifest(manifest_path)
    sim, met = cfg.simulation, cfg.metrics
    if abs(model_dt - sim.dt) > 1e-12:
        raise ConfigError(f"model dt={model_dt} differs from config dt={sim.dt}")
    gm = assemble_generator(params, basis)

    notes = {}
    ie_i, ie_e, fv_i, fv_e = [], [], [], []
    for idx, name in enumerate(manifest["eval_files"]):
        exact = load_trajectory(os.path.join(data_dir, name))
        t_end = exact.dt * (exact.snapshots.shape[0] - 1)
        pred = Trajectory(model=exact.model, dt=exact.dt,
                          snapshots=_model_trajectory(
                              gm.L, exact.snapshots[0], exact.dt,
                              exact.snapshots.shape[0] - 1))
        _write_timeseries(os.path.join(dirs["report"],
                                       f"timeseries_eval_{idx:03d}.csv"),
                          exact, pred)
        ie_i.append(i_err(exact, pred, 0.0, sim.T_train))
        r = fvu(_window_view(exact, 0.0, sim.T_train),
                _window_view(pred, 0.0, sim.T_train))
        fv_i.append(r.value)
        if t_end >= sim.T_extrapolate - 1e-9:
            ie_e.append(i_err(exact, pred, sim.T_train, sim.T_extrapolate))
            r = fvu(_window_view(exact, sim.T_train, sim.T_extrapolate),
                    _window_view(pred, sim.T_train, sim.T_extrapolate))
            fv_e.append(r.value)
        else:
            notes["extrapolation"] = "missing data: interpolation-only report"

    eps, eps_status, info, _ = _epsilon_pipeline(cfg, gm)
    report = ErrorReport(
        i_err_interp=float(np.mean(ie_i)),
        i_err_extrap=float(np.mean(ie_e)) if ie_e else math.nan,
        fvu_interp=float(np.nanmean(fv_i)),
        fvu_extrap=float(np.nanmean(fv_e)) if fv_e else math.nan,
        epsilon_stationary=eps,
        interp_window=(0.0, sim.T_train),
        extrap_window=(sim.T_train, sim.T_extrapolate),
        a=met.a, b=met.b, tau=info.tau,
        n_initial_conditions=met.n_initial_conditions,
        epsilon_status=eps_status, notes=notes)
    _write_report_csv(os.path.join(dirs["report"], "eval_report.csv"), report)
    return report


def _write_timeseries(path, exact, pred):
    n = exact.snapshots.shape[1]
    cols = ["t_over_omega_inv"]
    cols += [f"exact_v_{k}" for k in range(1, n + 1)]
    cols += [f"model_v_{k}" for k in range(1, n + 1)]
    t = exact.dt * np.arange(exact.snapshots.shape[0])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(t.size):
            row = [f"{t[k]:.17g}"]
            row += [f"{x:.17g}" for x in exact.snapshots[k]]
            row += [f"{x:.17g}" for x in pred.snapshots[k]]
            fh.write(",".join(row) + "\n")


def _write_report_csv(path, report):
    head = ["i_err_interp", "i_err_extrap", "fvu_interp", "fvu_extrap",
            "epsilon_stationary", "epsilon_status",
            "interp_start_over_omega_inv", "interp_end_over_omega_inv",
            "extrap_start_over_omega_inv", "extrap_end_over_omega_inv",
            "a", "b", "tau_over_omega_inv", "n_initial_conditions"]
    vals = [report.i_err_interp, report.i_err_extrap, report.fvu_interp,
            report.fvu_extrap, report.epsilon_stationary,
            report.epsilon_status,
            report.interp_window[0], report.interp_window[1],
            report.extrap_window[0], report.extrap_window[1],
            report.a, report.b,
            "" if report.tau is None else report.tau,
            report.n_initial_conditions]
    with open(path, "w") as fh:
        fh.write(",".join(head) + "\n")
        fh.write(",".join(_csv_cell(v) for v in vals) + "\n")


def _csv_cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


_SCAN_AXES = {"I": ("beta", "V_prime"), "II": ("alpha", "V")}


def _cell_dir_name(a1, v1, a2, v2):
    return f"{a1}={v1:g}_{a2}={v2:g}"


def _scan_cell(args):
    cfg, v1, v2, out = args
    a1, a2 = cfg.scan.axis1_name, cfg.scan.axis2_name
    try:
        cell_model = replace(cfg.model, **{a1: v1, a2: v2})
        cell_seed = derive_seed(cfg.simulation.seed, "cell", a1, repr(v1),
                                a2, repr(v2))
        cell_cfg = replace(cfg, model=cell_model,
                           simulation=replace(cfg.simulation, seed=cell_seed))
        cell_out = os.path.join(out, "scan", _cell_dir_name(a1, v1, a2, v2))
        manifest = cmd_gen_data(cell_cfg, cell_out)
        model_path = cmd_train(cell_cfg, manifest, cell_out)
        report = cmd_eval(cell_cfg, model_path, manifest, cell_out)
        return (v1, v2, report.i_err_interp, report.i_err_extrap,
                report.fvu_interp, report.fvu_extrap,
                report.epsilon_stationary, "ok")
    except Exception as exc:  # cell failures recorded, scan continues
        msg = f"failed: {type(exc).__name__}: {exc}"
        msg = msg.replace(",", ";").replace("\n", " ")[:200]
        return (v1, v2, math.nan, math.nan, math.nan, math.nan, math.nan, msg)


def cmd_scan(cfg, out, threads=1):
    """Run gen-data -> train -> eval over the two configured parameter axes."""
    scan = cfg.scan
    allowed = _SCAN_AXES[cfg.model.variant]
    for name in (scan.axis1_name, scan.axis2_name):
        if name not in allowed:
            raise ConfigError(f"scan axis {name!r} not in {allowed} for "
                              f"variant {cfg.model.variant}")
    if not scan.axis1_values or not scan.axis2_values:
        raise ConfigError("scan requires nonempty axis value lists")
    cells = [(cfg, v1, v2, out) for v1 in scan.axis1_values
             for v2 in scan.axis2_values]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_scan_cell, cells))
    else:
        rows = [_scan_cell(c) for c in cells]
    os.makedirs(os.path.join(out, "scan"), exist_ok=True)
    csv_path = os.path.join(out, "scan", "scan_results.csv")
    with open(csv_path, "w") as fh:
        fh.write("axis1,axis2,i_err_interp,i_err_extrap,fvu_interp,"
                 "fvu_extrap,epsilon,status\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")
    return csv_path


def cmd_stationary(cfg, model_path, out):
    """Stationary-state report plus long-time observable series."""
    dirs = _dirs(cfg, out)
    params, basis, _, _ = load_model(model_path)
    gm = assemble_generator(params, basis)
    eps, status, info, trajs = _epsilon_pipeline(cfg, gm)
    report = {
        "e_gap": info.e_gap,
        "tau_over_omega_inv": info.tau,
        "no_gap": info.no_gap,
        "non_unique": info.non_unique,
        "epsilon_stationary": None if math.isnan(eps) else eps,
        "epsilon_status": status,
        "window_over_omega_inv": None if info.tau is None else
            [cfg.metrics.a * info.tau, cfg.metrics.b * info.tau],
        "n_initial_conditions": cfg.metrics.n_initial_conditions,
        "v_st": None if info.v_st is None else list(info.v_st),
        "eigenvalues_re": list(np.sort(info.eigenvalues.real)),
    }
    if info.v_st is not None:
        rho_st = coherence_to_matrix(info.v_st, basis)
        report["rho_st_re"] = rho_st.real.tolist()
        report["rho_st_im"] = rho_st.imag.tolist()
    rpath = os.path.join(dirs["report"], "stationary_report.json")
    with open(rpath, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if trajs:
        _write_observables(os.path.join(dirs["report"],
                                        "stationary_observables.csv"),
                           trajs[0], gm, info, basis)
    return rpath


def _write_observables(path, exact, gm, info, basis):
    """Exact vs learned vs stationary two-spin sigma_z observables."""
    n_steps = exact.snapshots.shape[0] - 1
    pred = _model_trajectory(gm.L, exact.snapshots[0], exact.dt, n_steps)
    comps = {"sz_1": 11, "sz_2": 14, "sz_sz": 10}
    t = exact.dt * np.arange(n_steps + 1)
    cols = ["t_over_omega_inv"]
    for name in comps:
        cols += [f"{name}_exact", f"{name}_model", f"{name}_stationary"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k in range(t.size):
            row = [f"{t[k]:.17g}"]
            for name, ci in comps.items():
                # expectation of the two-spin Pauli word is 2 * v component
                row += [f"{2 * exact.snapshots[k, ci]:.17g}",
                        f"{2 * pred[k, ci]:.17g}",
                        f"{2 * info.v_st[ci]:.17g}"]
            fh.write(",".join(row) + "\n")


def reference_two_spin_hamiltonian(model):
    """Restriction of the chain Hamiltonian to the subsystem pair, traceless.

    Variant I keeps the transverse fields and the V_prime bond between the
    two subsystem sites; variant II keeps the fields and the distance-1
    power-law bond.
    """
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    nproj = np.diag([1.0, 0.0])
    eye = np.eye(2)
    coupling = model.V_prime if model.variant == "I" else model.V
    H = model.omega / 2.0 * (np.kron(sx, eye) + np.kron(eye, sx))
    H = H + coupling * np.kron(nproj, nproj)
    return H - np.trace(H) / 4.0 * np.eye(4)


def cmd_interpret(cfg, model_path, out):
    """Emit learned Hamiltonian/Kossakowski data and the jump decomposition."""
    dirs = _dirs(cfg, out)
    params, basis, _, _ = load_model(model_path)
    H_learned = extract_hamiltonian(params, basis)
    H_ref = reference_two_spin_hamiltonian(cfg.model)
    diff = H_learned - H_ref

    direction = np.zeros(basis.n)
    direction[list(SIGMA_Z_SUM_COMPONENTS)] = 1.0 / np.sqrt(2.0)
    dir_op = np.einsum("k,kij->ij", direction, basis.elements[:basis.n])
    overlap = np.trace(dir_op.conj().T @ diff)
    hs2 = np.trace(diff.conj().T @ diff).real
    fraction = float(abs(overlap) ** 2 / hs2) if hs2 > 1e-30 else 0.0

    c = kossakowski_from_factors(params.X, params.Y)
    jd = jump_decomposition(c, basis)
    J0 = jd.jump_ops[0]
    j_norm2 = np.trace(J0.conj().T @ J0).real
    j_overlap = np.trace(dir_op.conj().T @ J0)
    j_align = float(abs(j_overlap) ** 2 / j_norm2) if j_norm2 > 1e-30 else 0.0

    report = {
        "H_learned_re": H_learned.real.tolist(),
        "H_learned_im": H_learned.imag.tolist(),
        "H_reference_re": H_ref.real.tolist(),
        "H_diff_re": diff.real.tolist(),
        "H_diff_im": diff.imag.tolist(),
        "H_diff_hs_norm": float(np.sqrt(hs2)),
        "H_diff_fraction_on_sigma_z_sum": fraction,
        "kossakowski_re": c.real.tolist(),
        "kossakowski_im": c.imag.tolist(),
        "rates": list(jd.rates),
        "dominant_jump_re": J0.real.tolist(),
        "dominant_jump_im": J0.imag.tolist(),
        "dominant_jump_alignment_sigma_z_sum": j_align,
    }
    rpath = os.path.join(dirs["report"], "interpret_report.json")
    with open(rpath, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rpath


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="lindfit",
        description="Learn and analyze Markovian generators for a two-spin "
                    "subsystem of an exactly simulated spin chain.")
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--seed", type=int, default=None,
                    help="override simulation.seed")
    ap.add_argument("--out", default=".", help="output root directory")
    ap.add_argument("--threads", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data")
    p = sub.add_parser("train")
    p.add_argument("--manifest", default=None)
    p = sub.add_parser("eval")
    p.add_argument("--model", default=None)
    p.add_argument("--manifest", default=None)
    sub.add_parser("scan")
    p = sub.add_parser("stationary")
    p.add_argument("--model", default=None)
    p = sub.add_parser("interpret")
    p.add_argument("--model", default=None)
    return ap


def _default_manifest(cfg, out):
    return os.path.join(out, cfg.paths.data_dir, "manifest.json")


def _default_model(cfg, out):
    return os.path.join(out, cfg.paths.model_dir, "model.json")


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, simulation=replace(cfg.simulation,
                                                  seed=args.seed))
        out = args.out
        manifest = getattr(args, "manifest", None)
        model_path = getattr(args, "model", None)
        if args.command == "gen-data":
            path = cmd_gen_data(cfg, out, threads=args.threads)
            print(f"manifest: {path}")
        elif args.command == "train":
            path = cmd_train(cfg, manifest or _default_manifest(cfg, out), out)
            print(f"model: {path}")
        elif args.command == "eval":
            rep = cmd_eval(cfg, model_path or _default_model(cfg, out),
                           manifest or _default_manifest(cfg, out), out)
            print(f"i_err_interp: {rep.i_err_interp:.6g}")
            print(f"i_err_extrap: {rep.i_err_extrap:.6g}")
        elif args.command == "scan":
            path = cmd_scan(cfg, out, threads=args.threads)
            print(f"scan results: {path}")
        elif args.command == "stationary":
            path = cmd_stationary(cfg, model_path or _default_model(cfg, out),
                                  out)
            print(f"stationary report: {path}")
        elif args.command == "interpret":
            path = cmd_interpret(cfg, model_path or _default_model(cfg, out),
                                 out)
            print(f"interpret report: {path}")
        return 0
    except (ConfigError, ValueError, KeyError, FileNotFoundError,
            CapacityError, RuntimeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
