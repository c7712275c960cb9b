"""Config parsing, seeding, and the end-to-end command pipeline."""

import json
import math
import os

import numpy as np
import pytest

from lindfit.cli import (
    ConfigError,
    cmd_eval,
    cmd_gen_data,
    cmd_interpret,
    cmd_scan,
    cmd_stationary,
    cmd_train,
    derive_seed,
    load_config,
    main,
    reference_two_spin_hamiltonian,
)
from lindfit.lindblad_generator import (
    GeneratorParams,
    assemble_generator,
    propagate_trajectory,
    save_model,
)
from lindfit.many_body_sim import (
    SpinChainModel,
    Trajectory,
    load_trajectory,
    save_trajectory,
)
from lindfit.spin_algebra import build_pauli_basis, ginibre_density_matrix, rho_to_coherence

TINY = {
    "model": {"variant": "I", "n_sites": 4, "omega": 1.0, "V": 0.8,
              "V_prime": 0.4, "beta": 0.2},
    "simulation": {"dt": 0.1, "T_train": 0.5, "T_extrapolate": 1.0,
                   "n_trajectories": 3, "n_eval_trajectories": 2, "seed": 42},
    "training": {"epochs": 1, "batch_size": 8, "batches_per_epoch": 4,
                 "seed": 0, "init_scale": 0.05},
    "metrics": {"n_initial_conditions": 2, "max_window_steps": 2000},
}


def _write_config(tmp_path, overrides=None, name="config.json"):
    raw = json.loads(json.dumps(TINY))
    for block, vals in (overrides or {}).items():
        if isinstance(vals, dict):
            raw.setdefault(block, {}).update(vals)
        else:
            raw[block] = vals
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return str(path)


def _stable_two_spin_params():
    # diagonal Kossakowski factors give an everywhere-damped generator with
    # a clean gap, handy as a stand-in learned model
    rng = np.random.default_rng(5)
    om = 0.3 * rng.standard_normal(15)
    X = np.diag(0.4 + 0.2 * rng.random(15))
    return GeneratorParams(omega=om, X=X, Y=np.zeros((15, 15)))


def test_load_config_defaults(tmp_path):
    cfg = load_config(_write_config(tmp_path))
    assert cfg.model.variant == "I" and cfg.model.n_sites == 4
    assert cfg.simulation.dt == 0.1
    assert cfg.training.learning_rate == 1e-3
    assert cfg.metrics.a == 5.0 and cfg.metrics.b == 10.0
    assert cfg.paths.data_dir == "data"


def test_load_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write_config(tmp_path, {"simulation": {"T_train": 0.55}}))
    with pytest.raises(ConfigError):
        load_config(_write_config(tmp_path, {"simulation": {"bogus_key": 1}}))
    with pytest.raises(ConfigError):
        load_config(_write_config(tmp_path, {"simulation": {"T_extrapolate": 0.3}}))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    nomodel = tmp_path / "nomodel.json"
    nomodel.write_text("{}")
    with pytest.raises(ConfigError):
        load_config(str(nomodel))


def test_derive_seed_stable_and_distinct():
    a = derive_seed(42, "train", 0)
    assert a == derive_seed(42, "train", 0)
    others = {derive_seed(42, "train", 1), derive_seed(42, "eval", 0),
              derive_seed(43, "train", 0), derive_seed(42, "split")}
    assert a not in others and len(others) == 4
    assert 0 <= a < 2 ** 63


def test_gen_data_files_and_manifest(tmp_path):
    cfg = load_config(_write_config(tmp_path))
    out = str(tmp_path / "run")
    mpath = cmd_gen_data(cfg, out)
    manifest = json.loads(open(mpath).read())
    assert manifest["train_files"] == ["train_000.csv", "train_001.csv", "train_002.csv"]
    assert manifest["eval_files"] == ["eval_000.csv", "eval_001.csv"]
    assert manifest["model"]["variant"] == "I"
    for name in manifest["train_files"] + manifest["eval_files"]:
        traj = load_trajectory(os.path.join(out, "data", name))
        assert traj.snapshots.shape == (11, 16)  # T_extrapolate/dt + 1 rows
    # regenerating must be byte-identical
    first = open(mpath, "rb").read()
    datafile = os.path.join(out, "data", "train_000.csv")
    blob = open(datafile, "rb").read()
    cmd_gen_data(cfg, out)
    assert open(mpath, "rb").read() == first
    assert open(datafile, "rb").read() == blob


def test_gen_data_threads_match_sequential(tmp_path):
    cfg = load_config(_write_config(tmp_path))
    seq = str(tmp_path / "seq")
    par = str(tmp_path / "par")
    cmd_gen_data(cfg, seq)
    cmd_gen_data(cfg, par, threads=2)
    for name in ("train_000.csv", "eval_001.csv", "manifest.json"):
        a = open(os.path.join(seq, "data", name), "rb").read()
        b = open(os.path.join(par, "data", name), "rb").read()
        assert a == b


def test_train_writes_artifacts(tmp_path):
    cfg = load_config(_write_config(tmp_path))
    out = str(tmp_path / "run")
    mpath = cmd_gen_data(cfg, out)
    model_path = cmd_train(cfg, mpath, out)
    assert os.path.exists(model_path)
    payload = json.loads(open(model_path).read())
    assert payload["format"] == "lindfit-model-v1"
    assert payload["dt"] == 0.1
    assert "final_train_loss" in payload["extra"]
    assert os.path.exists(os.path.join(out, "models", "checkpoint.json"))
    curves = open(os.path.join(out, "reports", "loss_curves.csv")).read().strip().split("\n")
    assert curves[0] == "epoch,train_loss,val_loss"
    assert len(curves) == cfg.training.epochs + 2


def _synthetic_eval_setup(tmp_path, n_eval_steps):
    """Model file plus eval data generated by the model itself."""
    cfg = load_config(_write_config(tmp_path))
    out = str(tmp_path / "run")
    os.makedirs(os.path.join(out, "data"), exist_ok=True)
    os.makedirs(os.path.join(out, "models"), exist_ok=True)
    basis = build_pauli_basis(2)
    params = _stable_two_spin_params()
    L = assemble_generator(params, basis).L
    model_path = os.path.join(out, "models", "model.json")
    save_model(model_path, params, basis, cfg.simulation.dt)
    rng = np.random.default_rng(88)
    names = []
    for i in range(2):
        v0 = rho_to_coherence(ginibre_density_matrix(4, rng), basis)
        snaps = propagate_trajectory(L, v0, cfg.simulation.dt, n_eval_steps)
        traj = Trajectory(model=cfg.model, dt=cfg.simulation.dt, snapshots=snaps)
        name = f"eval_{i:03d}.csv"
        save_trajectory(os.path.join(out, "data", name), traj)
        names.append(name)
    mpath = os.path.join(out, "data", "manifest.json")
    with open(mpath, "w") as fh:
        json.dump({"train_files": [], "eval_files": names}, fh)
    return cfg, model_path, mpath, out


def test_eval_on_own_dynamics_is_exact(tmp_path):
    cfg, model_path, mpath, out = _synthetic_eval_setup(tmp_path, n_eval_steps=10)
    report = cmd_eval(cfg, model_path, mpath, out)
    assert report.i_err_interp < 1e-12
    assert report.i_err_extrap < 1e-12
    assert report.fvu_interp < 1e-10
    assert report.epsilon_status == "ok"
    assert math.isfinite(report.epsilon_stationary)
    ts = os.path.join(out, "reports", "timeseries_eval_000.csv")
    header = open(ts).readline().strip().split(",")
    assert header[0] == "t_over_omega_inv"
    assert "exact_v_1" in header and "model_v_16" in header
    rep_csv = open(os.path.join(out, "reports", "eval_report.csv")).read().split("\n")
    assert rep_csv[0].startswith("i_err_interp,i_err_extrap")


def test_eval_flags_missing_extrapolation(tmp_path):
    # files stop at T_train, so the extrapolation window cannot be scored
    cfg, model_path, mpath, out = _synthetic_eval_setup(tmp_path, n_eval_steps=5)
    report = cmd_eval(cfg, model_path, mpath, out)
    assert math.isnan(report.i_err_extrap)
    assert math.isnan(report.fvu_extrap)
    assert "extrapolation" in report.notes
    assert report.i_err_interp < 1e-12


def test_eval_rejects_dt_mismatch(tmp_path):
    cfg, model_path, mpath, out = _synthetic_eval_setup(tmp_path, n_eval_steps=10)
    basis = build_pauli_basis(2)
    save_model(model_path, _stable_two_spin_params(), basis, 0.05)
    with pytest.raises(ConfigError):
        cmd_eval(cfg, model_path, mpath, out)


def test_scan_grid_and_failure_rows(tmp_path):
    over = {"scan": {"axis1_name": "beta", "axis1_values": [0.0, -1.0],
                     "axis2_name": "V_prime", "axis2_values": [0.3]},
            "training": {"epochs": 0},
            "metrics": {"n_initial_conditions": 1, "max_window_steps": 500}}
    cfg = load_config(_write_config(tmp_path, over))
    out = str(tmp_path / "run")
    csv_path = cmd_scan(cfg, out)
    lines = open(csv_path).read().strip().split("\n")
    assert lines[0] == ("axis1,axis2,i_err_interp,i_err_extrap,fvu_interp,"
                        "fvu_extrap,epsilon,status")
    assert len(lines) == 3
    ok_row = lines[1].split(",")
    assert ok_row[0] == "0" and ok_row[-1] == "ok"
    bad_row = lines[2].split(",")
    assert bad_row[0] == "-1" and bad_row[-1].startswith("failed: ValueError")
    cell = os.path.join(out, "scan", "beta=0_V_prime=0.3")
    assert os.path.exists(os.path.join(cell, "models", "model.json"))
    assert os.path.exists(os.path.join(cell, "reports", "eval_report.csv"))


def test_scan_rejects_bad_axis(tmp_path):
    over = {"model": {"variant": "II", "n_sites": 4, "omega": 1.0, "V": 0.1,
                      "alpha": 0.3, "beta": 0.0, "V_prime": 0.0},
            "scan": {"axis1_name": "beta", "axis1_values": [0.0],
                     "axis2_name": "V", "axis2_values": [0.1]}}
    cfg = load_config(_write_config(tmp_path, over))
    with pytest.raises(ConfigError):
        cmd_scan(cfg, str(tmp_path / "run"))


def test_stationary_report_ok_path(tmp_path):
    cfg, model_path, _, out = _synthetic_eval_setup(tmp_path, n_eval_steps=5)
    rpath = cmd_stationary(cfg, model_path, out)
    report = json.loads(open(rpath).read())
    assert report["epsilon_status"] == "ok"
    assert report["e_gap"] > 0
    assert report["tau_over_omega_inv"] == pytest.approx(1 / report["e_gap"])
    assert len(report["v_st"]) == 16
    assert report["v_st"][15] == pytest.approx(0.5, abs=1e-9)
    obs = os.path.join(out, "reports", "stationary_observables.csv")
    header = open(obs).readline().strip().split(",")
    assert header[:4] == ["t_over_omega_inv", "sz_1_exact", "sz_1_model",
                          "sz_1_stationary"]


def test_stationary_report_no_gap(tmp_path):
    cfg, model_path, _, out = _synthetic_eval_setup(tmp_path, n_eval_steps=5)
    basis = build_pauli_basis(2)
    pure = GeneratorParams(omega=np.ones(15) * 0.2, X=np.zeros((15, 15)),
                           Y=np.zeros((15, 15)))
    save_model(model_path, pure, basis, cfg.simulation.dt)
    report = json.loads(open(cmd_stationary(cfg, model_path, out)).read())
    assert report["no_gap"] is True
    assert report["epsilon_status"] == "no_gap"
    assert report["epsilon_stationary"] is None
    assert not os.path.exists(os.path.join(out, "reports",
                                           "stationary_observables.csv"))


def test_reference_two_spin_hamiltonian():
    mI = SpinChainModel("I", 5, 1.2, 0.7, V_prime=0.4)
    H = reference_two_spin_hamiltonian(mI)
    assert abs(np.trace(H)) < 1e-14
    # n(x)n coupling shows up between the diagonal corners
    assert H[0, 0] - H[3, 3] == pytest.approx(0.4)
    assert H[0, 1] == pytest.approx(0.6)
    mII = SpinChainModel("II", 6, 1.0, 0.1, alpha=0.3)
    H2 = reference_two_spin_hamiltonian(mII)
    assert H2[0, 0] - H2[3, 3] == pytest.approx(0.1)


def test_interpret_identifies_planted_structure(tmp_path):
    over = {"model": {"variant": "II", "n_sites": 4, "omega": 1.0, "V": 0.1,
                      "alpha": 0.3, "beta": 0.0, "V_prime": 0.0}}
    cfg = load_config(_write_config(tmp_path, over))
    out = str(tmp_path / "run")
    os.makedirs(os.path.join(out, "models"), exist_ok=True)
    basis = build_pauli_basis(2)
    H_ref = reference_two_spin_hamiltonian(cfg.model)
    om = np.einsum("kij,ji->k", basis.elements[:15], H_ref).real
    om[11] += 0.03  # plant the deviation on the sigma_z sum direction
    om[14] += 0.03
    X = np.zeros((15, 15))
    X[0, 11] = X[0, 14] = 0.3  # rank-1 dissipator along the same direction
    X[1, 1] = 0.01
    params = GeneratorParams(omega=om, X=X, Y=np.zeros((15, 15)))
    model_path = os.path.join(out, "models", "model.json")
    save_model(model_path, params, basis, cfg.simulation.dt)
    report = json.loads(open(cmd_interpret(cfg, model_path, out)).read())
    assert report["H_diff_fraction_on_sigma_z_sum"] > 0.99
    assert report["dominant_jump_alignment_sigma_z_sum"] > 0.99
    assert report["H_diff_hs_norm"] == pytest.approx(0.03 * np.sqrt(2), rel=1e-9)
    assert len(report["rates"]) == 15
    assert report["rates"][0] >= report["rates"][1]


def test_main_success_and_error_paths(tmp_path, capsys):
    cfg_path = _write_config(tmp_path)
    out = str(tmp_path / "run")
    rc = main(["--config", cfg_path, "--out", out, "gen-data"])
    assert rc == 0
    assert "manifest:" in capsys.readouterr().out
    # missing config file: single JSON error line on stderr
    rc = main(["--config", str(tmp_path / "nope.json"), "--out", out, "gen-data"])
    captured = capsys.readouterr()
    assert rc == 1
    err = json.loads(captured.err.strip())
    assert err["error"] == "FileNotFoundError"


def test_main_capacity_error(tmp_path, capsys):
    cfg_path = _write_config(tmp_path, {"model": {"n_sites": 13}})
    rc = main(["--config", cfg_path, "--out", str(tmp_path / "run"), "gen-data"])
    captured = capsys.readouterr()
    assert rc == 1
    err = json.loads(captured.err.strip())
    assert err["error"] == "CapacityError"


def test_main_seed_override_changes_data(tmp_path):
    cfg_path = _write_config(tmp_path)
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    assert main(["--config", cfg_path, "--out", out_a, "gen-data"]) == 0
    assert main(["--config", cfg_path, "--seed", "7", "--out", out_b, "gen-data"]) == 0
    a = open(os.path.join(out_a, "data", "train_000.csv")).read()
    b = open(os.path.join(out_b, "data", "train_000.csv")).read()
    assert a != b
