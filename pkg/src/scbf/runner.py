"""Experiment execution: artifact directories, sweeps, stored-run checks.

Layout of one run directory:

    out/
      manifest.json     # config + config hash (+ run metadata)
      ledger.csv        # one row per solver step, columns as documented
      report.json       # results of the requested checks
      fields/NNNN.snap  # stored states of the trajectory, time-indexed

Re-executing the same config reproduces every artifact byte for byte.
Sweeps fan sub-runs out over a process pool; the parent process is the
single writer of all files.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import snapshots
from .analysis import check_energy_equality as energy_residuals
from .checks import CHECK_REGISTRY, run_named_check
from .config import ExperimentConfig
from .domain import ConfigurationError
from .noise import OUProcess
from .operators import norm_h
from .solver import Trajectory, solve_transformed

WORKERS_ENV = "SCBF_WORKERS"

SWEEP_AXES = {
    "params.mu": "mu",
    "params.alpha": "alpha",
    "params.beta": "beta",
    "params.r": "r",
    "params.chi": "chi",
    "noise.seed": "seed",
    "noise.dt": "dt",
    "noise.base_amp": "base_amp",
    "noise.s": "s",
    "noise.delta": "delta",
    "run.T": "T",
    "run.solver_dt_multiple": "solver_dt_multiple",
}


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def simulate(cfg: ExperimentConfig) -> Trajectory:
    """Forward run of the configured experiment (the `run` trajectory)."""
    dom = cfg.domain()
    params = cfg.params()
    scfg = cfg.solver_config(dom)
    x = cfg.initial_field(dom)
    if cfg.base_amp > 0:
        proc = OUProcess(cfg.omega(), params.mu, params.chi)
        n_grid = max(1, round(cfg.T / cfg.dt))
        path = proc.path(0.0, cfg.T, state_stride=max(1, n_grid // 32),
                         lp_exponents=(4.0, params.r + 1.0))
        v0 = x - path.state(0.0)
    else:
        path = None
        v0 = x
    return solve_transformed(v0, path, cfg.T, scfg)


def _write_trajectory(out: Path, traj: Trajectory) -> None:
    fields_dir = out / "fields"
    fields_dir.mkdir(parents=True, exist_ok=True)
    for i, (t, state) in enumerate(zip(traj.times, traj.states)):
        snapshots.write_snapshot(fields_dir / f"{i:04d}.snap", state, time=t,
                                 step=round((t - traj.t_start) / traj.dt))
    snapshots.write_ledger_csv(out / "ledger.csv", traj.ledger)


def execute_run(cfg: ExperimentConfig, out_dir) -> int:
    """The `run` verb: trajectory (when T > 0) plus the configured checks.

    Exit status: 0 success, 1 check failure (validation failures raise
    before this point and map to status 2 in the CLI).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_data = cfg.to_dict()
    checks = []
    if cfg.T > 0:
        traj = simulate(cfg)
        _write_trajectory(out, traj)
        norms = [norm_h(s) for s in traj.states]
        snapshots.write_table_csv(
            out / "norms.csv",
            ("time", "v_H"),
            list(zip([float(t) for t in traj.times], norms)),
        )
    for name in cfg.check_names:
        checks.append(run_named_check(name, cfg))
        _write_check_tables(out, checks[-1])
    passed = snapshots.write_report(out / "report.json", config_data, checks)
    snapshots.write_manifest(out / "manifest.json", config_data,
                             extra={"checks_run": list(cfg.check_names)})
    return 0 if passed else 1


def _write_check_tables(out: Path, check: dict) -> None:
    """Emit plot-ready CSV companions for checks that carry series."""
    name = check["name"]
    if name == "kappa-decay" and "per_seed" in check:
        rows = [(row["seed"], row["passed"], row["empirical_t0"])
                for row in check["per_seed"]]
        snapshots.write_table_csv(out / "kappa_decay.csv",
                                  ("seed", "passed", "empirical_t0"), rows)
    if name == "absorption" and "worst_norms" in check:
        rows = sorted((float(k), v) for k, v in check["worst_norms"].items())
        snapshots.write_table_csv(out / "absorption.csv",
                                  ("horizon", "worst_H_norm"), rows)
    if name == "pullback-contraction" and "pullback_gaps" in check:
        rows = sorted((float(k), v) for k, v in check["pullback_gaps"].items())
        snapshots.write_table_csv(out / "pullback_gaps.csv",
                                  ("horizon", "gap_H"), rows)
    if name in ("energy-equality", "closed-form-shear", "chi-independence"):
        key = "residuals" if "residuals" in check else \
            ("errors" if "errors" in check else "gaps")
        if key in check and isinstance(check[key], list):
            rows = list(enumerate(check[key]))
            snapshots.write_table_csv(out / f"{name.replace('-', '_')}.csv",
                                      ("refinement", key), rows)


def _sweep_one(payload):
    axis_field, value, base_dict, sub_out = payload
    cfg = ExperimentConfig.from_dict(base_dict).with_overrides(
        **{axis_field: value})
    status = execute_run(cfg, sub_out)
    report = snapshots.read_manifest(Path(sub_out) / "report.json")
    return value, status, report["passed"]


def execute_sweep(cfg: ExperimentConfig, axis: str, values, out_dir,
                  workers: int = 1) -> int:
    """One sub-run per value of a recognized scalar axis; aggregate table."""
    if axis not in SWEEP_AXES:
        raise ConfigurationError(
            f"unknown sweep axis {axis!r}; recognized: {sorted(SWEEP_AXES)}"
        )
    if not values:
        raise ConfigurationError("sweep needs a non-empty value list")
    axis_field = SWEEP_AXES[axis]
    caster = int if axis_field in ("seed", "solver_dt_multiple") else float
    values = [caster(v) for v in values]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads = [
        (axis_field, v, cfg.to_dict(), str(out / f"{axis_field}_{i:03d}"))
        for i, v in enumerate(values)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, payloads))
    else:
        results = [_sweep_one(p) for p in payloads]
    rows = [(v, s, p) for v, s, p in results]
    snapshots.write_table_csv(out / "sweep.csv", (axis, "status", "passed"),
                              rows)
    snapshots.write_manifest(out / "manifest.json", cfg.to_dict(),
                             extra={"sweep_axis": axis, "values": values})
    return 0 if all(s == 0 for _, s, _ in results) else 1


def execute_stored_check(traj_dir, out_dir) -> int:
    """The `check` verb: analysis-only pass over a stored trajectory.

    Recomputes the energy balance from ledger.csv and validates that every
    stored snapshot reproduces its ledger row.
    """
    traj_dir = Path(traj_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = snapshots.read_manifest(traj_dir / "manifest.json")
    cfg = ExperimentConfig.from_dict(manifest["config"])
    ledger = snapshots.read_ledger_csv(traj_dir / "ledger.csv")
    snaps = sorted((traj_dir / "fields").glob("*.snap"))
    if not snaps:
        raise ConfigurationError(f"no snapshots under {traj_dir}/fields")
    dom = cfg.domain()
    times, states = [], []
    for snap in snaps:
        state, header = snapshots.read_snapshot(snap, dom)
        times.append(header["time"])
        states.append(state)
    traj = Trajectory(times=times, states=states, ledger=ledger,
                      dt=cfg.dt * cfg.solver_dt_multiple, params=cfg.params(),
                      t_start=times[0])
    res = energy_residuals(traj)
    recompute_ok, worst = _recompute_ledger_rows(cfg, traj)
    checks = [
        {
            "name": "stored-energy-equality",
            "passed": bool(res["max_residual_rel"] <= 100.0 * traj.dt),
            "max_residual": res["max_residual"],
            "max_residual_rel": res["max_residual_rel"],
        },
        {
            "name": "stored-ledger-recompute",
            "passed": recompute_ok,
            "worst_relative_error": worst,
        },
    ]
    passed = snapshots.write_report(out / "report.json", manifest["config"],
                                    checks)
    return 0 if passed else 1


def _recompute_ledger_rows(cfg: ExperimentConfig, traj: Trajectory):
    """Rebuild ledger rows at stored times from the snapshots themselves."""
    from .solver import LEDGER_COLUMNS, _ledger_row, _nonlinear_coeffs

    params = cfg.params()
    scfg = cfg.solver_config(traj.states[0].domain)
    if cfg.base_amp > 0:
        proc = OUProcess(cfg.omega(), params.mu, params.chi)
        path = proc.path(min(traj.times), max(traj.times),
                         state_stride=max(1, round(
                             (max(traj.times) - min(traj.times)) / cfg.dt)))
    else:
        path = None
    n_rows = len(traj.ledger)
    worst = 0.0
    for t, state in zip(traj.times, traj.states):
        m = round((t - traj.t_start) / traj.dt)
        if m >= n_rows:
            continue
        ups = path.state(t) if path is not None else \
            traj.states[0].zero(state.domain)
        w = state + ups
        b_hat, c_hat, w_grid = _nonlinear_coeffs(w, scfg)
        row = _ledger_row(m, t, state, ups, w_grid, b_hat, c_hat, scfg)
        stored = dict(zip(LEDGER_COLUMNS, traj.ledger.rows[m]))
        for col in LEDGER_COLUMNS[2:]:
            scale = max(abs(stored[col]), abs(row[col]), 1.0)
            worst = max(worst, abs(stored[col] - row[col]) / scale)
    return worst <= 1e-10, worst
