"""Command-line driver.

    cavcool MODE [--config PATH] [--set key=value ...] [--out DIR] [--workers K] [--seed S]

Exit codes: 0 ok, 2 configuration, 3 validation, 4 numerical (including a
failed ``verify`` check).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import displacement as disp
from .config import MODES, RunConfig, format_value, parse_config
from .errors import ConfigError, NoFloorError, NumericalError, ValidationError
from .lindblad import DT_SAFETY, evolve_iter, initial_state
from .observables import ExpectationBundle, extract_bundle
from .params import ModelParams
from .protocol import ProtocolTrace, ScalingStudy, floor_estimate, run_protocol, scaling_study
from .quantum_core import build_space, truncation_report
from .rate_model import RateState, adiabatic_rate, collective_rate, cooling_ode, integrate_rate_model
from .verify import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3, 4


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return format_value(v)


def header_lines(cfg: RunConfig) -> list[str]:
    params = "; ".join(f"params.{k}={_fmt(v)}" for k, v in cfg.params.as_dict().items())
    extra = "; ".join(f"{k}={_fmt(cfg.source_value(k))}" for k in sorted(cfg.source) if not k.startswith("params."))
    cfg_line = f"# mode={cfg.mode}; seed={cfg.seed}; {params}"
    if extra:
        cfg_line += f"; {extra}"
    return [f"# cavcool {__version__}", cfg_line]


def write_csv(path: Path, cfg: RunConfig, columns: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in header_lines(cfg):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    return path


# modes ----------------------------------------------------------------------------------

def run_oracle(cfg: RunConfig) -> list[Path]:
    p = cfg.params.replace(N=cfg.n_atoms)
    layout = build_space(cfg.n_atoms, cfg.n_b, cfg.n_c)
    dt = DT_SAFETY / p.fastest_rate(cfg.n_atoms) if cfg.dt is None else cfg.dt
    rho0 = initial_state(layout, cfg.m0, cfg.alpha)
    cols = ["t"] + ExpectationBundle.columns(cfg.n_atoms >= 3) + ["edge_population"]
    rows = []
    for t, st in evolve_iter(rho0, p, cfg.t_final, dt, cfg.stride, exact_coupling=cfg.exact_coupling):
        row = extract_bundle(st).to_row()
        row["t"] = t
        row["edge_population"] = truncation_report(st, warn=False).worst
        rows.append(row)
    edge = max(r["edge_population"] for r in rows)
    if edge > 1e-4:
        warnings.warn(f"highest Fock state population reached {edge:.2e}; raise layout.n_b / layout.n_c",
                      RuntimeWarning, stacklevel=2)
    return [write_csv(Path(cfg.out) / "oracle.csv", cfg, cols, rows)]


def _zeta0(cfg: RunConfig) -> float:
    if cfg.zeta0 is not None:
        return cfg.zeta0
    return disp.coherence_after_displacement(cfg.m0, cfg.params)


def run_rate(cfg: RunConfig) -> list[Path]:
    p = cfg.params
    A = collective_rate(p).A_N
    z0 = _zeta0(cfg)
    t_final = cfg.t_final if cfg.t_final is not None else 5.0 / A
    ts, states = integrate_rate_model(p, cfg.m0, z0, t_final, dt=cfg.dt, stride=cfg.stride)
    m_cf, z_cf = cooling_ode(cfg.m0, z0, A, ts)
    cols = ["t"] + RateState.columns() + ["m_closed", "zeta_closed"]
    rows = []
    for k, st in enumerate(states):
        row = st.to_row()
        row.update(t=ts[k], m_closed=m_cf[k], zeta_closed=z_cf[k])
        rows.append(row)
    return [write_csv(Path(cfg.out) / "rate.csv", cfg, cols, rows)]


def run_displacement_mode(cfg: RunConfig) -> list[Path]:
    p = cfg.params
    res = disp.run_displacement(cfg.m0, p, integrate=True, periods=cfg.periods)
    traj = disp.orbit_from_phonons(cfg.m0, p, cfg.periods, cfg.dt)
    summary = {
        "m0": cfg.m0, "x_min": res.x_min, "x_max": res.x_max, "x_midpoint": res.x_mean,
        "x_first_order": disp.mean_position(cfg.m0, p, "first_order"),
        "x_time_average": traj.time_average_x(), "zeta_end": res.zeta_end, "m_end": res.m_end,
        "period": res.period, "energy_drift": traj.energy_drift,
    }
    out = Path(cfg.out)
    traj_rows = ({"t": t, "x": x, "p": q, "E": e} for t, x, q, e in traj.rows())
    return [write_csv(out / "displacement.csv", cfg, list(summary), [summary]),
            write_csv(out / "trajectory.csv", cfg, ["t", "x", "p", "E"], traj_rows)]


def run_protocol_mode(cfg: RunConfig) -> list[Path]:
    p = cfg.params
    tr = run_protocol(cfg.m0, p, cfg.max_cycles, cfg.stop_tol, cfg.protocol_mode, cfg.stage_duration)
    out = Path(cfg.out)
    rows = [r.__dict__ for r in tr.records]
    files = [write_csv(out / "cycles.csv", cfg, ProtocolTrace.columns(), rows)]
    try:
        table = list(scaling_study(p, cfg.N_list).rows())
    except NoFloorError:
        # no floor without c > 0 and mu > 0: report A_N only
        nan = float("nan")
        table = [{"N": int(n), "A_N": collective_rate(p.replace(N=int(n))).A_N, "m_final_closed": nan,
                  "m_final_approx": nan, "slope_closed": nan, "slope_approx": nan} for n in sorted(cfg.N_list)]
    cols = ScalingStudy.columns() + ["converged", "m_final_observed", "stop_reason"]
    srows = []
    for row in table:
        row.update(converged=tr.converged, m_final_observed=tr.m_final_observed, stop_reason=tr.stop_reason)
        srows.append(row)
    files.append(write_csv(out / "summary.csv", cfg, cols, srows))
    return files


SWEEP_COLUMNS = ["A_N", "A_N_adiabatic", "m_final_closed", "m_final_approx"]


def sweep_point(params: ModelParams) -> dict:
    A = collective_rate(params).A_N
    row = {"A_N": A, "A_N_adiabatic": adiabatic_rate(params)}
    try:
        f = floor_estimate(params, special=False)
        row.update(m_final_closed=f.m_final_closed, m_final_approx=f.m_final_approx)
    except NoFloorError:
        row.update(m_final_closed=float("nan"), m_final_approx=float("nan"))
    return row


def _sweep_task(args):
    params, changes = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return sweep_point(params.replace(**changes))


def run_sweep(cfg: RunConfig) -> list[Path]:
    axes = cfg.sweep_axes()
    names = [a.split(".", 1)[1] for a, _ in axes]
    grid = list(itertools.product(*(vals for _, vals in axes)))
    tasks = []
    for point in grid:
        changes = {n: (int(v) if n == "N" else v) for n, v in zip(names, point)}
        tasks.append((cfg.params, changes))
    # validate every grid point up front so errors surface before the pool starts
    for params, changes in tasks:
        params.replace(**changes)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * cfg.workers))))
    else:
        results = [_sweep_task(t) for t in tasks]
    rows = []
    for point, res in zip(grid, results):
        row = dict(zip(names, point))
        row.update(res)
        rows.append(row)
    return [write_csv(Path(cfg.out) / "sweep.csv", cfg, names + SWEEP_COLUMNS, rows)]


def run_verify(cfg: RunConfig) -> int:
    results = run_checks(include_oracle=cfg.verify_oracle, seed=cfg.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


RUNNERS = {
    "oracle": run_oracle,
    "rate": run_rate,
    "displacement": run_displacement_mode,
    "protocol": run_protocol_mode,
    "sweep": run_sweep,
}


def run(cfg: RunConfig) -> int:
    if cfg.mode == "verify":
        return run_verify(cfg)
    for path in RUNNERS[cfg.mode](cfg):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavcool", description="Collective cavity cooling simulator.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", metavar="PATH", help="key = value file with dotted keys")
    ap.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                    help="override a config key (repeatable)")
    ap.add_argument("--out", metavar="DIR", help="output directory")
    ap.add_argument("--workers", type=int, metavar="K", help="worker processes for sweep mode")
    ap.add_argument("--seed", type=int, metavar="S", help="seed for randomised scans")
    ap.add_argument("--version", action="version", version=f"cavcool {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    for flag, key in ((args.out, "out"), (args.workers, "workers"), (args.seed, "seed")):
        if flag is not None:
            overrides.append(f"{key}={flag}")
    try:
        cfg = parse_config(args.mode, path=args.config, overrides=overrides)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
