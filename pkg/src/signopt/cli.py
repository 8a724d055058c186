"""Config-driven experiment runner.

Subcommands:
  signopt run <config.json>                 one configured run
  signopt reproduce <fig3|fig4|fig5|fig6>   built-in presets
  signopt sweep <config.json> --grid <grid.json>   parameter grid

Exit codes: 0 ok, 2 configuration error, 3 numeric abort (divergence).
CSV and SVG outputs are deterministic byte streams for a fixed config:
'.' decimals, LF line endings, shortest round-trip float formatting.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import algorithms
from .algorithms import RunRecord, SimulationDiverged, run
from .analysis import AnalysisError, noise_spread_bound, verify_run
from .objective import ObjectiveError
from .presets import PRESETS, preset_runs
from .runconfig import ConfigError, RunConfig, parse_config
from .svgplot import trajectory_svg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fnum(v) -> str:
    return repr(float(v))


def atomic_write_text(path: str, text: str):
    """Write via a temp file + rename so readers never see partial files."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".signopt-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def min_gap_series(record: RunRecord):
    """max over nodes of the running-min objective, minus f* (nan without
    the oracle)."""
    if record.oracle is None:
        return np.full(record.rec_ks.shape, np.nan)
    return record.minf0.max(axis=1) - record.oracle.f_star


def run_csv_text(record: RunRecord) -> str:
    n = record.n
    header = ["k"] + [f"x_{i}" for i in range(n)] + ["v", "xbar", "d", "min_gap"]
    gaps = min_gap_series(record)
    lines = [",".join(header)]
    for r, k in enumerate(record.rec_ks):
        row = [str(int(k))]
        row += [_fnum(record.states[r, i]) for i in range(n)]
        row += [_fnum(record.v[r]), _fnum(record.xbar[r]), _fnum(record.d[r]),
                _fnum(gaps[r])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def execute_config(cfg: RunConfig) -> RunRecord:
    return run(
        cfg.problem,
        cfg.algorithm,
        cfg.schedule,
        cfg.x0,
        cfg.steps,
        record_stride=cfg.record_stride,
        noise=cfg.noise,
        activation=cfg.activation,
        config=cfg.raw,
    )


def evaluate_expectations(cfg: RunConfig, record: RunRecord, expects) -> list:
    """Turn preset expectation specs into summary pass/fail entries."""
    out = []
    star = record.oracle
    for spec in expects:
        kind = spec["kind"]
        if kind == "terminal_band":
            if star is None:
                raise AnalysisError("terminal_band needs the optimal-set oracle")
            lhs = max(star.point_distance(float(t)) for t in record.terminal_state())
            rhs = float(spec["tol"])
            out.append({"name": "terminal_band", "lhs": lhs, "rhs": rhs,
                        "pass": lhs <= rhs})
        elif kind == "terminal_band_noise":
            if star is None:
                raise AnalysisError("terminal_band_noise needs the optimal-set oracle")
            rhs = noise_spread_bound(cfg.problem, cfg.noise) + float(spec["extra"])
            lhs = max(star.point_distance(float(t)) for t in record.terminal_state())
            out.append({"name": "terminal_band_noise", "lhs": lhs, "rhs": rhs,
                        "pass": lhs <= rhs})
        elif kind == "terminal_v_below":
            out.append({"name": "terminal_v_below", "lhs": record.terminal_v(),
                        "rhs": float(spec["tol"]),
                        "pass": record.terminal_v() <= float(spec["tol"])})
        elif kind == "terminal_v_above":
            out.append({"name": "terminal_v_above", "lhs": float(spec["tol"]),
                        "rhs": record.terminal_v(),
                        "pass": record.terminal_v() > float(spec["tol"])})
        elif kind == "bound":
            reports = verify_run(cfg.problem, record, [spec["name"]], noise=cfg.noise)
            for rep in reports:
                out.append({"name": rep.bound_name, "lhs": float(rep.lhs.max()),
                            "rhs": float(rep.rhs.min()), "pass": rep.passed})
        else:
            raise AnalysisError(f"unknown expectation {kind!r}")
    return out


def _run_summary(cfg: RunConfig, record: RunRecord) -> dict:
    gaps = min_gap_series(record)
    return {
        "algorithm": cfg.algorithm,
        "lambda": cfg.problem.lam,
        "lambda_bound": cfg.lam_bound,
        "steps": record.steps,
        "terminal": [float(t) for t in record.terminal_state()],
        "terminal_v": record.terminal_v(),
        "terminal_d": float(record.d[-1]),
        "min_gap": float(gaps[-1]),
        "max_d_tail": record.max_d_tail,
        "optimal_set": (None if record.oracle is None else
                        [record.oracle.lo, record.oracle.hi, record.oracle.f_star]),
    }


def write_run_outputs(cfg: RunConfig, record: RunRecord, reports, title: str):
    outs = cfg.outputs
    if "csv" in outs:
        atomic_write_text(outs["csv"], run_csv_text(record))
    if "svg" in outs:
        band = None if record.oracle is None else (record.oracle.lo, record.oracle.hi)
        atomic_write_text(outs["svg"], trajectory_svg(
            record.rec_ks, record.states, cfg.svg_size[0], cfg.svg_size[1],
            band=band, title=title,
        ))
    if "report" in outs:
        doc = {
            "summary": _run_summary(cfg, record),
            "bounds": [rep.to_dict() for rep in reports],
        }
        atomic_write_text(outs["report"], json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    cfg = parse_config(raw)
    record = execute_config(cfg)
    reports = verify_run(cfg.problem, record, cfg.bounds, noise=cfg.noise) if cfg.bounds else []
    write_run_outputs(cfg, record, reports, title=os.path.basename(args.config))
    summary = _run_summary(cfg, record)
    print(f"run ok: algorithm={summary['algorithm']} lambda={summary['lambda']:g} "
          f"steps={summary['steps']} terminal_v={summary['terminal_v']:.6g}")
    for rep in reports:
        print(f"bound {rep.bound_name}: "
              f"{'n/a' if rep.passed is None else ('pass' if rep.passed else 'FAIL')}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    entries = []
    bound_rows = ["bound_name,k,lhs,rhs,margin,pass"]
    for item in preset_runs(args.preset, seed=args.seed):
        label = item["label"]
        cfg = parse_config(item["config"])
        record = execute_config(cfg)
        reports = (verify_run(cfg.problem, record, cfg.bounds, noise=cfg.noise)
                   if cfg.bounds else [])
        expectations = evaluate_expectations(cfg, record, item["expect"])
        base = os.path.join(outdir, f"{args.preset}_{label}")
        atomic_write_text(base + ".csv", run_csv_text(record))
        band = None if record.oracle is None else (record.oracle.lo, record.oracle.hi)
        atomic_write_text(base + ".svg", trajectory_svg(
            record.rec_ks, record.states, cfg.svg_size[0], cfg.svg_size[1],
            band=band, title=f"{args.preset} {label}",
        ))
        for rep in reports:
            for name, k, lhs, rhs, margin, ok in rep.csv_rows():
                bound_rows.append(f"{label}:{name},{k},{lhs!r},{rhs!r},{margin!r},{ok}")
        entries.append({
            "label": label,
            "summary": _run_summary(cfg, record),
            "expectations": expectations,
            "bounds": [rep.to_dict() for rep in reports],
        })
        status = all(e["pass"] for e in expectations) if expectations else True
        print(f"{args.preset} {label}: {'pass' if status else 'FAIL'} "
              f"(terminal_v={record.terminal_v():.6g})")
    atomic_write_text(
        os.path.join(outdir, f"{args.preset}_report.json"),
        json.dumps({"figure": args.preset, "seed": args.seed, "runs": entries},
                   indent=2, sort_keys=True) + "\n",
    )
    atomic_write_text(os.path.join(outdir, f"{args.preset}_bounds.csv"),
                      "\n".join(bound_rows) + "\n")
    return EXIT_OK


def _sweep_combo(base_raw: dict, lam, rho, seed):
    raw = json.loads(json.dumps(base_raw))  # deep copy
    if lam is not None:
        raw["lambda"] = lam
    if rho is not None:
        raw["schedule"] = {"constant": rho}
    if seed is not None:
        if "noise" in raw:
            raw["noise"]["seed"] = seed
        if "activation" in raw:
            raw["activation"]["seed"] = seed
    return raw


def _sweep_worker(task):
    idx, raw, band_tol = task
    cfg = parse_config(raw)
    row = {
        "lambda": cfg.problem.lam,
        "rho": cfg.schedule.rho_at(1),
        "seed": (cfg.noise.seed if cfg.noise else
                 cfg.activation.seed if cfg.activation else ""),
        "above_bound": "" if cfg.lam_bound is None else
                       str(cfg.problem.lam > cfg.lam_bound).lower(),
    }
    try:
        record = execute_config(cfg)
    except SimulationDiverged:
        row.update({"terminal_v": "nan", "terminal_d": "nan", "min_gap": "nan",
                    "in_band": "", "diverged": "true"})
        return idx, row
    gaps = min_gap_series(record)
    star = record.oracle
    in_band = ""
    if star is not None:
        worst = max(star.point_distance(float(t)) for t in record.terminal_state())
        in_band = str(worst <= band_tol).lower()
    row.update({
        "terminal_v": _fnum(record.terminal_v()),
        "terminal_d": _fnum(record.d[-1]),
        "min_gap": _fnum(gaps[-1]),
        "in_band": in_band,
        "diverged": "false",
    })
    return idx, row


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        base_raw = json.load(fh)
    with open(args.grid) as fh:
        grid = json.load(fh)
    if not isinstance(grid, dict):
        raise ConfigError("grid", "grid file must be a JSON object")
    lams = grid.get("lambda", [None])
    rhos = grid.get("rho", [None])
    seeds = grid.get("seeds", [None])
    band_tol = float(base_raw.get("band_tol", 0.05))

    tasks = []
    for idx, (lam, rho, seed) in enumerate(itertools.product(lams, rhos, seeds)):
        tasks.append((idx, _sweep_combo(base_raw, lam, rho, seed), band_tol))

    workers = os.environ.get("SIGNOPT_THREADS")
    workers = int(workers) if workers else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(tasks)))
    if workers == 1:
        results = [_sweep_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    results.sort(key=lambda r: r[0])

    cols = ["lambda", "rho", "seed", "terminal_v", "terminal_d", "min_gap",
            "above_bound", "in_band", "diverged"]
    lines = [",".join(cols)]
    for _, row in results:
        lines.append(",".join(str(row[c]) for c in cols))
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"sweep ok: {len(results)} runs -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="signopt",
        description="Simulate distributed optimization with sign-only state exchange",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("config", help="path to the run config JSON")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("reproduce", help="run a built-in experiment preset")
    p_rep.add_argument("preset", choices=PRESETS)
    p_rep.add_argument("--out", default="reproduce_out", help="output directory")
    p_rep.add_argument("--seed", type=int, default=0,
                       help="noise/activation seed for the stochastic presets")
    p_rep.set_defaults(func=cmd_reproduce)

    p_sw = sub.add_parser("sweep", help="run a parameter grid")
    p_sw.add_argument("config", help="base run config JSON")
    p_sw.add_argument("--grid", required=True, help="grid JSON (lambda/rho/seeds lists)")
    p_sw.add_argument("--out", default="sweep_summary.csv", help="summary CSV path")
    p_sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AnalysisError, algorithms.AlgorithmError, ObjectiveError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationDiverged as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
