"""Command-line front end: ``iftrkit synth | merge-fit | eval | report``.

Every command writes machine-readable text (see :mod:`iftrkit.io`).
Commands that write an output directory also write a ``manifest.json``.

Exit codes
----------
0  all requested work completed
2  invalid command line or parameter outside its domain
3  input or output failure (missing file, malformed container, ...)
4  some configurations failed to fit; the rest were written and the
   ``status`` column of the results table says which
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .channel_lab import (PRESETS, ChannelSet, MergedConfig, cir, empirical_pdf, phase_diff_pdf,
                          sample_configs, synth_scenario)
from .core_math import DomainError
from .fading import (GtrvParams, IftrCfEvaluator, IftrParams, QuadratureError, db_to_linear,
                     gtrv_pdf, iftr_pdf_closed, iftr_pdf_quadrature, linear_to_db, von_mises_pdf)
from .fitting import (FitError, GaSettings, GtrvBounds, SearchBounds, fit_gtrv, fit_iftr,
                      fit_von_mises)
from .io import (FormatError, RunManifest, config_digest, export_channel_set_text, read_channel_set,
                 read_table, table_text, write_channel_set, write_manifest, write_table)

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_IO",
    "EXIT_PARTIAL",
    "RESULT_COLUMNS",
    "PARAMETERS",
    "main",
    "build_parser",
    "summarize",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARTIAL = 4

JOBS_ENV = "IFTRKIT_JOBS"
MULTIPATH = ("reverberation", "indoor")

RESULT_COLUMNS = (
    "scenario", "config", "pair_kind", "change",
    "first_row", "first_col", "first_azimuth", "first_roll",
    "second_row", "second_col", "second_azimuth", "second_roll",
    "model", "status", "k_db", "k", "delta", "m1", "m2", "kappa", "phi", "mse_vm",
    "omega", "mse", "rmse", "mae", "ks", "eps_n", "front_size", "generations", "evaluations",
    "message",
)
PARAMETERS = ("k_db", "delta", "m1", "m2", "kappa", "phi")


class CliError(Exception):
    """Failure reported on the error stream with a given exit code."""

    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected LO,HI")
    lo, hi = (float(p) for p in parts)
    return lo, hi


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--population", type=int, default=200)
    g.add_argument("--generations", type=int, default=400)
    g.add_argument("--elite-fraction", type=float, default=0.05)
    g.add_argument("--stall-window", type=int, default=100)
    g.add_argument("--polish", action="store_true",
                   help="refine the selected solution with a local search on the MSE")
    g.add_argument("--k-bounds", type=_pair, default=(0.0, 1000.0), metavar="LO,HI",
                   help="linear K search interval (default 0,1000)")
    g.add_argument("--delta-bounds", type=_pair, default=(0.0, 1.0), metavar="LO,HI")
    g.add_argument("--m-bounds", type=_pair, default=(0.05, 50.0), metavar="LO,HI",
                   help="search interval of both m1 and m2")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iftrkit", description="Ray-based fading model toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize the channels of a scenario")
    p.add_argument("--scenario", required=True, help=f"one of {', '.join(sorted(PRESETS))}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, type=Path, help="output directory")
    p.add_argument("--text", action="store_true", help="also write a long-format CSV export")

    p = sub.add_parser("merge-fit", help="merge channel pairs and fit a model to each")
    p.add_argument("inputs", nargs="*", type=Path,
                   help="channel-set files; if none, all scenarios are synthesized with --seed")
    p.add_argument("--configs", default="142",
                   help="number of configurations or a comma-separated list of ids (default 142)")
    p.add_argument("--model", choices=("iftr", "gtrv"), default="iftr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None,
                   help=f"concurrent fits (default from {JOBS_ENV}, else 1)")
    p.add_argument("--points", type=int, default=100, help="density grid size")
    p.add_argument("--config-file", type=Path, default=None,
                   help="JSON file with option defaults (keys as the long option names)")
    p.add_argument("-o", "--out", required=True, type=Path)
    _add_ga_flags(p)

    p = sub.add_parser("eval", help="tabulate a model density")
    p.add_argument("model", choices=("iftr", "gtrv", "vonmises"))
    p.add_argument("--k-db", type=float, default=None, help="K in dB")
    p.add_argument("--k", type=float, default=None, help="linear K (alternative to --k-db)")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument("--m2", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--r", default=None, help="comma-separated evaluation points")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; evaluation is deterministic")
    p.add_argument("-o", "--out", type=Path, default=None,
                   help="output directory (default: table on standard output)")

    p = sub.add_parser("report", help="parameter and RMSE distributions of fit results")
    p.add_argument("results", nargs="+", type=Path, help="merge-fit output directories or results.csv files")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; reports are deterministic")
    p.add_argument("-o", "--out", required=True, type=Path)
    return parser


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.scenario not in PRESETS:
        raise CliError(f"unknown scenario {args.scenario!r}; expected one of {sorted(PRESETS)}", EXIT_USAGE)
    manifest = _manifest("synth", args.seed, {"scenario": args.scenario, "seed": args.seed, "text": args.text})
    cs = synth_scenario(args.scenario, args.seed)
    outputs = [write_channel_set(args.out / f"{args.scenario}.chs", cs)]
    if args.text:
        outputs.append(export_channel_set_text(args.out / f"{args.scenario}.csv", cs))
    manifest.finish(args.out, outputs)
    write_manifest(args.out, manifest)
    print(f"wrote {len(cs)} channels x {cs.grid.n_points} points to {outputs[0]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# merge-fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _FitTask:
    scenario: str
    config: MergedConfig
    h1: np.ndarray
    h2: np.ndarray
    model: str
    settings: GaSettings
    bounds: tuple
    seed: int
    points: int


def _task_seed(seed: int, scenario: str, index: int) -> int:
    key = sum((i + 1) * ord(ch) for i, ch in enumerate(scenario))
    return int(np.random.SeedSequence([int(seed), key, int(index)]).generate_state(1)[0])


def _config_row(scenario: str, cfg: MergedConfig, model: str) -> dict:
    return {
        "scenario": scenario, "config": cfg.id, "pair_kind": cfg.pair_kind,
        "change": cfg.orientation_change, "model": model,
        "first_row": cfg.first.row, "first_col": cfg.first.col,
        "first_azimuth": cfg.first.azimuth, "first_roll": cfg.first.roll,
        "second_row": cfg.second.row, "second_col": cfg.second.col,
        "second_azimuth": cfg.second.azimuth, "second_roll": cfg.second.roll,
    }


def _run_fit(task: _FitTask):
    """Fit one configuration; returns the result row and its plot data."""
    from .channel_lab import ChannelMeta, ChannelResponse, FrequencyGrid, merge

    row = _config_row(task.scenario, task.config, task.model)
    grid = FrequencyGrid(n_points=task.h1.size)
    a = ChannelResponse(grid, task.h1, ChannelMeta.of(task.scenario, task.config.first))
    b = ChannelResponse(grid, task.h2, ChannelMeta.of(task.scenario, task.config.second))
    plots = {"pdf": [], "phase": [], "cir": []}
    try:
        h = merge(a, b)
        f_exp = empirical_pdf(h, task.points)
        phase = phase_diff_pdf(a, b)
        prof = cir(h)
        plots["phase"] = list(zip(phase.centers.tolist(), phase.density.tolist()))
        plots["cir"] = list(zip(prof.delay.tolist(), prof.magnitude.tolist()))
        if task.model == "iftr":
            bounds = SearchBounds(k=task.bounds[0], delta=task.bounds[1], m1=task.bounds[2], m2=task.bounds[2])
            res = fit_iftr(f_exp, task.settings, task.seed, bounds)
            p = res.selected
            fitted = IftrCfEvaluator(f_exp.grid, p.omega, k_max=max(p.k_factor, 1.0)).pdf(
                p.k_factor, p.delta, p.m1, p.m2)
            row.update(m1=p.m1, m2=p.m2)
        else:
            vm = fit_von_mises(phase)
            bounds = GtrvBounds(k=task.bounds[0], delta=task.bounds[1])
            res = fit_gtrv(f_exp, vm, task.settings, task.seed, bounds)
            p = res.selected
            fitted = gtrv_pdf(p, f_exp.grid, 1e-7)
            row.update(kappa=vm.kappa, phi=vm.phi, mse_vm=vm.mse)
        obj = res.selected_objectives
        row.update(status="ok", k=p.k_factor, k_db=float(linear_to_db(p.k_factor)) if p.k_factor > 0 else -math.inf,
                   delta=p.delta, omega=res.omega, mse=obj.mse, rmse=obj.rmse, mae=obj.mae, ks=obj.ks,
                   eps_n=res.epsilon_n, front_size=len(res.front), generations=res.front.generations,
                   evaluations=res.evaluations, message="")
        plots["pdf"] = list(zip(f_exp.grid.tolist(), f_exp.density.tolist(), np.asarray(fitted).tolist()))
    except (FitError, DomainError, QuadratureError, ValueError, ArithmeticError) as exc:
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
    return row, plots


def _load_config_file(args, parser_defaults: dict) -> dict:
    if args.config_file is None:
        return {}
    try:
        data = json.loads(Path(args.config_file).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read config file {args.config_file}: {exc}", EXIT_IO) from exc
    if not isinstance(data, dict):
        raise CliError("config file must hold a JSON object", EXIT_USAGE)
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in parser_defaults:
            raise CliError(f"unknown option {key!r} in config file", EXIT_USAGE)
        # command-line values win over the file
        if getattr(args, dest) == parser_defaults[dest]:
            if dest.endswith("_bounds"):
                value = tuple(float(v) for v in value)
            setattr(args, dest, value)
    return data


def _select_configs(spec: str, seed: int) -> list[MergedConfig]:
    spec = str(spec).strip()
    if spec.isdigit():
        count = int(spec)
        if count < 1:
            raise CliError("--configs must be at least 1", EXIT_USAGE)
        return sample_configs(count, seed)
    ids = [s.strip() for s in spec.split(",") if s.strip()]
    pool = {c.id: c for c in sample_configs(142, seed)}
    missing = [i for i in ids if i not in pool]
    if missing:
        raise CliError(f"unknown configuration ids {missing}", EXIT_USAGE)
    return [pool[i] for i in ids]


def _load_sets(inputs: Sequence[Path], seed: int) -> list[ChannelSet]:
    if not inputs:
        return [synth_scenario(kind, seed) for kind in ("anechoic", "reverberation", "indoor")]
    sets = []
    for path in inputs:
        try:
            sets.append(read_channel_set(path))
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
        except FormatError as exc:
            raise CliError(str(exc), EXIT_IO) from exc
    return sets


def cmd_merge_fit(args, parser_defaults: dict) -> int:
    _load_config_file(args, parser_defaults)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    if jobs < 1:
        raise CliError("--jobs must be at least 1", EXIT_USAGE)
    try:
        settings = GaSettings(population=args.population, generations=args.generations,
                              elite_fraction=args.elite_fraction, stall_window=args.stall_window,
                              polish=args.polish)
        SearchBounds(k=args.k_bounds, delta=args.delta_bounds, m1=args.m_bounds, m2=args.m_bounds)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    config = {
        "inputs": [str(p) for p in args.inputs], "configs": args.configs, "model": args.model,
        "seed": args.seed, "points": args.points, "population": args.population,
        "generations": args.generations, "elite_fraction": args.elite_fraction,
        "stall_window": args.stall_window, "polish": args.polish, "k_bounds": list(args.k_bounds),
        "delta_bounds": list(args.delta_bounds), "m_bounds": list(args.m_bounds),
    }
    manifest = _manifest("merge-fit", args.seed, config)
    configs = _select_configs(args.configs, args.seed)
    sets = _load_sets(args.inputs, args.seed)
    tasks = []
    for cs in sets:
        for i, cfg in enumerate(configs):
            tasks.append(_FitTask(cs.scenario, cfg, cs.get(cfg.first).h, cs.get(cfg.second).h, args.model,
                                  settings, (args.k_bounds, args.delta_bounds, args.m_bounds),
                                  _task_seed(args.seed, cs.scenario, i), args.points))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_fit, tasks, chunksize=1))
    else:
        outcomes = [_run_fit(t) for t in tasks]
    # order by scenario as given, then configuration id
    order = {cs.scenario: k for k, cs in enumerate(sets)}
    keyed = sorted(zip(tasks, outcomes), key=lambda to: (order[to[0].scenario], len(to[0].config.id), to[0].config.id))
    rows = [o[0] for _, o in keyed]
    out = args.out
    outputs = [write_table(out / "results.csv", RESULT_COLUMNS, [[r.get(c) for c in RESULT_COLUMNS] for r in rows])]
    pdf_rows, phase_rows, cir_rows = [], [], []
    for task, (row, plots) in keyed:
        tag = (task.scenario, task.config.id)
        pdf_rows += [tag + tuple(v) for v in plots["pdf"]]
        phase_rows += [tag + tuple(v) for v in plots["phase"]]
        cir_rows += [tag + tuple(v) for v in plots["cir"]]
    outputs.append(write_table(out / "pdf_curves.csv", ("scenario", "config", "r", "empirical", "fitted"), pdf_rows))
    outputs.append(write_table(out / "phase_pdf.csv", ("scenario", "config", "alpha", "density"), phase_rows))
    outputs.append(write_table(out / "cir.csv", ("scenario", "config", "delay_s", "magnitude"), cir_rows))
    outputs += _write_summaries(out, rows)
    failed = sum(r["status"] != "ok" for r in rows)
    status = "ok" if failed == 0 else f"partial: {failed} of {len(rows)} fits failed"
    manifest.finish(out, outputs, [p for p in args.inputs], status)
    write_manifest(out, manifest)
    n_rx = sum(c.pair_kind == "shared-rx" for c in configs)
    print(f"{len(rows)} fits over {len(sets)} scenario(s), {len(configs)} configurations "
          f"({len(configs) - n_rx} shared-tx / {n_rx} shared-rx); {failed} failed")
    for line in _median_lines(rows):
        print(line)
    return EXIT_OK if failed == 0 else EXIT_PARTIAL


# ---------------------------------------------------------------------------
# summaries and report
# ---------------------------------------------------------------------------

def _groups(rows: list[dict]) -> dict[str, list[dict]]:
    ok = [r for r in rows if r.get("status") == "ok"]
    groups: dict[str, list[dict]] = {}
    for r in ok:
        groups.setdefault(str(r["scenario"]), []).append(r)
    multi = [r for r in ok if r["scenario"] in MULTIPATH]
    if multi:
        groups["multipath"] = multi
    return groups


def _ecdf(values: Sequence[float]) -> list[tuple[float, float]]:
    v = np.sort(np.asarray([x for x in values if x is not None and np.isfinite(x)], dtype=float))
    n = v.size
    return [(float(x), (i + 1) / n) for i, x in enumerate(v)]


def summarize(rows: list[dict]) -> tuple[list, list, list]:
    """Parameter CDFs, RMSE CDFs and medians per scenario group.

    Returns row lists for ``param_cdf.csv`` (group, model, parameter,
    value, cdf), ``rmse_cdf.csv`` (group, model, value, cdf) and
    ``summary.csv`` (group, model, parameter, count, median).
    """
    param_rows, rmse_rows, median_rows = [], [], []
    for group, members in _groups(rows).items():
        models = sorted({str(r["model"]) for r in members})
        for model in models:
            sel = [r for r in members if r["model"] == model]
            for name in PARAMETERS + ("rmse",):
                vals = [r.get(name) for r in sel]
                vals = [float(v) for v in vals if v is not None and np.isfinite(float(v))]
                if not vals:
                    continue
                median_rows.append((group, model, name, len(vals), float(np.median(vals))))
                if name == "rmse":
                    rmse_rows += [(group, model, x, c) for x, c in _ecdf(vals)]
                else:
                    param_rows += [(group, model, name, x, c) for x, c in _ecdf(vals)]
    return param_rows, rmse_rows, median_rows


def _write_summaries(out: Path, rows: list[dict]) -> list[Path]:
    param_rows, rmse_rows, median_rows = summarize(rows)
    return [
        write_table(out / "param_cdf.csv", ("group", "model", "parameter", "value", "cdf"), param_rows),
        write_table(out / "rmse_cdf.csv", ("group", "model", "value", "cdf"), rmse_rows),
        write_table(out / "summary.csv", ("group", "model", "parameter", "count", "median"), median_rows),
    ]


def _median_lines(rows: list[dict]) -> list[str]:
    lines = []
    for group, model, name, count, med in summarize(rows)[2]:
        if name in ("k_db", "delta", "rmse"):
            lines.append(f"  {group:>14s} {model:>5s} median {name:<6s} {med:.6g} (n={count})")
    return lines


def _read_results(path: Path) -> list[dict]:
    if path.is_dir():
        path = path / "results.csv"
    try:
        columns, data = read_table(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    except FormatError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    missing = {"scenario", "model", "status", "rmse"} - set(columns)
    if missing:
        raise CliError(f"{path}: not a results table (missing {sorted(missing)})", EXIT_IO)
    return [dict(zip(columns, r)) for r in data]


def cmd_report(args) -> int:
    manifest = _manifest("report", args.seed, {"results": [str(p) for p in args.results]})
    rows, inputs = [], []
    for p in args.results:
        rows += _read_results(p)
        inputs.append(p / "results.csv" if p.is_dir() else p)
    outputs = _write_summaries(args.out, rows)
    manifest.finish(args.out, outputs, inputs)
    write_manifest(args.out, manifest)
    for line in _median_lines(rows):
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _eval_points(args, default_max: float) -> np.ndarray:
    if args.r is not None:
        try:
            pts = np.array([float(s) for s in args.r.split(",") if s.strip()])
        except ValueError as exc:
            raise CliError(f"invalid --r list: {exc}", EXIT_USAGE) from exc
        if pts.size == 0:
            raise CliError("--r is empty", EXIT_USAGE)
        return pts
    if args.points < 2:
        raise CliError("--points must be at least 2", EXIT_USAGE)
    lo = 0.0 if args.r_min is None else args.r_min
    hi = default_max if args.r_max is None else args.r_max
    if not hi > lo:
        raise CliError("--r-max must exceed --r-min", EXIT_USAGE)
    return np.linspace(lo, hi, args.points)


def _k_linear(args) -> float:
    if args.k_db is not None and args.k is not None:
        raise CliError("give either --k-db or --k, not both", EXIT_USAGE)
    if args.k_db is not None:
        return float(db_to_linear(args.k_db))
    return 0.0 if args.k is None else float(args.k)


def cmd_eval(args) -> int:
    try:
        if args.model == "vonmises":
            if args.kappa < 0:
                raise DomainError(f"kappa must be >= 0, got {args.kappa!r}")
            pts = _eval_points(args, math.pi) if (args.r or args.r_min is not None or args.r_max is not None) \
                else np.linspace(-math.pi, math.pi, args.points)
            columns, cols = ("alpha", "density"), [pts, von_mises_pdf(args.kappa, args.phi, pts)]
        elif args.model == "gtrv":
            p = GtrvParams(_k_linear(args), args.delta, args.kappa, args.phi, args.omega)
            pts = _eval_points(args, 3.0 * math.sqrt(args.omega))
            columns, cols = ("r", "density"), [pts, gtrv_pdf(p, pts, args.tol)]
        else:
            p = IftrParams(_k_linear(args), args.delta, args.m1, args.m2, args.omega)
            pts = _eval_points(args, 3.0 * math.sqrt(args.omega))
            quad = np.asarray(iftr_pdf_quadrature(p, pts, args.tol))
            columns, cols = ("r", "density"), [pts, quad]
            if float(p.m1).is_integer() and float(p.m2).is_integer():
                closed = np.asarray(iftr_pdf_closed(p, pts))
                columns += ("closed", "quadrature")
                cols += [closed, quad]
    except DomainError as exc:
        raise CliError(f"invalid parameter: {exc}", EXIT_USAGE) from exc
    except QuadratureError as exc:
        raise CliError(f"evaluation failed: {exc}", EXIT_PARTIAL) from exc
    rows = [tuple(float(c[i]) for c in cols) for i in range(len(pts))]
    if args.out is None:
        sys.stdout.write(table_text(columns, rows))
        return EXIT_OK
    config = {k: getattr(args, k) for k in ("model", "k_db", "k", "delta", "m1", "m2", "omega", "kappa", "phi",
                                              "r", "r_min", "r_max", "points", "tol")}
    manifest = _manifest("eval", args.seed, config)
    path = write_table(args.out / f"{args.model}_pdf.csv", columns, rows)
    manifest.finish(args.out, [path])
    write_manifest(args.out, manifest)
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _manifest(command: str, seed, config: dict) -> RunManifest:
    return RunManifest(command, seed, config, config_digest(config), __version__)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "merge-fit":
            sub = parser._subparsers._group_actions[0].choices["merge-fit"]  # type: ignore[union-attr]
            defaults = {a.dest: a.default for a in sub._actions if a.dest != "help"}
            return cmd_merge_fit(args, defaults)
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_report(args)
    except CliError as exc:
        print(f"iftrkit {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"iftrkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception:  # unexpected: keep the traceback for the user
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
