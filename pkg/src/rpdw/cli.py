"""
Command-line entry point.

Each subcommand writes ``<command>.csv`` (17 significant digits, header row)
and ``<command>.json`` (resolved configuration, version, timing, summary)
into the output directory. Exit status: 0 success, 1 validation failure,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, ExperimentConfig, load_json, resolve, set_path
from .data import make_data
from .errors import ConfigError, DivergentIntegralError, QuadratureError
from .experiments import (
    blowup_functionals,
    critical_scan,
    functional_trend,
    lifespan_sweep,
    linear_decay_experiment,
    TestFunctionConfig,
)
from .grid import ProblemParams, make_grid
from .kernel import kernel_table
from .oracle import hankel_pm_norm_samples, lemma_b1_ratio, lemma_b2_check
from .riesz import EXACT_ZERO, RieszMode
from .solver import SERIES_COLUMNS, RunStatus, SolverConfig, run

log = logging.getLogger("rpdw")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def fmt(x) -> str:
    """CSV cell: floats with 17 significant digits, everything else as text."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# builders shared by the solver-backed commands
# ---------------------------------------------------------------------------


def build_params(cfg: ExperimentConfig, **over) -> ProblemParams:
    pr = {**cfg["problem"], **over}
    return ProblemParams(n=pr["n"], p=pr["p"], gamma=pr["gamma"], q=pr["q"], epsilon=pr["epsilon"], s=pr["s"])


def build_riesz(cfg: ExperimentConfig, grid) -> RieszMode:
    so = cfg["solver"]
    if so["riesz"] == "exact_zero":
        return EXACT_ZERO
    if so["mu"] is None:
        return RieszMode.default_regularized(grid)
    return RieszMode.regularized(so["mu"])


def build_run_inputs(cfg: ExperimentConfig, snapshot_every=None):
    pr = cfg["problem"]
    grid = make_grid(pr["n"], cfg["grid"]["N"], float(cfg["grid"]["L"]))
    d = cfg["data"]
    kind = d["kind"]
    if kind == "bracket":
        u0 = make_data(grid, "bracket", q=pr["q"], cutoff=d["cutoff"], l2=d["l2"])
    elif kind == "gaussian":
        u0 = make_data(grid, "gaussian", width=d["width"])
    else:
        u0 = make_data(grid, "zero")
    so = cfg["solver"]
    sc = SolverConfig(
        h=so["h"],
        T=so["T"],
        params=build_params(cfg),
        riesz=build_riesz(cfg, grid),
        blowup_factor=so["blowup_factor"],
        record_every=so["record_every"],
        linear_only=so["linear_only"],
        snapshot_every=snapshot_every,
        oversample=so["oversample"],
    )
    return grid, u0, u0, sc


# ---------------------------------------------------------------------------
# commands: each returns (header, rows, summary)
# ---------------------------------------------------------------------------


def cmd_kernel_table(cfg):
    k = cfg["kernel"]
    rows = kernel_table(k["t"], k["r"])
    return ("t", "r", "k_hat", "dk_hat", "g0_hat"), rows, {"rows": len(rows)}


def cmd_linear_decay(cfg):
    pr, d = cfg["problem"], cfg["decay"]
    times = np.logspace(math.log10(d["t_min"]), math.log10(d["t_max"]), d["count"])
    rep = linear_decay_experiment(pr["n"], pr["q"], pr["s"], d["j"], times=times)
    rows = list(zip(rep.times, rep.values))
    summary = {"slope": rep.slope, "target": rep.target, "gap": rep.gap, "residual": rep.residual}
    return ("t", "norm"), rows, summary


def cmd_lemma_check(cfg):
    lm = cfg["lemma"]
    rows = []
    gl = lm["gaussian"]
    for g in gl["gamma"]:
        for n in gl["n"]:
            for t in gl["t"]:
                rows.append(("gaussian_low", g, n, t, lemma_b1_ratio(t, g, gl["c"], gl["eps_cut"], n), ""))
    cv = lm["convolution"]
    for a, b in cv["pairs"]:
        for t in cv["t"]:
            res = lemma_b2_check(a, b, t)
            rows.append(("convolution", a, b, t, res.ratio, res.branch))
    hk = lm["hankel"]
    xi = np.logspace(math.log10(hk["xi_min"]), math.log10(hk["xi_max"]), hk["count"])
    pr = cfg["problem"]
    samples = hankel_pm_norm_samples(pr["q"], pr["n"], xi)
    for s in samples:
        rows.append(("hankel", pr["q"], pr["n"], s.xi, s.value, "converged" if s.converged else "unconverged"))
    vals = [s.value for s in samples]
    summary = {
        "hankel_max": max(vals),
        "hankel_min": min(vals),
        "hankel_all_finite": bool(all(math.isfinite(v) for v in vals)),
        "hankel_all_converged": bool(all(s.converged for s in samples)),
    }
    return ("check", "a", "b", "t", "value", "note"), rows, summary


def cmd_evolve(cfg):
    grid, u0, u1, sc = build_run_inputs(cfg)
    res = run(u0, u1, sc)
    rows = [tuple(getattr(s, c) for c in SERIES_COLUMNS) for s in res.series]
    summary = {
        "status": res.status.value,
        "blowup_bracket": res.blowup_bracket,
        "t_num": res.t_num,
        "step_count": res.step_count,
        "max_imag_ratio": res.max_imag_ratio,
        "warnings": res.warnings,
    }
    if res.status is RunStatus.NON_FINITE and res.step_count == 0:
        raise FloatingPointError("solution not finite at the first step")
    return SERIES_COLUMNS, rows, summary


def cmd_lifespan_sweep(cfg):
    grid, u0, u1, sc = build_run_inputs(cfg)
    sw = lifespan_sweep(u0, u1, cfg["sweep"]["eps_list"], sc)
    rows = [(r.epsilon, r.t_low, r.t_high, r.status.value) for r in sw.rows]
    summary = {
        "status": sw.status.value,
        "fitted_exponent": sw.fitted_exponent,
        "theory_exponent": sw.theory_exponent,
        "gap": sw.relative_gap,
        "exponent_uncertainty": sw.exponent_uncertainty,
        "strictly_monotone": sw.strictly_monotone,
        "warnings": sw.warnings,
    }
    return ("epsilon", "T_low", "T_high", "status"), rows, summary


def cmd_critical_scan(cfg):
    grid, u0, u1, sc = build_run_inputs(cfg)
    scan = critical_scan(u0, u1, cfg["sweep"]["p_list"], sc)
    rows = [(r.p, r.label.value, r.t_num, r.l2_final, r.flagged) for r in scan.rows]
    summary = {
        "p_crit": scan.p_crit,
        "flip_bracket": scan.flip_bracket,
        "brackets_p_crit": scan.brackets_p_crit,
        "monotone": scan.monotone,
    }
    return ("p", "class", "T_num", "l2_final", "flagged"), rows, summary


def cmd_blowup_functional(cfg):
    f = cfg["functional"]
    h = cfg["solver"]["h"]
    every = max(1, int(math.floor(f["snapshot_cadence"] / h + 1e-9)))
    grid, u0, u1, sc = build_run_inputs(cfg, snapshot_every=every)
    res = run(u0, u1, sc)
    eps = sc.params.epsilon
    rows_f = [
        blowup_functionals(
            grid, res.snapshot_times, res.snapshots, u0 * eps, u1 * eps, sc.params,
            TestFunctionConfig(R, sc.params.p, n=grid.n),
        )
        for R in f["R_list"]
    ]
    trend = functional_trend(rows_f, sc.params)
    rows = [(r.R, r.J, r.data_term, r.rhs_term, d) for r, d in zip(trend.rows, trend.deficits)]
    summary = {
        "status": res.status.value,
        "blowup_bracket": res.blowup_bracket,
        "data_exponent": trend.data_exponent,
        "q": sc.params.q,
        "constant": trend.constant,
    }
    return ("R", "J", "data_term", "rhs_term", "deficit"), rows, summary


HANDLERS = {
    "kernel-table": cmd_kernel_table,
    "linear-decay": cmd_linear_decay,
    "lemma-check": cmd_lemma_check,
    "evolve": cmd_evolve,
    "lifespan-sweep": cmd_lifespan_sweep,
    "critical-scan": cmd_critical_scan,
    "blowup-functional": cmd_blowup_functional,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# flag name -> (dotted config path, type)
FLAG_PATHS = {
    "n": ("problem.n", int),
    "p": ("problem.p", float),
    "gamma": ("problem.gamma", float),
    "q": ("problem.q", float),
    "epsilon": ("problem.epsilon", float),
    "s": ("problem.s", float),
    "N": ("grid.N", int),
    "L": ("grid.L", float),
    "h": ("solver.h", float),
    "T": ("solver.T", float),
    "riesz": ("solver.riesz", str),
    "mu": ("solver.mu", float),
    "record_every": ("solver.record_every", int),
    "linear_only": ("solver.linear_only", None),
    "data": ("data.kind", str),
    "t": ("kernel.t", _floats),
    "r": ("kernel.r", _floats),
    "j": ("decay.j", int),
    "eps_list": ("sweep.eps_list", _floats),
    "p_list": ("sweep.p_list", _floats),
    "R_list": ("functional.R_list", _floats),
    "seed": ("seed", int),
    "output_dir": ("output_dir", str),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rpdw", description=__doc__.strip().splitlines()[0])
    ap.add_argument("--version", action="version", version=f"rpdw {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file; flags override it")
        sp.add_argument("-v", "--verbose", action="store_true")
        for flag, (_, typ) in FLAG_PATHS.items():
            opt = "--" + flag.replace("_", "-")
            if typ is None:
                sp.add_argument(opt, dest=flag, action="store_true", default=None)
            else:
                sp.add_argument(opt, dest=flag, type=typ, default=None)
    return ap


def load_config(args) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        raw = load_json(text)
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        raw.pop("command", None)
    for flag, (path, _) in FLAG_PATHS.items():
        val = getattr(args, flag, None)
        if val is not None:
            set_path(raw, path, val)
    return resolve(raw, args.command)


def run_command(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_INVALID
    for note in cfg.notes:
        log.warning(note)

    out_dir = Path(cfg.output_dir)
    start = time.perf_counter()
    started = datetime.now(timezone.utc).isoformat()
    try:
        header, rows, summary = HANDLERS[cfg.command](cfg)
    except (DivergentIntegralError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    elapsed = time.perf_counter() - start

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = cfg.command
    write_csv(out_dir / f"{stem}.csv", header, rows)
    meta = {
        "config": cfg.to_json(),
        "version": __version__,
        "started_utc": started,
        "wall_clock_seconds": elapsed,
        "notes": list(cfg.notes),
        "summary": summary,
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    if cfg.command == "lifespan-sweep":
        write_csv(
            out_dir / f"{stem}_summary.csv",
            ("fitted_exponent", "theory_exponent", "gap"),
            [(summary["fitted_exponent"], summary["theory_exponent"], summary["gap"])],
        )
    print(json.dumps(_jsonable(summary), sort_keys=True))
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
