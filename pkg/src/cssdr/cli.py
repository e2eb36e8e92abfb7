"""Command-line entry point: ``cssdr fit | benchmark | simulate | asymptotics``.

Exit status is 0 on success, 1 for data or numerical failures and 2 for usage
errors (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import covariance_Lambda
from .data import DataError, load_csv, write_csv
from .evaluation import METHODS, MODELS, SimConfig, run_benchmark, simulate
from .kernels import HBasis
from .objective import FitOptions, FitReport, GBasis, fit_classical, fit_css
from .optimizer import OptimOptions

log = logging.getLogger("cssdr")

DEFAULT_SEED = 20240101
REPORT_SCHEMA = "cssdr.fit-report/1"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    response: str = "-1"
    method: str = "css-pir"
    d: int = 1
    fit: FitOptions = field(default_factory=FitOptions)
    seed: int = DEFAULT_SEED
    output: Path | None = None

    def __post_init__(self):
        if self.d < 1:
            raise UsageError(f"--d must be >= 1, got {self.d}")


def _num(x):
    """JSON-friendly floats (NaN becomes null)."""
    if isinstance(x, np.ndarray):
        return [_num(v) for v in x.tolist()] if x.ndim else _num(float(x))
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not np.isfinite(x) else float(f"{x:.17g}")
    return x


def _fit_options(a) -> FitOptions:
    optim = OptimOptions(max_iter=a.max_iter, restarts=a.restarts, seed=a.seed)
    return FitOptions(
        slices=a.slices,
        bandwidth=a.h,
        h_degree=a.h_degree,
        g_degree=a.g_degree,
        standardize=not a.raw,
        optim=optim,
    )


def _add_fit_flags(sp):
    sp.add_argument("--slices", type=int, default=10, help="number of SIR slices (default 10)")
    sp.add_argument("--h", type=float, default=0.4, help="KIR bandwidth (default 0.4)")
    sp.add_argument("--h-degree", type=int, default=2, help="polynomial degree of the PIR response basis (default 2)")
    sp.add_argument("--g-degree", type=int, default=FitOptions.g_degree,
                    help=f"total degree of the CSS feature basis (default {FitOptions.g_degree})")
    sp.add_argument("--max-iter", type=int, default=None, help="Nelder-Mead iteration cap (default 500*m)")
    sp.add_argument("--restarts", type=int, default=0, help="extra jittered optimizer starts")
    sp.add_argument("--raw", action="store_true", help="fit on centered but unscaled predictors")
    sp.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")


def _seed(a) -> int:
    if a.seed is None:
        log.info("no --seed given; using the fixed default %d", DEFAULT_SEED)
        return DEFAULT_SEED
    return a.seed


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cssdr", description="Central-solution-space dimension reduction.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="estimate a d-dimensional reduction from a CSV file")
    f.add_argument("input", type=Path)
    f.add_argument("--method", choices=METHODS, default="css-pir")
    f.add_argument("--d", type=int, default=1)
    f.add_argument("--response", default="-1", help="response column name or index (default: last)")
    f.add_argument("--output", type=Path, default=None,
                   help="text report path; a .json sidecar is written next to it (default: <input>.report.txt)")
    _add_fit_flags(f)

    b = sub.add_parser("benchmark", help="Monte Carlo accuracy of several methods on a simulated design")
    b.add_argument("--model", default="I")
    b.add_argument("--p", type=int, default=4)
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--reps", type=int, default=100)
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--methods", default="sir,css-sir,kir,css-kir,pir,css-pir",
                   help="comma-separated list drawn from " + ", ".join(METHODS))
    b.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    b.add_argument("--out-dir", type=Path, default=Path("."))
    _add_fit_flags(b)

    s = sub.add_parser("simulate", help="write one simulated data set as CSV")
    s.add_argument("output", type=Path)
    s.add_argument("--model", default="I")
    s.add_argument("--p", type=int, default=4)
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")

    a = sub.add_parser("asymptotics", help="CSS-PIR fit with plug-in standard errors")
    a.add_argument("input", type=Path)
    a.add_argument("--d", type=int, default=1)
    a.add_argument("--response", default="-1")
    a.add_argument("--output", type=Path, default=None)
    _add_fit_flags(a)
    return ap


def report_dict(rep: FitReport, ses=None, Lambda=None) -> dict:
    ds = rep.dataset
    out = {
        "schema": REPORT_SCHEMA,
        "method": rep.method,
        "d": rep.d,
        "n": ds.n if ds is not None else None,
        "p": int(rep.beta.shape[0]),
        "predictors": list(ds.names) if ds is not None else None,
        "beta_standardized": _num(rep.beta),
        "beta_original": _num(rep.beta_original),
        "phi": _num(rep.phi.phi) if rep.phi is not None else None,
        "objective": _num(rep.objective),
        "initial_objective": _num(rep.initial_objective),
        "trace": _num(list(rep.trace)),
        "converged": rep.converged,
        "angle_se": _num(ses) if ses is not None else None,
        "Lambda": _num(Lambda) if Lambda is not None else None,
        "warnings": list(rep.warnings),
    }
    return out


def _fmt_matrix(B, names) -> list[str]:
    width = max(len(n) for n in names)
    return [f"  {nm:<{width}}  " + "  ".join(f"{v:>10.5f}" for v in row) for nm, row in zip(names, B)]


def report_text(d: dict) -> str:
    lines = [f"method: {d['method']}   d = {d['d']}   n = {d['n']}   p = {d['p']}"]
    names = d["predictors"] or [f"x{k + 1}" for k in range(d["p"])]
    lines.append("directions (standardized predictors):")
    lines += _fmt_matrix(d["beta_standardized"], names)
    lines.append("directions (original predictors):")
    lines += _fmt_matrix(d["beta_original"], names)
    if d["phi"] is not None:
        lines.append("angles: " + " ".join(f"{v:.6f}" for v in d["phi"]))
        if d["angle_se"] is not None:
            lines.append("angle standard errors: " + " ".join(
                "nan" if v is None else f"{v:.6f}" for v in d["angle_se"]))
        lines.append(f"objective: {d['initial_objective']:.6g} at the classical start, "
                     f"{d['objective']:.6g} at the optimum ({len(d['trace'])} trace points)")
    for w in d["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _write_report(d: dict, path: Path) -> None:
    path.write_text(report_text(d))
    side = path.with_suffix(".json")
    side.write_text(json.dumps(d, indent=2) + "\n")
    log.info("wrote %s and %s", path, side)


def _default_output(inp: Path) -> Path:
    return inp.with_name(inp.stem + ".report.txt")


def cmd_fit(a) -> int:
    a.seed = _seed(a)
    opts = _fit_options(a)
    cfg = RunConfig("fit", a.input, a.response, a.method, a.d, opts, a.seed, a.output or _default_output(a.input))
    ds = load_csv(cfg.input, cfg.response)
    if cfg.d > ds.p:
        raise DataError(f"d = {cfg.d} exceeds the number of predictors ({ds.p})")
    if cfg.method.startswith("css-"):
        rep = fit_css(ds, cfg.method, cfg.d, cfg.fit)
    else:
        rep = fit_classical(ds, cfg.method, cfg.d, cfg.fit)
    ses = Lam = None
    if cfg.method == "css-pir" and rep.phi is not None and rep.phi.m:
        est = covariance_Lambda(rep.phi, rep.dataset, HBasis(opts.h_degree), GBasis(cfg.d, opts.g_degree, opts.g_kind))
        ses, Lam = est.per_angle_se, est.Lambda
    d = report_dict(rep, ses, Lam)
    _write_report(d, cfg.output)
    sys.stdout.write(report_text(d))
    return 0


def cmd_asymptotics(a) -> int:
    a.method = "css-pir"
    return cmd_fit(a)


def cmd_benchmark(a) -> int:
    if a.model not in MODELS:
        raise UsageError(f"unknown model {a.model!r}; valid models are {', '.join(MODELS)}")
    methods = tuple(m.strip().lower() for m in a.methods.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown method(s) {', '.join(bad)}; valid methods are {', '.join(METHODS)}")
    a.seed = _seed(a)
    cfg = SimConfig(model=a.model, p=a.p, n=a.n, replicates=a.reps, seed=a.seed, methods=methods, d=a.d,
                    fit=_fit_options(a), threads=max(1, a.threads))
    bench = run_benchmark(cfg)
    a.out_dir.mkdir(parents=True, exist_ok=True)
    stem = a.out_dir / f"bench_{a.model}_p{a.p}_n{a.n}"
    stem.with_suffix(".csv").write_text(bench.to_csv())
    text = bench.table() + "\n" + "".join(f"warning: {w}\n" for w in bench.warnings)
    stem.with_suffix(".txt").write_text(text)
    sys.stdout.write(text)
    log.info("wrote %s.csv and %s.txt", stem, stem)
    return 0


def cmd_simulate(a) -> int:
    if a.model not in MODELS:
        raise UsageError(f"unknown model {a.model!r}; valid models are {', '.join(MODELS)}")
    seed = _seed(a)
    ds = simulate(a.model, a.n, a.p, seed=seed)
    write_csv(a.output, ds)
    log.info("wrote %d x %d data set to %s", ds.n, ds.p + 1, a.output)
    return 0


COMMANDS = {"fit": cmd_fit, "benchmark": cmd_benchmark, "simulate": cmd_simulate, "asymptotics": cmd_asymptotics}


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if a.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[a.command](a)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"cssdr: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, ArithmeticError, np.linalg.LinAlgError, OSError, RuntimeError) as exc:
        print(f"cssdr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
