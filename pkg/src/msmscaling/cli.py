"""Command line interface: ``msmscaling {simulate,estimate,scaling,mc-compare}``.

Settings come from built-in defaults, then an optional JSON config file
(``--config`` or the ``MSMSCALING_CONFIG`` environment variable), then
command line flags; later sources win.

Exit codes: 0 success, 2 invalid arguments or parameters, 3 input/output
failure (unreadable or malformed files), 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .data import load_csv, standardize, to_returns
from .exceptions import DomainError, MsmError, ParseError
from .model import MsmParams, simulate
from .moments import GmmConfig, gmm_estimate
from .montecarlo import McConfig, run_ensemble, scaling_statistics
from .scaling import DEFAULT_LO_TAUS, DEFAULT_TAU_MAX, ghe_averaged, lo_statistics

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4
CONFIG_ENV = "MSMSCALING_CONFIG"

DEFAULTS = {
    "transform": "log",
    "column": None,
    "k": [5, 10, 15, 20],
    "tau": list(DEFAULT_LO_TAUS),
    "tau_max": list(DEFAULT_TAU_MAX),
    "q": [1.0, 2.0],
    "mode": "integrated",
    "reps_ghe": 100,
    "reps_lo": 1000,
    "seed": 0,
    "T": None,
    "jobs": 1,
    "format": "csv",
    "lo_lag_zero": True,
    "rejection_tail": "upper",
    "standardize": True,
    "gmm": {},
}

log = logging.getLogger("msmscaling")


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _tau_max(text: str) -> list[int]:
    """``5-19`` or ``5,10,19``."""
    if "-" in text:
        lo, _, hi = text.partition("-")
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    return _int_list(text)


def _add_common(p: argparse.ArgumentParser, *, series: bool = True) -> None:
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--out", help="output file (directory for mc-compare); stdout if omitted")
    if series:
        p.add_argument("--input", required=True, help="CSV file with a price or rate column")
        p.add_argument("--column", help="value column name or 0-based index (default: last)")
        p.add_argument("--transform", choices=["log", "diff"], default=None)


def _add_scaling_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=_int_list, help="Lo truncation lags, e.g. 0,5,10,25,50,100")
    p.add_argument("--tau-max", dest="tau_max", type=_tau_max, help="GHE fit ranges, e.g. 5-19")
    p.add_argument("--q", type=_float_list, help="GHE moment orders, e.g. 1,2")
    p.add_argument("--mode", choices=["integrated", "raw"], default=None)
    p.add_argument(
        "--lo-form", choices=["lag-zero", "textbook"], default=None,
        help="Lo long-run variance: textbook Bartlett sum, or with the extra lag-0 term (default)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msmscaling", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one MSM return series")
    _add_common(p, series=False)
    p.add_argument("--m0", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--T", type=int, default=9372)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=0)
    p.add_argument("--gamma-k", dest="gamma_k", type=float, default=0.5)
    p.add_argument("--b", type=float, default=2.0)

    p = sub.add_parser("estimate", help="GMM estimates of (m0, sigma) for each k")
    _add_common(p)
    p.add_argument("--k", type=_int_list)
    p.add_argument("--lags", type=_int_list, help="moment lags (default 1,5,10,20)")
    p.add_argument("--no-standardize", dest="standardize", action="store_false", default=None)

    p = sub.add_parser("scaling", help="GHE and Lo statistics of one series")
    _add_common(p)
    _add_scaling_flags(p)

    p = sub.add_parser("mc-compare", help="fit MSM per k and compare scaling with simulations")
    _add_common(p)
    _add_scaling_flags(p)
    p.add_argument("--k", type=_int_list)
    p.add_argument("--reps", type=int, help="replications for both GHE and Lo ensembles")
    p.add_argument("--seed", type=int)
    p.add_argument("--T", type=int, help="simulated path length (default: length of the input)")
    p.add_argument("--jobs", type=int)
    p.add_argument("--no-standardize", dest="standardize", action="store_false", default=None)
    return parser


def load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    unknown = set(cfg) - set(DEFAULTS) - {"reps", "lags"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    settings = dict(DEFAULTS)
    settings.update(load_config(args.config))
    flags = {k: v for k, v in vars(args).items() if v is not None}
    settings.update(flags)
    if "reps" in settings:
        settings["reps_ghe"] = settings["reps_lo"] = settings.pop("reps")
    if "lo_form" in settings:
        settings["lo_lag_zero"] = settings.pop("lo_form") == "lag-zero"
    if "lags" in settings:
        settings["gmm"] = {**settings["gmm"], "lags": settings.pop("lags")}
    if isinstance(settings.get("column"), str) and settings["column"].isdigit():
        settings["column"] = int(settings["column"])
    for key in ("command", "config", "out", "verbose", "input"):
        settings.pop(key, None)
    return settings


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_returns(args, settings):
    prices = load_csv(args.input, column=settings["column"])
    r = to_returns(prices, settings["transform"])
    return standardize(r) if settings["standardize"] else r


def _mc_config(settings, T) -> McConfig:
    if settings["reps_ghe"] < 1 or settings["reps_lo"] < 1:
        raise UsageError("--reps must be at least 1")
    return McConfig(
        n_reps_ghe=settings["reps_ghe"],
        n_reps_lo=settings["reps_lo"],
        T=T,
        k_set=tuple(settings["k"]),
        tau_set=tuple(settings["tau"]),
        q_set=tuple(settings["q"]),
        tau_max_set=tuple(settings["tau_max"]),
        ghe_mode=settings["mode"],
        lo_lag_zero=settings["lo_lag_zero"],
        rejection_tail=settings["rejection_tail"],
        master_seed=settings["seed"],
        n_jobs=settings["jobs"],
    )


def cmd_simulate(args) -> int:
    settings = resolve(args)
    params = MsmParams(args.m0, args.sigma, args.k, args.gamma_k, args.b)
    series = simulate(params, args.T, seed=args.seed, burn_in=args.burn_in)
    meta = report.metadata("simulate", settings, seed=args.seed)
    rows = [{"return": float(v)} for v in series.values]
    _emit(report.render(rows, meta, settings["format"]), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    settings = resolve(args)
    r = _load_returns(args, settings)
    cfg = GmmConfig.from_dict(settings["gmm"])
    results = [gmm_estimate(r, k, config=cfg) for k in settings["k"]]
    meta = report.metadata("gmm", settings)
    _emit(report.render(report.gmm_table(r.label, results), meta, settings["format"]), args.out)
    return EXIT_OK


def cmd_scaling(args) -> int:
    settings = resolve(args)
    r = _load_returns(args, settings)
    if len(r) <= max(settings["tau_max"]):
        raise DomainError(f"series of length {len(r)} shorter than largest tau_max {max(settings['tau_max'])}")
    rows = []
    for q in settings["q"]:
        g = ghe_averaged(r, q, settings["tau_max"], settings["mode"])
        rows.append({"series": r.label, "statistic": "ghe", "q": q, "tau": None, "value": g.h, "std": g.h_std})
    for res in lo_statistics(np.abs(r.values), settings["tau"], lag_zero=settings["lo_lag_zero"]):
        base = {"series": r.label, "q": None, "tau": res.tau, "std": None}
        rows.append({**base, "statistic": "lo_v", "value": res.v_stat})
        rows.append({**base, "statistic": "lo_h", "value": res.h})
    meta = report.metadata("scaling", settings)
    _emit(report.render(rows, meta, settings["format"]), args.out)
    return EXIT_OK


def cmd_mc_compare(args) -> int:
    settings = resolve(args)
    r = _load_returns(args, settings)
    config = _mc_config(settings, settings["T"] or len(r))
    gmm_cfg = GmmConfig.from_dict(settings["gmm"])
    fits = [gmm_estimate(r, k, config=gmm_cfg) for k in config.k_set]
    params = {f.k: MsmParams(f.m0_hat, f.sigma_hat, f.k, gmm_cfg.gamma_k, gmm_cfg.b) for f in fits}
    ensemble = run_ensemble(params, config)
    empirical = scaling_statistics(r, config)

    label, fmt = r.label, settings["format"]
    tables = {
        "gmm": report.gmm_table(label, fits),
        "ghe": report.ghe_table(label, empirical, ensemble),
        "lo_v": report.lo_v_table(label, empirical, ensemble),
        "lo_rejections": report.rejection_rows(label, ensemble),
        "lo_h": report.lo_h_table(label, empirical, ensemble),
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in tables.items():
            report.write(rows, report.metadata(name, settings, config.master_seed), out / f"{name}.{fmt}", fmt)
    else:
        for name, rows in tables.items():
            sys.stdout.write(report.render(rows, report.metadata(name, settings, config.master_seed), fmt))
            sys.stdout.write("\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "scaling": cmd_scaling,
    "mc-compare": cmd_mc_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"msmscaling: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, json.JSONDecodeError) as exc:
        print(f"msmscaling: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MsmError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"msmscaling: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
