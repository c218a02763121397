"""Command-line front end.

Exit codes: 0 success, 1 numeric failure, 2 invalid input.
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .forecast import adjusted_portmanteau, cmpe, forecast, mrss, portmanteau
from .icls import icls_fit
from .io import (
    ensure_dir,
    read_params_json,
    read_series_csv,
    write_json,
    write_rows_csv,
    write_series_csv,
)
from .order import select_order
from .process import NonStationaryError, check_stationary, cross_acf, simulate
from .proj import proj_fit
from .replicate import replicate_estimation, replicate_order
from .results import _jsonable
from .scenarios import ScenarioUnavailable, get_scenario, random_params

EXIT_OK, EXIT_NUMERIC, EXIT_INVALID = 0, 1, 2


class UsageError(ValueError):
    pass


def version_string():
    """Package version, suffixed with ``git describe`` output when available."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _config(args):
    skip = {"func", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _meta(args):
    cfg = _config(args)
    # the output location does not change results, so it stays out of the hash
    hashed = {k: v for k, v in cfg.items() if k != "out"}
    blob = json.dumps(hashed, sort_keys=True, default=str).encode()
    return {
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "version": version_string(),
        "config": cfg,
        "config_hash": hashlib.sha256(blob).hexdigest(),
    }


def _load_params(args):
    if args.params and args.scenario:
        raise UsageError("give either --params or --scenario, not both")
    if args.params:
        return read_params_json(args.params)
    if args.scenario:
        if args.scenario.lower() == "random":
            return random_params(args.p or 1, seed=args.seed)
        return get_scenario(args.scenario)
    raise UsageError("one of --params or --scenario is required")


def _load_series(args):
    if not args.data:
        raise UsageError("--data is required")
    Y = read_series_csv(args.data)
    if args.train is not None:
        if not 1 <= args.train <= Y.shape[0]:
            raise UsageError(f"--train must lie in [1, {Y.shape[0]}]")
    return Y


def _check_inputs(args):
    for name in ("data", "params"):
        path = getattr(args, name, None)
        if path and not Path(path).is_file():
            raise UsageError(f"--{name.replace('_', '-')}: no such file {path}")
    if getattr(args, "T", None) is not None and any(t < 1 for t in np.atleast_1d(args.T)):
        raise UsageError("--T must be positive")
    out = ensure_dir(args.out)
    if not os.access(out, os.W_OK):
        raise UsageError(f"--out: directory {out} is not writable")
    return out


def _fit(Y, p, method):
    if method == "proj":
        return proj_fit(Y, p)
    if method == "icls":
        return icls_fit(Y, p, init=proj_fit(Y, p, se="none"))
    raise UsageError(f"unknown method {method!r}")


def _portmanteau(params, Y, resid, max_lag, test):
    lag = min(max_lag, resid.shape[0] - 1)
    if test == "adjusted":
        return adjusted_portmanteau(params, Y, resid, max_lag=lag)
    return portmanteau(resid, max_lag=lag)


def _portmanteau_rows(table):
    return [(int(l), float(s), float(d), float(pv))
            for l, s, d, pv in zip(table["lag"], table["stat"], table["df"], table["p_value"])]


def cmd_simulate(args, out):
    params = _load_params(args)
    stat = check_stationary(params)
    if not stat["stationary"] and not args.force_nonstationary:
        raise NonStationaryError(
            f"spectral radius {stat['radius']:.6g} >= 1; pass --force-nonstationary to simulate anyway"
        )
    T = args.T[0]
    Y = simulate(params, T, burn_in=args.burn_in, seed=args.seed, force=args.force_nonstationary)
    write_series_csv(out / "series.csv", Y)
    write_json(out / "params.json", params.to_dict())
    report = {**_meta(args), "radius": stat["radius"], "stationary": stat["stationary"],
              "T": T, "shape": list(Y.shape[1:])}
    if args.acf_lags:
        acf = cross_acf(Y, min(args.acf_lags, T - 1))
        rows = [(h, a + 1, b + 1, float(acf[h, a, b]))
                for h in range(acf.shape[0]) for a in range(acf.shape[1]) for b in range(acf.shape[2])]
        write_rows_csv(out / "cross_acf.csv", ["lag", "component_a", "component_b", "acf"], rows)
    write_json(out / "simulate.json", report)
    print(f"spectral radius: {stat['radius']:.6f}")
    print(f"wrote {T} x {Y.shape[1]} x {Y.shape[2]} series to {out / 'series.csv'}")


def _order_for(args, Y):
    if args.p is not None:
        return args.p, None
    sel = select_order(Y, args.p_bar, method=args.method)
    return sel.p_hat, sel


def cmd_fit(args, out):
    Y = _load_series(args)
    Yfit = Y if args.train is None else Y[:args.train]
    p, sel = _order_for(args, Yfit)
    fit = _fit(Yfit, p, args.method)
    doc = {**_meta(args), "fit": fit.to_dict()}
    if sel is not None:
        doc["order_selection"] = sel.to_dict()
    doc["portmanteau"] = _jsonable(_portmanteau(fit.params, Yfit, fit.residuals, args.max_lag, args.test))
    write_json(out / "fit.json", doc)
    write_json(out / "fitted_params.json", fit.params.to_dict())
    print(f"{args.method} fit with p={p} on T={Yfit.shape[0]}; residual sum of squares {fit.rss():.6g}")
    if fit.info.get("converged") is False:
        print("warning: ICLS did not converge", file=sys.stderr)


def cmd_select_order(args, out):
    Y = _load_series(args)
    if args.train is not None:
        Y = Y[:args.train]
    sel = select_order(Y, args.p_bar, method=args.method)
    write_json(out / "order.json", {**_meta(args), **sel.to_dict()})
    write_rows_csv(out / "ic_curve.csv", ["p_tilde", "ic1"], sel.curve_rows())
    for flag in sel.flags:
        print(f"warning: {flag}", file=sys.stderr)
    print(f"selected p = {sel.p_hat}")


def cmd_forecast(args, out):
    params = read_params_json(args.params) if args.params else None
    if params is None:
        raise UsageError("--params is required")
    Y = _load_series(args)
    origin = Y.shape[0] if args.train is None else args.train
    H = args.horizon
    path = forecast(params, Y[:origin], H)
    doc = {**_meta(args), "origin": origin, "horizon": H, "forecast": path.mean.tolist(),
           "rounded": path.rounded(args.rounding).tolist()}
    if origin < Y.shape[0]:
        if origin + H > Y.shape[0]:
            raise UsageError(f"horizon {H} exceeds the {Y.shape[0] - origin} held-out observations")
        curve = cmpe(params, Y, origin, H)
        doc["cmpe"] = curve.tolist()
        doc["mspe"] = float(curve[-1])
        _write_cmpe(out, curve)
    rows = [(h + 1, i + 1, j + 1, float(path.mean[h, i, j]))
            for h in range(H) for i in range(params.m) for j in range(params.n)]
    write_rows_csv(out / "forecast.csv", ["h", "row", "col", "mean"], rows)
    write_json(out / "forecast.json", doc)
    print(f"forecast {H} steps from origin {origin}")


def _write_cmpe(out, curve):
    rows = [(s, float(c), float(np.log(c)) if c > 0 else float("-inf"))
            for s, c in enumerate(curve, start=1)]
    write_rows_csv(out / "cmpe.csv", ["S", "cmpe", "log_cmpe"], rows)


def cmd_diagnose(args, out):
    if not args.params:
        raise UsageError("--params is required")
    params = read_params_json(args.params)
    Y = _load_series(args)
    origin = Y.shape[0] if args.train is None else args.train
    Yin = Y[:origin].astype(float)
    if Yin.shape[1:] != params.Lambda.shape:
        raise UsageError(f"series shape {Yin.shape[1:]} does not match params {params.Lambda.shape}")
    p = params.p
    resid = Yin[p:] - params.Lambda
    for l in range(1, p + 1):
        resid = resid - params.A[l - 1] @ Yin[p - l:origin - l] @ params.B[l - 1].T
    table = _portmanteau(params, Yin, resid, args.max_lag, args.test)
    doc = {**_meta(args), "mrss": mrss(params, Yin), "portmanteau": _jsonable(table)}
    if origin < Y.shape[0]:
        H = args.horizon if args.horizon is not None else Y.shape[0] - origin
        if origin + H > Y.shape[0]:
            raise UsageError(f"horizon {H} exceeds the {Y.shape[0] - origin} held-out observations")
        curve = cmpe(params, Y, origin, H)
        doc["cmpe"] = curve.tolist()
        doc["mspe"] = float(curve[-1])
        _write_cmpe(out, curve)
    write_rows_csv(out / "portmanteau.csv", ["lag", "stat", "df", "p_value"], _portmanteau_rows(table))
    write_json(out / "diagnostics.json", doc)
    print(f"MRSS {doc['mrss']:.6g}" + (f", MSPE {doc['mspe']:.6g}" if "mspe" in doc else ""))


def cmd_replicate(args, out):
    if args.reps < 2:
        raise UsageError("--reps must be at least 2")
    params = _load_params(args)
    if not check_stationary(params)["stationary"]:
        raise NonStationaryError("replication studies need stationary parameters")
    jobs = args.jobs or os.cpu_count() or 1
    if args.study == "estimation":
        methods = ("proj", "icls") if args.method == "both" else (args.method,)
        report = replicate_estimation(params, args.T, args.reps, seed=args.seed, methods=methods,
                                      burn_in=args.burn_in, jobs=jobs)
    else:
        method = "icls" if args.method == "both" else args.method
        report = replicate_order(params, args.T, args.reps, p_bar=args.p_bar, seed=args.seed,
                                 method=method, burn_in=args.burn_in, jobs=jobs)
    text = report.format_tables()
    write_json(out / "replicate.json", {**_meta(args), "params": params.to_dict(), **report.to_dict()})
    (out / "replicate.txt").write_text(text + "\n")
    print(text)


def build_parser():
    parser = argparse.ArgumentParser(prog="matinar", description="MAT-INAR count time series tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, stochastic=False):
        sp.add_argument("--out", default=".", help="output directory (created if missing)")
        sp.add_argument("--seed", type=int, default=0 if stochastic else None)

    def data_opts(sp):
        sp.add_argument("--data", help="series CSV with header t,row,col,value")
        sp.add_argument("--train", type=int, help="use only the first TRAIN observations in-sample")

    def diag_opts(sp):
        sp.add_argument("--max-lag", type=int, default=24, help="largest portmanteau delay")
        sp.add_argument("--test", choices=("adjusted", "hosking"), default="adjusted")

    sp = sub.add_parser("simulate", help="simulate a series")
    common(sp, stochastic=True)
    sp.add_argument("--scenario", help="built-in scenario name, or 'random'")
    sp.add_argument("--params", help="params JSON")
    sp.add_argument("--p", type=int, help="order for --scenario random")
    sp.add_argument("--T", type=int, nargs=1, default=[200])
    sp.add_argument("--burn-in", type=int, default=500)
    sp.add_argument("--force-nonstationary", action="store_true")
    sp.add_argument("--acf-lags", type=int, default=0, help="also write cross-ACF up to this lag")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="estimate a model")
    common(sp)
    data_opts(sp)
    diag_opts(sp)
    sp.add_argument("--method", choices=("proj", "icls"), default="icls")
    sp.add_argument("--p", type=int, help="order; selected by IC1 when omitted")
    sp.add_argument("--p-bar", type=int, default=6)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("select-order", help="IC1 order selection")
    common(sp)
    data_opts(sp)
    sp.add_argument("--method", choices=("proj", "icls"), default="icls")
    sp.add_argument("--p-bar", type=int, default=6)
    sp.set_defaults(func=cmd_select_order)

    sp = sub.add_parser("forecast", help="h-step forecasts")
    common(sp)
    data_opts(sp)
    sp.add_argument("--params", help="fitted params JSON")
    sp.add_argument("--horizon", type=int, default=1)
    sp.add_argument("--rounding", choices=("nearest", "floor"), default="nearest")
    sp.set_defaults(func=cmd_forecast)

    sp = sub.add_parser("diagnose", help="MRSS, CMPE and portmanteau tests")
    common(sp)
    data_opts(sp)
    diag_opts(sp)
    sp.add_argument("--params", help="fitted params JSON")
    sp.add_argument("--horizon", type=int)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("replicate", help="Monte-Carlo replication study")
    common(sp, stochastic=True)
    sp.add_argument("--scenario", default="A", help="built-in scenario name, or 'random'")
    sp.add_argument("--params", help="params JSON")
    sp.add_argument("--study", choices=("estimation", "order"), default="estimation")
    sp.add_argument("--method", choices=("proj", "icls", "both"), default="both")
    sp.add_argument("--p", type=int, help="order for --scenario random")
    sp.add_argument("--p-bar", type=int, default=6)
    sp.add_argument("--T", type=int, nargs="+", default=[200, 1000])
    sp.add_argument("--reps", type=int, default=300)
    sp.add_argument("--burn-in", type=int, default=500)
    sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    sp.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "params", None) and getattr(args, "scenario", None) and args.command == "replicate":
        args.scenario = None
    try:
        out = _check_inputs(args)
        args.func(args, out)
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ScenarioUnavailable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
