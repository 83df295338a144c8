"""Command-line interface: ``summoment <subcommand> [flags]``.

Exit codes: 0 success, 2 validation error, 3 numeric/domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .applications import (
    align_by_argmax,
    align_by_lambert,
    cov_1mp_ma,
    experiment_lags,
    fit_2mp,
    lmmse_predict,
)
from .config import ProcessSpec, generate, parse_scalar
from .errors import NumericError, SpecValidationError, SumMomentError
from .experiments import EXPERIMENTS, run_experiment
from .moments import (
    autocov_est,
    central_moment,
    cosine_similarity,
    crosscov_est,
    general_moment,
    mean_and_stderr,
    mean_total_variation_sq,
    minkowski_distance,
)
from .processes import Markov1Kernel, Markov2Kernel, WhiteKernel
from .regression import ls_fit, poly_ls_fit, split_gradient_bounds, split_ls_fit
from .summoments import (
    central_summoment,
    gaussian_summoment_closed,
    scaled_minkowski_moment,
    sum_deviations,
    SumMomentRequest,
    evaluate_request,
    summoment2_from_cov,
    summoment_l1,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class InputError(SpecValidationError):
    """Malformed CSV input."""


# --------------------------------------------------------------------------
# I/O helpers


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(path: str):
    """Read a headed numeric CSV into ``(header, {name: array})``."""
    text = sys.stdin.read() if path == "-" else open(path, newline="", encoding="utf-8").read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("input", f"{path}: empty file (line 1: header row expected)") from None
    header = [h.strip() for h in header]
    if not header or any(h == "" for h in header):
        raise InputError("input", f"{path}: line 1: empty column name in header")
    cols = [[] for _ in header]
    for row in reader:
        line = reader.line_num
        if not row or all(c.strip() == "" for c in row):
            continue
        if len(row) != len(header):
            raise InputError("input", f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise InputError("input", f"{path}: line {line}: column {header[j]!r}: "
                                          f"not a number: {cell!r}") from None
            if not math.isfinite(v):
                raise InputError("input", f"{path}: line {line}: column {header[j]!r}: non-finite value")
            cols[j].append(v)
    if not cols[0]:
        raise InputError("input", f"{path}: no data rows")
    return header, {h: np.asarray(c) for h, c in zip(header, cols)}


def data_columns(header):
    return [h for h in header if h != "index"]


def pick(columns, header, name, position=0):
    if name is not None:
        if name not in columns:
            raise InputError("column", f"no column {name!r}; available: {header}")
        return columns[name]
    names = data_columns(header)
    if len(names) <= position:
        raise InputError("column", f"input needs at least {position + 1} data column(s), got {names}")
    return columns[names[position]]


def emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def emit_json(doc: dict, out: str | None):
    emit(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n", out)


def result_doc(command, config, result, stderr=None):
    doc = {"schema_version": "v1", "command": command, "config": config, "result": result}
    if stderr is not None:
        doc["stderr"] = stderr
    return doc


def load_schema(name: str) -> dict:
    """Shipped JSON schema ``name`` (e.g. ``"result"``) at version v1."""
    text = resources.files("summoment").joinpath("schemas", f"{name}.v1.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecValidationError("config", f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SpecValidationError("config", f"{path}: top level must be a JSON object")
    return doc


def resolve(args, defaults: dict) -> dict:
    """Merge built-in defaults, ``--config`` values, then explicit flags."""
    cfg = dict(defaults)
    file_cfg = load_config(args.config)
    unknown = sorted(set(file_cfg) - set(defaults) - {"seed", "schema_version"})
    if unknown:
        raise SpecValidationError(unknown[0], f"unknown config key; valid: {sorted(defaults)}")
    cfg.update({k: v for k, v in file_cfg.items() if k in defaults})
    for key in defaults:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg["seed"] = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    return cfg


# --------------------------------------------------------------------------
# subcommands


GENERATE_FLAGS = ("kind", "n", "alpha", "sigma2", "taps", "method", "delay", "noise_var", "base", "rho")


def cmd_generate(args):
    doc = load_config(args.config)
    for key in GENERATE_FLAGS:
        v = getattr(args, key)
        if v is not None:
            doc[key] = v
    if args.seed is not None:
        doc["seed"] = args.seed
    spec = ProcessSpec.from_dict(doc)
    series = generate(spec)
    if len(series) == 1:
        header = ["index", "value"]
        rows = ((i, v) for i, v in enumerate(series[0]))
    else:
        if series[0].size != series[1].size:
            raise SpecValidationError("blocks", "CSV output needs n1 == n2")
        header = ["index", "value1", "value2"]
        rows = ((i, a, b) for i, (a, b) in enumerate(zip(series[0], series[1])))
    emit(write_csv(header, rows), args.out)


def cmd_experiment(args):
    overrides = load_config(args.config)
    overrides.pop("schema_version", None)
    seed = overrides.pop("seed", 0)
    for item in args.set or []:
        if "=" not in item:
            raise SpecValidationError("--set", f"expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = parse_scalar(value)
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        seed = args.seed
    report = run_experiment(args.name, overrides, seed=seed, jobs=args.jobs,
                            deterministic=args.deterministic)
    text = write_csv(report.columns, report.rows)
    if args.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, f"{args.name}.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    emit_json(report.to_dict(), os.path.join(args.out, f"{args.name}.report.json"))


MOMENTS_DEFAULTS = {"stat": "mean", "column": None, "column2": None, "m": 2, "lag": 0,
                    "normalized": False, "no_lag_check": False}
STATS = ("mean", "var", "central", "general", "autocov", "crosscov", "cosine", "minkowski", "tv")


def cmd_moments(args):
    cfg = resolve(args, MOMENTS_DEFAULTS)
    header, cols = read_csv(args.input)
    x = pick(cols, header, cfg["column"], 0)
    stat, m, lag = cfg["stat"], int(cfg["m"]), int(cfg["lag"])
    check = not cfg["no_lag_check"]
    se = None
    if stat == "mean":
        value, err = mean_and_stderr(x)
        se = {"value": err}
    elif stat == "var":
        value = central_moment(x, 2)
    elif stat == "central":
        value = central_moment(x, m, normalized=cfg["normalized"])
    elif stat == "general":
        value = general_moment(x, m)
    elif stat == "autocov":
        value = autocov_est(x, lag, check_lag=check)
    elif stat == "tv":
        value = mean_total_variation_sq(x)
    else:
        y = pick(cols, header, cfg["column2"], 1)
        if stat == "crosscov":
            value = crosscov_est(x, y, lag, check_lag=check)
        elif stat == "cosine":
            value = cosine_similarity(x, y)
        else:
            value = minkowski_distance(x, y, m)
    emit_json(result_doc("moments", cfg, {"value": value, "n": int(x.size)}, se), args.out)


SUMMOMENT_DEFAULTS = {"m": 2, "means": None, "gaussian": False}


def cmd_summoment_request(args):
    doc = load_config(args.request)
    if args.m is not None:
        doc["m"] = args.m
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    req = SumMomentRequest.from_dict(doc)
    result, stderr = evaluate_request(req)
    cfg = req.to_dict()
    cfg.pop("blocks")
    cfg["block_shapes"] = [list(b.shape) for b in req.blocks]
    emit_json(result_doc("summoment", cfg, result, stderr), args.out)


def cmd_summoment(args):
    if args.request is not None:
        if args.input is not None:
            raise SpecValidationError("--request", "give either an input CSV or --request, not both")
        return cmd_summoment_request(args)
    if args.input is None:
        raise SpecValidationError("input", "an input CSV or --request is required")
    cfg = resolve(args, SUMMOMENT_DEFAULTS)
    header, cols = read_csv(args.input)
    names = data_columns(header)
    if not names:
        raise InputError("input", "no data columns")
    x = np.column_stack([cols[h] for h in names])
    m = int(cfg["m"])
    means = cfg["means"]
    if isinstance(means, str):
        means = [float(v) for v in means.split(",")]
    s = sum_deviations(x, means)
    result = {
        "central_summoment": central_summoment(x, m, means),
        "summoment_l1": summoment_l1(x, m),
        "scaled_minkowski": scaled_minkowski_moment(x, m),
        "realizations": int(x.shape[0]),
        "dimension": int(x.shape[1]),
    }
    cov = np.atleast_2d(np.cov(x, rowvar=False, bias=True))
    result["grand_sum_cov"] = summoment2_from_cov(cov)
    if cfg["gaussian"]:
        result["gaussian_closed_form"] = gaussian_summoment_closed(cov, m)
    _, err = mean_and_stderr(np.abs(s) ** m)
    emit_json(result_doc("summoment", cfg, result, {"central_summoment": err}), args.out)


REGRESS_DEFAULTS = {"x": None, "y": None, "method": "ls", "degree": 1, "n_lower": None,
                    "noise_var": None, "xi": 2.0}


def cmd_regress(args):
    cfg = resolve(args, REGRESS_DEFAULTS)
    header, cols = read_csv(args.input)
    if cfg["x"] is None and "index" in cols:
        x = cols["index"]
        y = pick(cols, header, cfg["y"], 0)
    else:
        x = pick(cols, header, cfg["x"], 0)
        y = pick(cols, header, cfg["y"], 1)
    method = cfg["method"]
    result = {}
    if method == "ls":
        est = ls_fit(np.column_stack([np.ones_like(x), x]), y)
    elif method == "poly":
        est = poly_ls_fit(y, int(cfg["degree"]), t=x).coeffs
    elif method == "split":
        fit = split_ls_fit(x, y, n_lower=cfg["n_lower"])
        est = fit.estimates
        result["consistency_residual"] = fit.consistency_residual()
        result["subset_sizes"] = [int(s.size) for s in fit.subsets]
        if cfg["noise_var"] is not None:
            b_l, b_u, width = split_gradient_bounds(fit, float(cfg["noise_var"]), float(cfg["xi"]))
            result.update(slope_lower=b_l, slope_upper=b_u, slope_width=width)
    else:
        raise SpecValidationError("method", f"must be one of ls, split, poly; got {method!r}")
    est = np.asarray(est, dtype=float)
    result["estimates"] = est.tolist()
    if est.size == 2:
        result["intercept"], result["slope"] = float(est[0]), float(est[1])
    emit_json(result_doc("regress", cfg, result), args.out)


FIT2MP_DEFAULTS = {"lag_column": "lag", "value_column": "value", "ma_alpha": None, "taps": None,
                   "n_x": 1, "sigma2": 1.0}


def cmd_fit2mp(args):
    cfg = resolve(args, FIT2MP_DEFAULTS)
    if args.input is not None:
        header, cols = read_csv(args.input)
        lags = pick(cols, header, cfg["lag_column"]).astype(int)
        target = pick(cols, header, cfg["value_column"])
    elif cfg["ma_alpha"] is not None and cfg["taps"] is not None:
        lags = experiment_lags(int(cfg["taps"]), int(cfg["n_x"]))
        target = cov_1mp_ma(float(cfg["ma_alpha"]), float(cfg["sigma2"]), int(cfg["taps"]), lags)
    else:
        raise SpecValidationError("input", "give an input CSV or both --ma-alpha and --taps")
    res = fit_2mp(target, lags)
    result = {"alpha_hat": res.alpha_hat, "alpha_lambert": res.alpha_lambert,
              "peak": res.peak, "mse_percent": res.mse_percent, "lags": int(lags.size)}
    emit_json(result_doc("fit2mp", cfg, result), args.out)


PREDICT_DEFAULTS = {"column": None, "kernel": "markov1", "alpha": None, "sigma2": 1.0}


def cmd_predict(args):
    cfg = resolve(args, PREDICT_DEFAULTS)
    header, cols = read_csv(args.input)
    x = pick(cols, header, cfg["column"], 0)
    name = cfg["kernel"]
    sigma2 = float(cfg["sigma2"])
    if name == "white":
        kern = WhiteKernel(sigma2)
    elif name in ("markov1", "markov2"):
        if cfg["alpha"] is None:
            raise SpecValidationError("alpha", f"required for kernel {name!r}")
        kern = (Markov1Kernel if name == "markov1" else Markov2Kernel)(float(cfg["alpha"]), sigma2)
    else:
        raise SpecValidationError("kernel", f"must be white, markov1 or markov2; got {name!r}")
    rho = float(kern(1)) / float(kern(0))
    result = {"prediction": lmmse_predict(x, kern), "prediction_mse": float(kern(0)) * (1.0 - rho * rho)}
    emit_json(result_doc("predict", cfg, result), args.out)


ALIGN_DEFAULTS = {"method": "lambert", "k_max": 6, "max_lag": None, "column": None, "column2": None}


def cmd_align(args):
    cfg = resolve(args, ALIGN_DEFAULTS)
    header, cols = read_csv(args.input)
    x1 = pick(cols, header, cfg["column"], 0)
    x2 = pick(cols, header, cfg["column2"], 1)
    if cfg["method"] == "lambert":
        est = align_by_lambert(x1, x2, k_max=int(cfg["k_max"]))
        result = {"delta_hat": est.delta_rounded, "delta_continuous": est.delta_hat,
                  "alpha_hat": est.alpha_hat, "residual": est.residual}
    elif cfg["method"] == "argmax":
        max_lag = cfg["max_lag"]
        if max_lag is None:
            max_lag = min(x1.size, x2.size) // 4
        result = {"delta_hat": align_by_argmax(x1, x2, int(max_lag))}
    else:
        raise SpecValidationError("method", f"must be lambert or argmax; got {cfg['method']!r}")
    emit_json(result_doc("align", cfg, result), args.out)


# --------------------------------------------------------------------------
# parser


def _env_jobs() -> int:
    raw = os.environ.get("SUMMOMENT_JOBS")
    if raw is None:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise SpecValidationError("SUMMOMENT_JOBS", f"must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise SpecValidationError("SUMMOMENT_JOBS", "must be >= 1")
    return jobs


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=None, help="master RNG seed (default 0)")
    common.add_argument("--jobs", type=_pos_int, default=None,
                        help="worker processes (default $SUMMOMENT_JOBS or 1)")
    common.add_argument("--deterministic", action="store_true",
                        help="sequential, order-fixed evaluation")
    common.add_argument("--out", default=None, help="output file (directory for experiments)")
    common.add_argument("--config", default=None, help="JSON config; explicit flags override it")

    p = argparse.ArgumentParser(prog="summoment", description="Sum-moment statistics toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate a process realization as CSV")
    g.add_argument("--kind", choices=["white", "markov1", "markov2", "cov", "pair", "shifted"])
    g.add_argument("--n", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--sigma2", type=float)
    g.add_argument("--taps", type=int)
    g.add_argument("--method", choices=["ar", "arma", "exact"])
    g.add_argument("--delay", type=int)
    g.add_argument("--noise-var", dest="noise_var", type=float)
    g.add_argument("--base", choices=["markov1", "markov2"])
    g.add_argument("--rho", type=float)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("experiment", parents=[common], help="reproduce a figure table")
    e.add_argument("name", choices=sorted(EXPERIMENTS))
    e.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter (JSON value)")
    e.add_argument("--trials", type=int)
    e.set_defaults(func=cmd_experiment)

    m = sub.add_parser("moments", parents=[common], help="moment and covariance estimators")
    m.add_argument("input", help="CSV path or - for stdin")
    m.add_argument("--stat", choices=STATS)
    m.add_argument("--column")
    m.add_argument("--column2")
    m.add_argument("--m", type=int)
    m.add_argument("--lag", type=int)
    m.add_argument("--normalized", action="store_true", default=None)
    m.add_argument("--no-lag-check", dest="no_lag_check", action="store_true", default=None)
    m.set_defaults(func=cmd_moments)

    s = sub.add_parser("summoment", parents=[common], help="sum-moments of an ensemble (rows = realizations)")
    s.add_argument("input", nargs="?", help="CSV path or - for stdin")
    s.add_argument("--request", help="JSON sum-moment request (kind, m, blocks, means, trials, seed)")
    s.add_argument("--trials", type=int, help="Monte Carlo draws for a gaussian request")
    s.add_argument("--m", type=int)
    s.add_argument("--means", help="comma-separated per-coordinate means")
    s.add_argument("--gaussian", action="store_true", default=None,
                   help="also report the Gaussian closed form for the sample covariance")
    s.set_defaults(func=cmd_summoment)

    r = sub.add_parser("regress", parents=[common], help="linear, polynomial or split least squares")
    r.add_argument("input")
    r.add_argument("--x")
    r.add_argument("--y")
    r.add_argument("--method", choices=["ls", "split", "poly"])
    r.add_argument("--degree", type=int)
    r.add_argument("--n-lower", dest="n_lower", type=int)
    r.add_argument("--noise-var", dest="noise_var", type=float)
    r.add_argument("--xi", type=float)
    r.set_defaults(func=cmd_regress)

    f = sub.add_parser("fit2mp", parents=[common], help="fit a second-order Markov kernel")
    f.add_argument("input", nargs="?")
    f.add_argument("--lag-column", dest="lag_column")
    f.add_argument("--value-column", dest="value_column")
    f.add_argument("--ma-alpha", dest="ma_alpha", type=float)
    f.add_argument("--taps", type=int)
    f.add_argument("--n-x", dest="n_x", type=int)
    f.add_argument("--sigma2", type=float)
    f.set_defaults(func=cmd_fit2mp)

    q = sub.add_parser("predict", parents=[common], help="one-step LMMSE prediction")
    q.add_argument("input")
    q.add_argument("--column")
    q.add_argument("--kernel", choices=["white", "markov1", "markov2"])
    q.add_argument("--alpha", type=float)
    q.add_argument("--sigma2", type=float)
    q.set_defaults(func=cmd_predict)

    a = sub.add_parser("align", parents=[common], help="estimate the delay between two columns")
    a.add_argument("input")
    a.add_argument("--method", choices=["lambert", "argmax"])
    a.add_argument("--k-max", dest="k_max", type=int)
    a.add_argument("--max-lag", dest="max_lag", type=int)
    a.add_argument("--column")
    a.add_argument("--column2")
    a.set_defaults(func=cmd_align)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.jobs is None:
            args.jobs = _env_jobs()
        if args.deterministic:
            args.jobs = 1
        args.func(args)
    except (NumericError, OverflowError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"summoment: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SumMomentError, ValueError, TypeError) as exc:
        print(f"summoment: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"summoment: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
