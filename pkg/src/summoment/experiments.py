"""Figure experiments as plot-ready tables.

Monte Carlo experiments draw trial ``t`` from RNG stream ``t`` and reduce
over trials in trial order, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from . import __version__
from ._rng import make_rng
from .applications import cov_1mp_ma, experiment_lags, fit_2mp
from .errors import SpecValidationError
from .processes import Markov1Kernel, Markov2Kernel, kernel_to_cov
from .regression import relative_excess_mse, split_ls_fit_batch
from .summoments import gaussian_summoment_closed, summoment2_from_cov

CHUNK = 500


@dataclass
class ExperimentReport:
    experiment_id: str
    config: dict
    seed: int
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": "v1",
            "experiment_id": self.experiment_id,
            "config": self.config,
            "seed": self.seed,
            "columns": self.columns,
            "rows": self.rows,
            "meta": self.meta,
        }


def run_trials(fn: Callable[[int, int], np.ndarray], n_trials: int, jobs: int = 1,
               deterministic: bool = True) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over trial chunks and stack in trial order."""
    bounds = [(s, min(s + CHUNK, n_trials)) for s in range(0, n_trials, CHUNK)]
    if deterministic or jobs <= 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_call_chunk, [fn] * len(bounds), bounds))
    return np.concatenate(parts, axis=0)


def _call_chunk(fn, bounds):
    return fn(*bounds)


# --------------------------------------------------------------------------
# fig2: split LS relative excess error


FIG2_DEFAULTS = {"p1": 1.5, "p2": 0.3, "noise_var": 1.0, "n": 40, "n1": None, "trials": 10_000}


def _fig2_chunk(start, stop, *, seed, p1, p2, noise_var, n, n1_values):
    x = np.arange(1, n + 1, dtype=float)
    sd = math.sqrt(noise_var)
    noise = np.stack([make_rng(seed, t).standard_normal(n) for t in range(start, stop)])
    y = p1 + p2 * x + sd * noise
    out = np.empty((stop - start, len(n1_values)))
    for col, n1 in enumerate(n1_values):
        est = split_ls_fit_batch(x, y, n_lower=n1)
        out[:, col] = relative_excess_mse(y, x, est, (p1, p2))
    return out


def fig2(cfg: dict, seed: int, jobs: int = 1, deterministic: bool = True):
    n = int(cfg["n"])
    n1_values = list(cfg["n1"]) if cfg["n1"] is not None else list(range(1, n // 2 + 1))
    for v in n1_values:
        if not 1 <= v <= n - 1:
            raise SpecValidationError("n1", f"subset sizes must lie in [1, {n - 1}], got {v}")
    fn = partial(_fig2_chunk, seed=seed, p1=float(cfg["p1"]), p2=float(cfg["p2"]),
                 noise_var=float(cfg["noise_var"]), n=n, n1_values=n1_values)
    t = run_trials(fn, int(cfg["trials"]), jobs, deterministic)
    rows = [[n1, float(t[:, j].mean()), float(t[:, j].std(ddof=1))] for j, n1 in enumerate(n1_values)]
    return ["N1", "mean_T", "std_T"], rows


# --------------------------------------------------------------------------
# fig3: 2MP fit to MA-filtered 1MP covariance


FIG3_DEFAULTS = {"alpha": [0.1, 0.5, 0.9], "n_x": [1, 2], "n_min": 2, "n_max": 32, "sigma2": 1.0}


def fig3_mse(alpha: float, n_taps: int, n_x: int, sigma2: float = 1.0) -> float:
    lags = experiment_lags(n_taps, n_x)
    target = cov_1mp_ma(alpha, sigma2, n_taps, lags)
    return fit_2mp(target, lags).mse_percent


def fig3(cfg: dict, seed: int, jobs: int = 1, deterministic: bool = True):
    rows = []
    for alpha in cfg["alpha"]:
        for n_x in cfg["n_x"]:
            for n in range(int(cfg["n_min"]), int(cfg["n_max"]) + 1):
                rows.append([n, float(alpha), int(n_x), fig3_mse(float(alpha), n, int(n_x), float(cfg["sigma2"]))])
    return ["N", "alpha", "n_x", "mse_percent"], rows


# --------------------------------------------------------------------------
# fig4: second central sum-moment of the 2MP


FIG4_DEFAULTS = {"alpha": [0.2, 0.5, 0.8], "n_max": 100, "sigma2": 1.0}


def fig4(cfg: dict, seed: int, jobs: int = 1, deterministic: bool = True):
    rows = []
    for alpha in cfg["alpha"]:
        kern = Markov2Kernel(float(alpha), float(cfg["sigma2"]))
        for n in range(1, int(cfg["n_max"]) + 1):
            rows.append([n, float(alpha), summoment2_from_cov(kernel_to_cov(kern, n))])
    return ["N", "alpha", "summoment2"], rows


# --------------------------------------------------------------------------
# fig5: Minkowski vs sum-moment vs l1 sum-moment for the 1MP


FIG5_DEFAULTS = {"alpha": [0.2, 0.5, 0.8], "m": [1, 2, 3], "n_max": 30, "sigma2": 1.0, "trials": 4000}


def _fig5_chunk(start, stop, *, seed, alphas, ms, n_max, sigma2):
    """Per-trial ``(sum_i |sqrt(N) X_i|^m, (sum_i |X_i|)^m)`` for every (alpha, N, m).

    Common random numbers: trial ``t`` uses one standard-normal vector for all
    (alpha, N).
    """
    u = np.stack([make_rng(seed, t).standard_normal(n_max) for t in range(start, stop)])
    out = np.empty((stop - start, len(alphas), n_max, len(ms), 2))
    for ia, alpha in enumerate(alphas):
        kern = Markov1Kernel(alpha, sigma2)
        for n in range(1, n_max + 1):
            x = u[:, :n] @ kernel_to_cov(kern, n).factor.T
            ax = np.abs(x)
            l1 = ax.sum(axis=1)
            for im, m in enumerate(ms):
                out[:, ia, n - 1, im, 0] = np.sum((math.sqrt(n) * ax) ** m, axis=1)
                out[:, ia, n - 1, im, 1] = l1**m
    return out


def fig5(cfg: dict, seed: int, jobs: int = 1, deterministic: bool = True):
    alphas = [float(a) for a in cfg["alpha"]]
    ms = [int(m) for m in cfg["m"]]
    n_max = int(cfg["n_max"])
    sigma2 = float(cfg["sigma2"])
    fn = partial(_fig5_chunk, seed=seed, alphas=alphas, ms=ms, n_max=n_max, sigma2=sigma2)
    mc = run_trials(fn, int(cfg["trials"]), jobs, deterministic).mean(axis=0)
    rows = []
    for ia, alpha in enumerate(alphas):
        kern = Markov1Kernel(alpha, sigma2)
        for n in range(1, n_max + 1):
            cov = kernel_to_cov(kern, n)
            for im, m in enumerate(ms):
                rows.append([n, alpha, m, float(mc[ia, n - 1, im, 0]) / n,
                             gaussian_summoment_closed(cov, m) / n, float(mc[ia, n - 1, im, 1]) / n])
    return ["N", "alpha", "m", "minkowski", "summoment", "summoment_l1"], rows


EXPERIMENTS = {
    "fig2": (fig2, FIG2_DEFAULTS),
    "fig3": (fig3, FIG3_DEFAULTS),
    "fig4": (fig4, FIG4_DEFAULTS),
    "fig5": (fig5, FIG5_DEFAULTS),
}


def resolve_config(name: str, overrides: dict) -> dict:
    if name not in EXPERIMENTS:
        raise SpecValidationError("experiment", f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    defaults = EXPERIMENTS[name][1]
    unknown = sorted(set(overrides) - set(defaults))
    if unknown:
        raise SpecValidationError(unknown[0], f"unknown parameter for {name}; valid: {sorted(defaults)}")
    cfg = dict(defaults)
    cfg.update(overrides)
    for key, value in cfg.items():
        ref = defaults[key]
        if isinstance(ref, list) and not isinstance(value, list):
            cfg[key] = [value]
        if key == "trials" and (isinstance(value, bool) or not isinstance(value, int) or value < 2):
            raise SpecValidationError("trials", f"must be an integer >= 2, got {value!r}")
    return cfg


def run_experiment(name: str, overrides: dict | None = None, seed: int = 0, jobs: int = 1,
                   deterministic: bool = True) -> ExperimentReport:
    cfg = resolve_config(name, overrides or {})
    fn = EXPERIMENTS[name][0]
    t0 = time.perf_counter()
    try:
        columns, rows = fn(cfg, seed, jobs=jobs, deterministic=deterministic)
    except (TypeError, KeyError) as exc:
        raise SpecValidationError("config", f"invalid parameter value: {exc}") from exc
    meta = {
        "tool_version": __version__,
        "wall_clock_s": time.perf_counter() - t0,
        "trials": cfg.get("trials", 0),
        "jobs": 1 if deterministic else jobs,
        "deterministic": deterministic,
    }
    return ExperimentReport(name, cfg, seed, columns, rows, meta)
