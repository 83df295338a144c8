"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
"acceptance criteria" section of the pytest terminal summary.  Run alone with
``pytest tests/test_acceptance.py -v``.
"""

import math
import time

import numpy as np

from summoment.applications import (
    align_by_lambert,
    align_from_normalized,
    cov_1mp_ma,
    lmmse_predict,
    markov2_shape,
)
from summoment.cli import main
from summoment.experiments import fig3_mse, run_experiment
from summoment.moments import autocov_est, mean_and_stderr
from summoment.processes import (
    Markov1Kernel,
    MarkovParams,
    filter_cov,
    gen_markov_ar,
    gen_shifted_pair,
    kernel_to_cov,
    sample_gaussian,
    sample_pair,
    solve_pair_spec,
)
from summoment.regression import split_ls_fit
from summoment.specfun import gamma_fn, lambert_w_m1
from summoment.summoments import (
    gaussian_summoment_closed,
    multinomial_expand_check,
    summoment2_from_cov,
)


def random_cov(rng, dim):
    a = rng.standard_normal((dim, dim + 2))
    return a @ a.T / (dim + 2)


def test_criterion_01_grand_sum_oracle(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(50):
        cov = random_cov(rng, int(rng.integers(2, 9)))
        x = sample_gaussian(cov, 200_000, seed=1, stream=i)
        mc, se = mean_and_stderr(np.sum(x, axis=1) ** 2)
        worst = max(worst, abs(mc - summoment2_from_cov(cov)) / se)
    elapsed = time.perf_counter() - t0
    criterion(1, worst <= 4 and elapsed < 60, f"max |MC - grand sum| = {worst:.2f} SE (<= 4); {elapsed:.1f} s (< 60)")


def test_criterion_02_gaussian_closed_form(criterion):
    rng = np.random.default_rng(202)
    worst_rel, worst_m2 = 0.0, 0.0
    for i in range(10):
        cov = random_cov(rng, int(rng.integers(2, 9)))
        s = np.abs(sample_gaussian(cov, 1_000_000, seed=2, stream=i).sum(axis=1))
        ones_t = np.linalg.norm(np.ones(cov.shape[0]) @ np.linalg.cholesky(cov))
        for m in (1, 2, 3, 4):
            formula = ones_t**m * 2 ** (m / 2) * gamma_fn((m + 1) / 2) / math.sqrt(math.pi)
            closed = gaussian_summoment_closed(cov, m)
            worst_rel = max(worst_rel, abs(np.mean(s**m) - formula) / formula, abs(closed - formula) / formula)
        grand = summoment2_from_cov(cov)
        worst_m2 = max(worst_m2, abs(gaussian_summoment_closed(cov, 2) - grand) / abs(grand))
    ok = worst_rel <= 0.02 and worst_m2 <= 1e-10
    criterion(2, ok, f"max MC rel. error {worst_rel:.4f} (<= 0.02); m=2 vs grand sum {worst_m2:.1e} (<= 1e-10)")


def test_criterion_03_fig4(criterion):
    t0 = time.perf_counter()
    rows = np.array(run_experiment("fig4").rows)
    elapsed = time.perf_counter() - t0
    by_alpha = {a: rows[rows[:, 1] == a][:, 2] for a in (0.2, 0.5, 0.8)}
    inc_n = all(np.all(np.diff(v) > 0) for v in by_alpha.values())
    inc_corr = bool(np.all(by_alpha[0.2][1:] > by_alpha[0.5][1:]) and np.all(by_alpha[0.5][1:] > by_alpha[0.8][1:]))
    ok = inc_n and inc_corr and elapsed < 1
    criterion(3, ok, f"increasing in N: {inc_n}; increasing in e^-alpha for N >= 2: {inc_corr}; {elapsed:.2f} s (< 1)")


def test_criterion_04_fig2(criterion):
    t0 = time.perf_counter()
    rep = run_experiment("fig2", {"trials": 10_000}, seed=0)
    elapsed = time.perf_counter() - t0
    mean_t = {int(r[0]): r[1] for r in rep.rows}
    low = min(mean_t[n1] for n1 in (1, 2, 3, 4))
    ok = mean_t[20] < low and mean_t[20] < 10 and elapsed < 30
    criterion(4, ok, f"mean T(N1=20) = {mean_t[20]:.2f}% (< 10%, < min over N1<=4 = {low:.2f}%); "
                     f"{elapsed:.1f} s (< 30)")


def test_criterion_05_fig3_interior_minimum(criterion):
    t0 = time.perf_counter()
    ns = np.arange(2, 33)
    results = {}
    for alpha in (0.1, 0.5, 0.9):
        for n_x in (1, 2):
            mse = np.array([fig3_mse(alpha, int(n), n_x) for n in ns])
            i = int(np.argmin(mse))
            results[(alpha, n_x)] = (0 < i < ns.size - 1, int(ns[i]))
    elapsed = time.perf_counter() - t0
    ok = all(v[0] for v in results.values()) and elapsed < 10
    detail = ", ".join(f"(a={a}, nx={nx}): argmin N={n}{'' if inner else ' [edge]'}"
                       for (a, nx), (inner, n) in results.items())
    criterion(5, ok, f"{detail}; {elapsed:.1f} s (< 10)")


def _autocov_se(alpha, k, n):
    j = np.arange(-400, 401)
    c = np.exp(-alpha * np.abs(j))
    return math.sqrt(np.sum(c * c + np.exp(-alpha * np.abs(j + k)) * np.exp(-alpha * np.abs(j - k))) / n)


def test_criterion_06_generator_fidelity(criterion):
    worst = 0.0
    for alpha in (0.2, 0.5, 0.8):
        x = gen_markov_ar(MarkovParams(alpha, 1.0, 1), 1_000_000, seed=6)
        for k in range(4):
            z = abs(autocov_est(x, k) - math.exp(-alpha * k)) / _autocov_se(alpha, k, x.samples.size)
            worst = max(worst, z)
    rng = np.random.default_rng(606)
    joint = random_cov(rng, 7)
    c1, c2, c12 = joint[:4, :4], joint[4:, 4:], joint[:4, 4:]
    x1, x2 = sample_pair(solve_pair_spec(c1, c2, c12), 200_000, seed=6)
    n = x1.shape[0]
    e1 = x1 - x1.mean(axis=0)
    e2 = x2 - x2.mean(axis=0)
    frob = max(np.linalg.norm(e1.T @ e1 / n - c1) / np.linalg.norm(c1),
               np.linalg.norm(e2.T @ e2 / n - c2) / np.linalg.norm(c2),
               np.linalg.norm(e1.T @ e2 / n - c12) / np.linalg.norm(c12))
    ok = worst <= 3 and frob <= 0.03
    criterion(6, ok, f"max 1MP autocov deviation {worst:.2f} SE (<= 3); max pair block rel. Frobenius {frob:.4f} (<= 0.03)")


def test_criterion_07_lambert(criterion):
    grid = np.linspace(-math.exp(-1.0), 0.0, 1001)[:-1]
    resid = max(abs(w * math.exp(w) - x) / abs(x) for x in grid for w in [lambert_w_m1(float(x))])
    k = np.arange(6)
    est = align_from_normalized(markov2_shape(0.25, 4 + k))
    exact_err = max(abs(est.alpha_hat - 0.25), abs(est.delta_hat - 4))
    p = MarkovParams(0.3, 1.0, 2)
    hits = 0
    for t in range(200):
        e = align_by_lambert(*gen_shifted_pair(p, 100_000, 5, seed=7, stream=2 * t))
        hits += abs(e.alpha_hat - 0.3) <= 0.03 and abs(e.delta_hat - 5) <= 0.5
    ok = resid <= 1e-12 and exact_err <= 1e-8 and hits >= 180
    criterion(7, ok, f"max rel. residual {resid:.1e} (<= 1e-12); exact-model error {exact_err:.1e} (<= 1e-8); "
                     f"generated-pair success {hits}/200 (>= 180)")


def test_criterion_08_identities(criterion):
    rng = np.random.default_rng(808)
    a, b = rng.standard_normal((2, 10_000, 8))
    lhs = 0.5 * np.sum((a - b) ** 2, axis=1) + 0.5 * np.sum((a + b) ** 2, axis=1)
    rhs = np.sum(a * a, axis=1) + np.sum(b * b, axis=1)
    para = float(np.max(np.abs(lhs - rhs) / rhs))
    cons = 0.0
    for t in range(1000):
        n = int(rng.integers(2, 200))
        x = rng.uniform(-50, 50, n)
        y = 1.5 + 0.3 * x + rng.standard_normal(n)
        cons = max(cons, split_ls_fit(x, y, int(rng.integers(1, n))).consistency_residual())
    filt = 0.0
    for alpha in (0.1, 0.5, 0.9, 2.0):
        for taps in (1, 2, 5, 13):
            for k in range(-30, 31):
                ref = cov_1mp_ma(alpha, 1.0, taps, k)
                filt = max(filt, abs(filter_cov(Markov1Kernel(alpha, 1.0), np.ones(taps), k) - ref) / abs(ref))
    multi = 0.0
    for dim in range(1, 5):
        for m in range(1, 5):
            for _ in range(20):
                lhs_m, rhs_m = multinomial_expand_check(rng.uniform(-2, 2, dim), m)
                multi = max(multi, abs(lhs_m - rhs_m) / max(1.0, abs(lhs_m)))
    ok = para <= 1e-10 and cons <= 1e-10 and filt <= 1e-12 and multi <= 1e-10
    criterion(8, ok, f"parallelogram {para:.1e}; split consistency {cons:.1e}; "
                     f"filter_cov vs weighted sum {filt:.1e}; multinomial {multi:.1e}")


def test_criterion_09_lmmse(criterion):
    worst = 0.0
    for alpha in (0.3, 0.7):
        kern = Markov1Kernel(alpha, 1.0)
        x = sample_gaussian(kernel_to_cov(kern, 11), 100_000, seed=9)
        pred = np.array([lmmse_predict(row[:-1], kern) for row in x])
        mse = float(np.mean((x[:, -1] - pred) ** 2))
        worst = max(worst, abs(mse - (1 - math.exp(-2 * alpha))) / (1 - math.exp(-2 * alpha)))
    criterion(9, worst <= 0.02, f"max rel. deviation of prediction MSE {worst:.4f} (<= 0.02)")


def test_criterion_10_reproducibility(criterion, tmp_path):
    same = {}
    for name in ("fig2", "fig3", "fig4", "fig5"):
        outs = []
        for run in range(2):
            d = tmp_path / f"{name}-{run}"
            assert main(["experiment", name, "--seed", "11", "--deterministic", "--out", str(d)]) == 0
            outs.append((d / f"{name}.csv").read_bytes())
        same[name] = outs[0] == outs[1]
    criterion(10, all(same.values()), "byte-identical reruns: " + ", ".join(f"{k}={v}" for k, v in same.items()))
