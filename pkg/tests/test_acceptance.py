"""Acceptance suite: every criterion at its stated tolerance and runtime budget.

Each test prints one PASS/FAIL line; the lines are collected again in the
"acceptance criteria" section of the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy import special

from abclab import oracle
from abclab.cli import main
from abclab.engine import AbcConfig, abc_sample
from abclab.estimators import estimate_bayes_factor, estimate_posterior_probs
from abclab.experiments import (
    GrfConfig,
    MaConfig,
    NormalConfig,
    PoisGeomConfig,
    run_grf,
    run_ma,
    run_normal,
    run_poisgeom,
)
from abclab.models import bernoulli_model, cross_model_summarizer, geometric_model, normal_pair, poisson_model
from abclab.streams import RandomStream
from abclab.table import build_reference_table, tolerance_sweep

SEED = 20240501


def _toy_joint_oracle(eps, bins):
    """Enumerated pi_eps(theta-bin, z | S_obs = 3) for the Bernoulli toy, n = 3."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    configs = np.array([[(c >> k) & 1 for k in range(3)] for c in range(8)])
    probs = np.zeros((bins, 8))
    for c, z in enumerate(configs):
        S = int(z.sum())
        if abs(S - 3) > eps:
            continue
        # int_a^b theta^S (1 - theta)^(3 - S) d theta
        cdf = special.betainc(S + 1, 4 - S, edges)
        probs[:, c] = np.diff(cdf) * special.beta(S + 1, 4 - S)
    return probs / probs.sum()


def test_criterion_01_rejection_joint_exactness(criterion):
    c = criterion("C1 Bernoulli toy accepted joint matches enumeration", 30)
    bins = 10
    for eps in (0.0, 1.0):
        run = abc_sample(bernoulli_model(), [3.0], 3, AbcConfig(n_accept=10**5, epsilon=eps, keep_data=True),
                         RandomStream(SEED).child(1, int(eps)))
        codes = (run.data * (1 << np.arange(3))).sum(axis=1)
        bin_idx = np.minimum((run.parameters[:, 0] * bins).astype(int), bins - 1)
        emp = np.zeros((bins, 8))
        np.add.at(emp, (bin_idx, codes), 1.0)
        emp /= emp.sum()
        tv = 0.5 * np.abs(emp - _toy_joint_oracle(eps, bins)).sum()
        c.check(f"eps={eps:g}: {run.n_accepted} accepts, TV={tv:.4f} < 0.02", run.n_accepted == 10**5 and tv < 0.02)
    assert c.finish()


def test_criterion_02_factorisation_identity(criterion):
    c = criterion("C2 factorisation identity", 5)
    rng = RandomStream(SEED).child(2)
    y = rng.child(0).generator.poisson(1.0, size=(100, 50))
    r1 = oracle.check_factorisation(poisson_model(), geometric_model(), y).max_abs_residual
    m1, m2 = normal_pair(0.1, 10.0, 1.0)
    y = rng.child(1).generator.normal(0.0, 1.0, size=(100, 15))
    r2 = oracle.check_factorisation(m1, m2, y).max_abs_residual
    c.check(f"count pair n=50 max residual {r1:.2e} < 1e-8", r1 < 1e-8)
    c.check(f"normal pair n=15 max residual {r2:.2e} < 1e-8", r2 < 1e-8)
    assert c.finish()


def test_criterion_03_grf_agreement(criterion):
    c = criterion("C3 GRF exact vs ABC (eps=0) Bayes factors", 600)
    r = run_grf(GrfConfig(), SEED)
    cols = r.columns
    accepts = cols["accepts_1"] + cols["accepts_2"]
    c.check(f"{len(cols['dataset'])} datasets", len(cols["dataset"]) == 200)
    c.check(f"min accepts {accepts.min()} >= 1000 after {r.diagnostics['proposals']} proposals",
            accepts.min() >= 1000 and not r.truncated)
    slope = r.diagnostics["regression_slope"]
    c.check(f"slope {slope:.4f} in [0.9, 1.1]", 0.9 <= slope <= 1.1)
    frac = r.diagnostics["fraction_within_3se"]
    c.check(f"{100 * frac:.1f}% within 3 MC SE >= 95%", frac >= 0.95)
    assert c.finish()


def test_criterion_04_count_pair_limit(criterion):
    c = criterion("C4 Poisson/geometric summary BF limit", 1)
    theta0, grid = 2.0, [10**2, 10**3, 10**4, 10**5]
    s = oracle.theorem1_study(theta0, grid, "derived")
    limit = (theta0 + 1) ** 2 * math.exp(-theta0)
    rel = abs(math.exp(s.values[-1]) / limit - 1)
    c.check(f"B^eta(n=1e5)={math.exp(s.values[-1]):.6f} within 1% of {limit:.6f} (rel {rel:.2e})", rel < 0.01)
    bf = np.exp(s.values)
    c.check(f"sequence in [{bf.min():.4f}, {bf.max():.4f}], bounded away from 0 and inf",
            np.all(np.isfinite(bf)) and bf.min() > 0.5 * limit and bf.max() < 2 * limit)
    c.check(f"stated constant {math.exp(s.paper_constant):.6f} emitted, gap {s.constant_gap:.6f} = log theta0",
            abs(s.constant_gap - math.log(theta0)) < 1e-12 and s.approaches == "derived")
    # the full-data Bayes factor diverges linearly in n on the same data law
    stream = RandomStream(SEED).child(4)
    true = [oracle.bf_true(poisson_model(), geometric_model(), stream.child(i).generator.poisson(theta0, n)).log_bf
            for i, n in enumerate(grid)]
    slope = np.polyfit(np.log(grid), np.log(np.abs(true)), 1)[0]
    c.check(f"|log B12| under Poisson data grows with log-log slope {slope:.3f} ~ 1", 0.8 < slope < 1.2)
    assert c.finish()


def test_criterion_05_normal_pair_decay(criterion):
    c = criterion("C5 normal-pair summary BF decays to 0", 1)
    s = oracle.theorem2_study(1.0, 2.0, 1.0, [10**2, 10**3, 10**4, 10**5], RandomStream(SEED).child(5))
    v = abs(s.values[2])
    c.check(f"|log B^eta(n=1e4)| = {v:.2e} < 0.05", v < 0.05)
    c.check(f"log-log decay slope {s.decay_slope:.4f} in -1 +- 0.1", abs(s.decay_slope + 1) <= 0.1)
    assert c.finish()


def test_criterion_06_poisson_geometric_scatter(criterion):
    c = criterion("C6 full-data vs summary BF spread and growth", 60)
    r = run_poisgeom(PoisGeomConfig(), SEED)
    d = r.diagnostics
    ratio = d["sd_log_bf_poisson"] / d["sd_log_bf_summary_poisson"]
    c.check(f"SD(log B12)/SD(log B^eta) = {ratio:.2f} > 5 under Poisson data (n=50, 1e4 reps)", ratio > 5)
    g = r.extra_tables["growth.csv"]
    i20, i100 = g["n"].index(20), g["n"].index(100)
    full = g["mean_abs_log_bf"][i100] / g["mean_abs_log_bf"][i20]
    summ = g["mean_abs_log_bf_summary"][i100] / g["mean_abs_log_bf_summary"][i20]
    c.check(f"mean|log B12| ratio n=100/n=20 = {full:.3f} > 4", full > 4)
    c.check(f"mean|log B^eta| ratio n=100/n=20 = {summ:.3f} < 1.5", summ < 1.5)
    assert c.finish()


def test_criterion_07_normal_discrepancy_signs(criterion):
    c = criterion("C7 normal-pair log discrepancy signs", 60)
    r = run_normal(NormalConfig(), SEED)
    p1 = r.diagnostics["fraction_positive_model1"]
    n2 = r.diagnostics["fraction_negative_model2"]
    c.check(f"model-1 data: {100 * p1:.2f}% positive > 99%", p1 > 0.99)
    c.check(f"model-2 data: {100 * n2:.2f}% negative > 99%", n2 > 0.99)
    assert c.finish()


def _observed_counts(n, k):
    return [RandomStream(SEED).child(8, n, i).generator.poisson(1.0, size=n) for i in range(k)]


def test_criterion_08_sweep_converges_to_summary_bf(criterion):
    c = criterion("C8 ABC sweep -> summary BF (count pair, T=1e6)", 120)
    p, g = poisson_model(), geometric_model()
    n = 50
    table = build_reference_table([p, g], None, n, 10**6, RandomStream(SEED).child(8, 0))
    for i, y in enumerate(_observed_counts(n, 5)):
        rows = tolerance_sweep(table, [y.sum()], [1.0, 0.1, 0.01, 0.001])
        prior = estimate_posterior_probs(rows[0])
        prior_ok = np.all(np.abs(prior.probs - 0.5) <= 3 * prior.standard_errors)
        est = estimate_bayes_factor(rows[-1], 0, 1)
        target = oracle.bf_summary(p, g, y.sum(), n).log_bf
        z = (est.log_bf - target) / est.mc_standard_error
        c.check(f"y{i}: S={y.sum()} eps={rows[-1].epsilon:g} ABC {est.log_bf:.4f} vs {target:.4f} (z={z:+.2f}); "
                f"eps=inf P(M1)={prior.probs[0]:.4f}", est.within(target) and prior_ok)
    assert c.finish()


def test_criterion_09_cross_model_completion(criterion):
    c = criterion("C9 completed summary recovers the true BF", 120)
    p, g = poisson_model(), geometric_model()
    # at n = 10 the 1e-3 quantile of the (S, sum log y!) distances is 0
    n = 10
    summary = cross_model_summarizer("poisson-geometric")
    table = build_reference_table([p, g], None, n, 10**6, RandomStream(SEED).child(9, 0), summary=summary)
    for i, y in enumerate(_observed_counts(n, 5)):
        rows = tolerance_sweep(table, summary(y[None, :])[0], [0.1, 0.01, 0.001])
        est = estimate_bayes_factor(rows[-1], 0, 1)
        target = oracle.bf_true(p, g, y).log_bf
        z = (est.log_bf - target) / est.mc_standard_error
        c.check(f"y{i}: eps={rows[-1].epsilon:g} ABC {est.log_bf:.4f} vs true {target:.4f} (z={z:+.2f})",
                est.within(target))
    m1, m2 = normal_pair(0.1, 10.0, 1.0)
    y = RandomStream(SEED).child(9, 1).generator.normal(0.0, 3.0, size=(100, 15))
    err = np.max(np.abs(oracle.normal_sufficient_pair_log_bf(y, 0.1, 10.0, 1.0) - oracle.log_bf_true(m1, m2, y)))
    c.check(f"normal (ybar, S2) BF vs true: max |diff| {err:.2e} < 1e-8", err < 1e-8)
    assert c.finish()


SMOKE = {
    "grf": ["--n-datasets", "20", "--proposals", "50000", "--min-accepts", "100"],
    "poisgeom": ["--reps", "500"],
    "normal": ["--reps", "500"],
    "limits": [],
    "ma": ["--n", "40", "--datasets", "2", "--table-size", "50000"],
}


def test_criterion_10_determinism_across_workers(criterion, tmp_path):
    c = criterion("C10 byte-identical CSV for 1 vs 4 workers", 120)
    for name, extra in SMOKE.items():
        outs = []
        for workers in (1, 4):
            out = tmp_path / f"w{workers}"
            code = main([name, "--seed", str(SEED), "--out", str(out), "--workers", str(workers)] + extra)
            outs.append((code, (out / name / "data.csv").read_bytes()))
        same = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1]
        c.check(f"{name}: {len(outs[0][1])} bytes identical", same)
    assert c.finish()


@pytest.fixture(scope="module")
def ma_result():
    start = time.perf_counter()
    result = run_ma(MaConfig(), SEED)
    return result, time.perf_counter() - start


def test_ma_divergence_from_exact(criterion, ma_result):
    c = criterion("MA-1 ABC (autocovariances) diverges from exact BF on strong-theta2 data", 120)
    result, elapsed = ma_result
    c.start -= elapsed  # the shared run counts against this budget
    cols = result.columns
    law = np.array(cols["law"])
    exact = np.array(cols["log_bf_exact"])[law == "ma2"]
    div = np.array(cols["divergent"])[law == "ma2"]
    c.check(f"median exact log B21 = {np.median(exact):.2f} > log 10", np.median(exact) > math.log(10))
    c.check(f"{100 * div.mean():.0f}% of MA(2) datasets outside 3 SE of exact > 50%", div.mean() > 0.5)
    boundary = np.abs(np.array(cols["log_bf_exact"])[law == "ma1"]).mean()
    c.check(f"theta2=0 data: mean |log B21| = {boundary:.2f} < log 10", boundary < math.log(10))
    assert c.finish()


@pytest.mark.xfail(strict=True, reason="ABC estimates keep moving between quantiles 0.1 and 0.001; see README")
def test_ma_sweep_stability(criterion, ma_result):
    c = criterion("MA-3 ABC estimate stable across quantiles {0.1, 0.01, 0.001}", 120)
    stable = np.array(ma_result[0].columns["stable"])
    c.check(f"{stable.sum()}/{stable.size} datasets with all quantile pairs within 3 combined SE", stable.all())
    assert c.finish()
