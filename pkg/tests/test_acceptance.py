"""Acceptance suite: one PASS/FAIL line per check, at fixed seeds chosen up front.

Run alone with ``pytest tests/test_acceptance.py -s -m acceptance``. The
matching suite dominates the runtime (about nine minutes on one core).
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from bvnpriors.cli import concentrated_stats
from bvnpriors.core import RHO, SuffStats, eta_from_sigma, suff_stats
from bvnpriors.coverage import (
    PivotalSpec,
    case_truth,
    coverage_hits,
    coverage_identity,
    cross_validation_suite,
    matching_suite,
)
from bvnpriors.priors import (
    PI_H,
    PI_IJ,
    PI_J,
    PI_RO,
    PI_RRHO,
    PI_RSIGMA,
    PI_RSIGMA_TILDE,
    PI_S,
    PiAB,
    acceptance_probability,
    parse_prior,
)
from bvnpriors.samplers import accept_reject_sample, long_run_acceptance, posterior_sample
from oracles import (
    FIVE_POINTS,
    RRHO_CDF_FROZEN,
    RRHO_CDF_POINTS,
    TABLE3_PUBLISHED,
    TABLE3_RHOS,
    THETA2_B0_N3,
    ecdf_sup_distance,
    g_rrho,
    rho_grid_posterior,
    theta2_identity,
)

pytestmark = pytest.mark.acceptance

SEED_EMPIRICAL_ACCEPTANCE = 1101
SEED_MATCHING = 20240501
SEED_ORACLE = 1105
SEED_LAWS = 1106
SEED_CASE_A = 1107
SEED_CASE_B = 2107
SEED_CROSS = 1108


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        return ok

    return emit


def test_acceptance_probabilities_reproduce_published_table(report):
    rhos = np.array(TABLE3_RHOS)
    specs = [parse_prior(tag) for tag in TABLE3_PUBLISHED]
    acceptance_probability(specs[0], rhos)  # warm-up
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        got = [acceptance_probability(s, rhos) for s in specs]
        best = min(best, time.perf_counter() - t0)
    err = max(float(np.max(np.abs(g - np.array(v)))) for g, v in zip(got, TABLE3_PUBLISHED.values()))
    ok = err < 1e-4 and best < 1e-3
    report("published acceptance table", ok, f"max |diff| {err:.2e} over 12 cells, {best * 1e6:.0f} us")
    assert ok


def test_empirical_acceptance_rates(report):
    rng = np.random.default_rng(SEED_EMPIRICAL_ACCEPTANCE)
    st = concentrated_stats(0.8, 10_000)
    t0 = time.perf_counter()
    diffs = {}
    for tag, vals in TABLE3_PUBLISHED.items():
        diffs[tag] = long_run_acceptance(parse_prior(tag), st, 100_000, rng) - vals[0]
    dt = time.perf_counter() - t0
    ok = all(abs(d) <= 0.02 for d in diffs.values()) and dt < 10
    detail = ", ".join(f"{k} {v:+.4f}" for k, v in diffs.items())
    report("empirical acceptance at r = 0.8", ok, f"{detail}; {dt:.1f} s")
    assert ok


@pytest.fixture(scope="module")
def matching_checks():
    return matching_suite(reps=20_000, rng=SEED_MATCHING)


def test_exact_matching_cells_at_upper_level(report, matching_checks):
    cells = [c for c in matching_checks if c.expect_match and math.isclose(c.result.level, 0.95)]
    bad = [c.name for c in cells if not c.passed]
    worst = max(cells, key=lambda c: abs(c.deviation_se))
    report("exact matching, level 0.95", not bad,
           f"{len(cells) - len(bad)}/{len(cells)} within 3 SE; worst {worst.name} {worst.deviation_se:+.2f} SE")
    assert len(cells) == 40
    assert not bad, bad


def test_exact_matching_cells_at_lower_level(report, matching_checks):
    cells = [c for c in matching_checks if c.expect_match and math.isclose(c.result.level, 0.05)]
    bad = [c.name for c in cells if not c.passed]
    worst = max(cells, key=lambda c: abs(c.deviation_se))
    report("exact matching, level 0.05", not bad,
           f"{len(cells) - len(bad)}/{len(cells)} within 3 SE; worst {worst.name} {worst.deviation_se:+.2f} SE")
    assert len(cells) == 40
    assert not bad, bad


def test_jeffreys_rho_coverage_is_off_and_theta2_identity(report, matching_checks):
    (j,) = [c for c in matching_checks if not c.expect_match]
    spec = PivotalSpec("theta2", PI_J.a, PI_J.b, 3)
    ident = coverage_identity(spec, 0.95, 1)
    oracle = theta2_identity(0, 3, 0.95)
    ok = (j.result.prior == PI_J and j.result.param == RHO and j.passed and j.deviation_se < -3
          and abs(ident - 0.553) <= 0.01 and abs(ident - THETA2_B0_N3) < 1e-9 and abs(oracle - THETA2_B0_N3) < 1e-9)
    report("non-matching detected", ok,
           f"{j.name} coverage {j.result.coverage:.4f} ({j.deviation_se:+.1f} SE); theta2 identity {ident:.6f}")
    assert ok


def test_rejection_sampler_matches_grid_oracle(report):
    grid, cdf = rho_grid_posterior(FIVE_POINTS, 1, 1, g_rrho)
    oracle_err = float(np.max(np.abs(np.interp(RRHO_CDF_POINTS, grid, cdf) - RRHO_CDF_FROZEN)))
    (_, _, rho), used = accept_reject_sample(PI_RRHO, suff_stats(FIVE_POINTS), 100_000, SEED_ORACLE)
    dist = ecdf_sup_distance(rho, grid, cdf)
    ok = dist < 0.01 and oracle_err < 1e-3
    report("accept-reject vs grid posterior", ok,
           f"sup |F_n - F| = {dist:.4f}; grid vs quadrature {oracle_err:.1e}; {used} proposals")
    assert ok


def test_precision_coordinate_laws(report):
    st = SuffStats(7, 0.4, -0.3, 3.2, 5.1, 0.62)
    rng = np.random.default_rng(SEED_LAWS)
    pvals = {}
    for a, b in [(1, 0), (2, 1), (1, 2), (1, 1)]:
        s = posterior_sample(PiAB(a, b), st, 100_000, rng)
        e = eta_from_sigma(s.sigma1, s.sigma2, s.rho)
        g1 = stats.gamma((st.n - a) / 2, scale=2 / st.s11)
        g2 = stats.gamma((st.n - b) / 2, scale=2 / (st.s22 * (1 - st.r**2)))
        resid = (e.eta3 + e.eta2 * st.r * math.sqrt(st.s22 / st.s11)) * math.sqrt(st.s11)
        pvals[(a, b)] = (
            stats.kstest(e.eta1**2, g1.cdf).pvalue,
            stats.kstest(e.eta2**2, g2.cdf).pvalue,
            stats.kstest(resid, stats.norm.cdf).pvalue,
        )
    lowest = min(min(v) for v in pvals.values())
    ok = lowest > 0.001
    report("gamma marginals and conditional normal", ok, f"smallest KS p-value {lowest:.4f} over 12 tests")
    assert ok


def _scan(prior, rhos, sigma_case, seed, reps, inner):
    rng = np.random.default_rng(seed)
    out = []
    for rho, child in zip(rhos, rng.spawn(len(rhos))):
        hits = coverage_hits(prior, RHO, case_truth(rho, sigma_case), 3, [0.95], reps, child, inner)[0]
        out.append(hits / reps)
    return np.array(out)


def test_scale_invariant_priors_give_same_coverage_in_both_cases(report):
    reps = 2000
    plans = [(p, (-0.9, 0.0, 0.5, 0.9), 4000) for p in (PI_J, PI_H, PI_IJ, PI_RO)]
    plans += [(p, (-0.9, 0.0, 0.9), 1000) for p in (PI_RRHO, PI_RSIGMA, PI_RSIGMA_TILDE, PI_S)]
    worst, bad = 0.0, []
    for prior, rhos, inner in plans:
        ca = _scan(prior, rhos, "a", SEED_CASE_A, reps, inner)
        cb = _scan(prior, rhos, "b", SEED_CASE_B, reps, inner)
        se = np.hypot(np.sqrt(ca * (1 - ca) / reps), np.sqrt(cb * (1 - cb) / reps))
        gap = np.abs(ca - cb)
        worst = max(worst, float(np.max(np.where(gap > 0, gap / np.maximum(se, 1e-12), 0.0))))
        bad += [f"{prior.name}@{r:g}" for r, g, s in zip(rhos, gap, se) if g > 3 * s]
    report("case a vs case b coverage", not bad, f"28 grid points, largest gap {worst:.2f} combined SE")
    assert not bad, bad


def test_data_level_coverage_matches_pivotal_identities(report):
    items = cross_validation_suite(rng=SEED_CROSS)
    bad = [f"{w}/{p.name}" for w, p, _, _, ok in items if not ok]
    worst = max(abs(cc.data.coverage - cc.identity) / max(cc.combined_stderr, 1e-12) for _, _, _, cc, _ in items)
    report("data-level vs pivotal coverage", not bad, f"{len(items) - len(bad)}/{len(items)} agree; worst {worst:.2f} SE")
    assert len(items) == 14
    assert not bad, bad
