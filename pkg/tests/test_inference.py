import math

import numpy as np
import pytest

from bvnpriors.core import MU1, MU2, RHO, SIGMA1, DVar, SuffStats, parse_param
from bvnpriors.inference import (
    NotInTableError,
    credible_interval,
    empirical_quantile,
    in_table1,
    quantile_index,
    table1_constructive,
)
from bvnpriors.priors import PI_H, PI_IJ, PI_J, PI_RO, PI_RRHO, PiAB

STATS = SuffStats(8, 0.3, -0.2, 5.0, 2.5, 0.45)


@pytest.mark.parametrize("q, n, k", [(0.95, 4000, 3799), (0.05, 4000, 199), (0.5, 3, 1), (0.999, 10, 9), (1e-9, 10, 0)])
def test_quantile_index(q, n, k):
    assert quantile_index(q, n) == k


def test_quantile_index_rejects_bad_level():
    for q in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            quantile_index(q, 10)


def test_empirical_quantile_is_order_statistic():
    x = np.random.default_rng(0).normal(size=1001)
    assert empirical_quantile(x, 0.9) == np.sort(x)[quantile_index(0.9, 1001)]
    assert empirical_quantile(x, 0.9) in x
    with pytest.raises(ValueError):
        empirical_quantile([], 0.5)


def test_quantile_equivariance_exact():
    x = np.random.default_rng(1).normal(size=4000)
    for g in (np.exp, np.tanh, lambda v: 3 * v + 1):
        assert empirical_quantile(g(x), 0.95) == g(empirical_quantile(x, 0.95))


def test_interval_sides():
    x = np.arange(1, 101, dtype=float)
    up = credible_interval(x, SIGMA1, 0.95, "upper-open")
    assert up.bounds == (0.0, 95.0)
    lo = credible_interval(x, SIGMA1, 0.95, "lower-open")
    assert lo.bounds == (5.0, math.inf)
    two = credible_interval(x, MU1, 0.9, "two-sided")
    assert two.bounds == (5.0, 95.0)
    assert 50 in two and 96 not in two
    assert credible_interval(x / 101, RHO, 0.95).lower == -1.0
    with pytest.raises(ValueError):
        credible_interval(x, MU1, 0.9, "left")
    with pytest.raises(ValueError):
        credible_interval([], MU1, 0.9)


def test_table_membership():
    assert in_table1(MU1, PI_J) and in_table1(MU1, PI_H) and in_table1(MU1, PiAB(1, 0.3))
    assert not in_table1(MU1, PI_IJ)
    assert in_table1(MU2, PI_J) and not in_table1(MU2, PI_H)
    assert in_table1(RHO, PI_H) and not in_table1(RHO, PI_J)
    assert in_table1(parse_param("theta3"), PI_IJ) and in_table1(parse_param("theta3"), PI_H)
    assert not in_table1(parse_param("theta3"), PI_RO)
    assert in_table1(DVar((1.0, 1.0)), PI_J) and not in_table1(DVar((1.0, 1.0)), PI_H)
    assert not in_table1(parse_param("lambda1"), PI_J)
    assert not in_table1(RHO, PI_RRHO)


def test_not_in_table_raises():
    with pytest.raises(NotInTableError):
        table1_constructive(RHO, STATS, PI_J, 10, 0)
    with pytest.raises(NotInTableError):
        table1_constructive(DVar((1.0, 0.0)), STATS, PI_H, 10, 0)


def test_constructive_sigma1_is_inverse_chi():
    from scipy import stats as sps

    x = table1_constructive(SIGMA1, STATS, PI_J, 40_000, np.random.default_rng(2))
    assert sps.kstest(STATS.s11 / x**2, sps.chi2(STATS.n - 1).cdf).pvalue > 0.001
