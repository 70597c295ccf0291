import math

import numpy as np
import pytest
from scipy import stats

from bvnpriors.core import (
    MU1,
    RHO,
    THETA,
    BvnParams,
    DegenerateDataError,
    DMean,
    DVar,
    InvalidParameterError,
    ParamFn,
    SuffStats,
    eta_from_sigma,
    log_marginal_likelihood,
    param_value,
    parse_param,
    psi,
    psi_inv,
    sample_bvn,
    sigma_from_eta,
    suff_stats,
)


def test_params_validation():
    BvnParams(0, 0, 1, 2, 0.3)
    with pytest.raises(InvalidParameterError):
        BvnParams(0, 0, -1, 1, 0)
    with pytest.raises(InvalidParameterError):
        BvnParams(0, 0, 1, 0, 0)
    with pytest.raises(InvalidParameterError):
        BvnParams(0, 0, 1, 1, 1.0)


def test_covariance():
    p = BvnParams(1, 2, 2.0, 3.0, -0.5)
    np.testing.assert_allclose(p.covariance(), [[4, -3], [-3, 9]])


def test_suff_stats_match_numpy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(20, 2)) @ np.array([[1.0, 0.4], [0.0, 2.0]])
    st = suff_stats(x)
    c = np.cov(x.T, ddof=0) * len(x)
    assert st.n == 20
    assert st.xbar1 == pytest.approx(x[:, 0].mean())
    assert st.s11 == pytest.approx(c[0, 0])
    assert st.s22 == pytest.approx(c[1, 1])
    assert st.r == pytest.approx(np.corrcoef(x.T)[0, 1])
    assert st.s12 == pytest.approx(c[0, 1])
    assert st.det == pytest.approx(np.linalg.det(c))


def test_collinear_sample_rejected():
    with pytest.raises(DegenerateDataError, match=r"\|r\| = 1"):
        suff_stats([[1, 2], [2, 4], [3, 6]])


def test_constant_column_rejected():
    with pytest.raises(DegenerateDataError, match="zero variance"):
        suff_stats([[1, 5], [2, 5], [3, 5]])


def test_too_few_rows():
    with pytest.raises(DegenerateDataError):
        suff_stats([[1, 2], [2, 1]])


def test_unchecked_clips_r():
    st = SuffStats.unchecked(3, 0.0, 0.0, 1.0, 1.0, np.array([1.0, -1.0, 0.2]))
    assert np.all(np.abs(st.r) < 1)
    assert st.r[2] == 0.2


def test_eta_round_trip():
    e = eta_from_sigma(1.5, 0.7, -0.6)
    s1, s2, rho = sigma_from_eta(e)
    assert (s1, s2, rho) == pytest.approx((1.5, 0.7, -0.6))
    assert e.eta1 == pytest.approx(1 / 1.5)
    assert e.eta2 == pytest.approx(1 / (0.7 * 0.8))
    assert e.eta3 == pytest.approx(0.6 / (1.5 * 0.8))


def test_eta_is_cholesky_of_precision():
    # Sigma^{-1} = L L' with L = [[eta1, 0], [eta3, eta2]] read row-wise as
    # eta1^2 + eta3^2, eta2 eta3, eta2^2
    p = BvnParams(0, 0, 1.3, 0.4, 0.45)
    e = eta_from_sigma(p.sigma1, p.sigma2, p.rho)
    prec = np.linalg.inv(p.covariance())
    np.testing.assert_allclose(prec[0, 0], e.eta1**2 + e.eta3**2)
    np.testing.assert_allclose(prec[1, 1], e.eta2**2)
    np.testing.assert_allclose(prec[0, 1], e.eta2 * e.eta3)


def test_psi():
    y = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(psi_inv(psi(y)), y, atol=1e-12)
    assert psi(0.0) == 0.0


@pytest.mark.parametrize(
    "tag, expected",
    [
        ("mu1", 1.0),
        ("mu2", -2.0),
        ("mu_diff", 3.0),
        ("sigma1", 2.0),
        ("sigma2", 0.5),
        ("rho", 0.6),
        ("theta1", 0.6 * 0.5 / 2.0),
        ("theta2", 0.25 * 0.64),
        ("theta3", 4 * 0.25 * 0.64),
        ("theta4", 0.5 * 0.8 / 2.0),
        ("theta5", 0.5),
        ("theta6", 4 * 0.25),
        ("theta7", 0.25),
        ("theta8", -4.0),
        ("theta9", 0.6),
        ("theta10", 4 + 0.25 - 2 * 0.6 * 2 * 0.5),
    ],
)
def test_param_values(tag, expected):
    p = BvnParams(1.0, -2.0, 2.0, 0.5, 0.6)
    assert float(param_value(p, ParamFn(tag))) == pytest.approx(expected)


def test_eigenvalues_match_linalg():
    p = BvnParams(0, 0, 1.7, 0.9, -0.35)
    ev = np.linalg.eigvalsh(p.covariance())
    assert param_value(p, ParamFn("lambda1")) == pytest.approx(ev[1])
    assert param_value(p, ParamFn("lambda2")) == pytest.approx(ev[0])


def test_direction_functions():
    p = BvnParams(1.0, 2.0, 1.0, 2.0, 0.5)
    d = (1.0, -1.0)
    assert param_value(p, DMean(d)) == pytest.approx(-1.0)
    assert param_value(p, DVar(d)) == pytest.approx(np.array(d) @ p.covariance() @ np.array(d))
    with pytest.raises(InvalidParameterError):
        DVar((0.0, 1.0))
    with pytest.raises(InvalidParameterError):
        ParamFn("rho", (1.0, 0.0))


def test_parse_param():
    assert parse_param("rho") == RHO
    assert parse_param("THETA3") == THETA[3]
    assert parse_param("mu-diff") == ParamFn("mu_diff")
    assert parse_param("dvar:1:-1") == DVar((1, -1))
    assert parse_param("mu1") == MU1
    with pytest.raises(InvalidParameterError):
        parse_param("theta12")


def test_supports():
    assert RHO.support == (-1.0, 1.0)
    assert ParamFn("theta3").support == (0.0, math.inf)
    assert MU1.support == (-math.inf, math.inf)


def test_marginal_likelihood_matches_direct_integration():
    # integrating the means out of the normal likelihood leaves
    # loglik(xbar) + 0.5 log|Sigma| up to a constant
    rng = np.random.default_rng(4)
    x = rng.normal(size=(7, 2))
    st = suff_stats(x)
    xbar = x.mean(axis=0)

    def direct(s1, s2, rho):
        cov = BvnParams(0, 0, s1, s2, rho).covariance()
        return stats.multivariate_normal(xbar, cov).logpdf(x).sum() + 0.5 * np.log(np.linalg.det(cov))

    pts = [(1.0, 1.0, 0.0), (0.5, 2.0, 0.3), (1.4, 0.8, -0.7)]
    ours = [log_marginal_likelihood(st, *p) for p in pts]
    ref = [direct(*p) for p in pts]
    np.testing.assert_allclose(np.diff(ours), np.diff(ref), rtol=1e-10)


def test_sample_bvn_moments():
    p = BvnParams(1.0, -1.0, 2.0, 0.5, 0.7)
    x = sample_bvn(p, 200_000, np.random.default_rng(1))
    assert x.shape == (200_000, 2)
    np.testing.assert_allclose(x.mean(axis=0), [1, -1], atol=0.02)
    np.testing.assert_allclose(np.cov(x.T), p.covariance(), rtol=0.02, atol=0.01)
