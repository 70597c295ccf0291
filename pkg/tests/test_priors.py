import math

import numpy as np
import pytest

from bvnpriors.priors import (
    PI_H,
    PI_IJ,
    PI_J,
    PI_RLAMBDA,
    PI_RO,
    PI_RRHO,
    PI_RSIGMA,
    PI_RSIGMA_TILDE,
    PI_S,
    REJECTION_FAMILY,
    PiAB,
    PolePriorError,
    PriorSpec,
    UnsupportedPriorError,
    acceptance_probability,
    log_prior_density,
    log_ratio_to_ij,
    parse_prior,
    ratio_to_ij,
    rejection_bound,
)
from oracles import TABLE3_PUBLISHED, TABLE3_RHOS


def test_named_ab_members():
    assert (PI_J.a, PI_J.b) == (1.0, 0.0)
    assert (PI_H.a, PI_H.b) == (1.0, 2.0)
    assert (PI_IJ.a, PI_IJ.b) == (2.0, 1.0)
    assert (PI_RO.a, PI_RO.b) == (1.0, 1.0)
    assert PI_H.name == "right-haar"
    assert PiAB(1.5, 0.25).name == "ab:1.5:0.25"


@pytest.mark.parametrize(
    "text, spec",
    [
        ("jeffreys", PI_J),
        ("right-haar", PI_H),
        ("ind-jeffreys", PI_IJ),
        ("ro", PI_RO),
        ("r-rho", PI_RRHO),
        ("r-sigma", PI_RSIGMA),
        ("r-sigma-tilde", PI_RSIGMA_TILDE),
        ("r-lambda", PI_RLAMBDA),
        ("scale", PI_S),
        ("ab:1:2", PI_H),
        ("AB:0.5:1.5", PiAB(0.5, 1.5)),
    ],
)
def test_parse_prior(text, spec):
    assert parse_prior(text) == spec


def test_parse_prior_rejects_unknown():
    with pytest.raises(ValueError):
        parse_prior("flat")
    with pytest.raises(ValueError):
        parse_prior("ab:1")
    with pytest.raises(ValueError):
        PriorSpec("r-rho", 1, 2)


def test_ab_density_form():
    s1, s2, rho = 1.7, 0.6, 0.3
    for a, b in [(1, 0), (1, 2), (2, 1), (0.5, 1.5)]:
        expected = -(3 - a) * math.log(s1) - (2 - b) * math.log(s2) - (2 - b / 2) * math.log(1 - rho**2)
        assert log_prior_density(PiAB(a, b), s1, s2, rho) == pytest.approx(expected)


@pytest.mark.parametrize("spec", REJECTION_FAMILY)
def test_ratio_is_density_ratio(spec):
    rng = np.random.default_rng(0)
    s1, s2 = rng.uniform(0.2, 3, 50), rng.uniform(0.2, 3, 50)
    rho = rng.uniform(-0.99, 0.99, 50)
    direct = np.exp(log_prior_density(spec, s1, s2, rho) - log_prior_density(PI_IJ, s1, s2, rho))
    np.testing.assert_allclose(direct, ratio_to_ij(spec, rho), rtol=1e-12)
    np.testing.assert_allclose(np.exp(log_ratio_to_ij(spec, s1, s2, rho)), direct, rtol=1e-12)


def test_ab_log_ratio():
    s1, s2, rho = 1.3, 0.4, -0.5
    spec = PiAB(1, 2)
    direct = log_prior_density(spec, s1, s2, rho) - log_prior_density(PI_IJ, s1, s2, rho)
    assert log_ratio_to_ij(spec, s1, s2, rho) == pytest.approx(direct)


@pytest.mark.parametrize("spec", REJECTION_FAMILY)
def test_acceptance_even_and_peaked_at_zero(spec):
    rho = np.linspace(-0.999, 0.999, 2001)
    acc = acceptance_probability(spec, rho)
    np.testing.assert_allclose(acc, acc[::-1], rtol=1e-12)
    assert acceptance_probability(spec, 0.0) == pytest.approx(1.0)
    assert np.all(acc <= 1.0 + 1e-12)
    assert rejection_bound(spec) == pytest.approx(np.max(ratio_to_ij(spec, rho)), rel=1e-5)


def test_rejection_bounds():
    assert rejection_bound(PI_RSIGMA_TILDE) == pytest.approx(1 / math.sqrt(2))
    for spec in (PI_RRHO, PI_RSIGMA, PI_S):
        assert rejection_bound(spec) == 1.0
    with pytest.raises(UnsupportedPriorError):
        rejection_bound(PI_RLAMBDA)
    with pytest.raises(UnsupportedPriorError):
        ratio_to_ij(PI_H, 0.3)


@pytest.mark.parametrize("tag", sorted(TABLE3_PUBLISHED))
def test_published_acceptance_cells(tag):
    spec = parse_prior(tag)
    got = acceptance_probability(spec, np.array(TABLE3_RHOS))
    # printed values are 4-decimal truncations or roundings
    np.testing.assert_allclose(got, TABLE3_PUBLISHED[tag], atol=1e-4)


def test_rlambda_pole():
    with pytest.raises(PolePriorError):
        log_prior_density(PI_RLAMBDA, 1.0, 1.0, 0.0)
    assert np.isfinite(log_prior_density(PI_RLAMBDA, 1.0, 1.0, 0.1))


def test_scale_invariance_flags():
    assert all(p.scale_invariant for p in (PI_J, PI_H, PI_IJ, PI_RO, PI_S, *REJECTION_FAMILY))
    assert not PI_RLAMBDA.scale_invariant
