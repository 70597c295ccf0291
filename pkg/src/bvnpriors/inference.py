"""Posterior quantiles, credible intervals and closed-form marginal posteriors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ParamFn, SuffStats, param_value, psi
from .priors import PI_H, PI_IJ, PI_J, PriorSpec
from .samplers import PosteriorSample, chi2, make_rng

SIDES = ("upper-open", "lower-open", "two-sided")


class NotInTableError(ValueError):
    """No closed-form constructive posterior for this (parameter, prior) pair."""


def quantile_index(q: float, n: int) -> int:
    """0-based index of the ceil(q n)-th order statistic."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    # round away representation noise such as 0.95 * 4000 = 3800.0000000000005
    k = math.ceil(round(q * n, 9))
    return min(max(k, 1), n) - 1


def empirical_quantile(samples, q: float) -> float:
    """Inverse empirical CDF: the ceil(q N)-th smallest sample, no interpolation.

    With this convention ``empirical_quantile(g(x), q) == g(empirical_quantile(x, q))``
    holds exactly for any nondecreasing ``g``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical_quantile of an empty sample")
    k = quantile_index(q, x.size)
    return float(np.partition(x, k)[k])


def pushforward(samples: PosteriorSample, f: ParamFn) -> np.ndarray:
    return np.asarray(param_value(samples.as_params(), f), dtype=float)


@dataclass(frozen=True)
class CredibleInterval:
    """Credible interval for one parameter.

    ``upper-open`` is the one-sided interval (lower edge of the parameter space,
    posterior ``level`` quantile); ``lower-open`` runs from the ``1 - level``
    quantile to the upper edge; ``two-sided`` is equal-tailed.
    """

    param: ParamFn
    level: float
    side: str
    lower: float
    upper: float

    @property
    def bounds(self) -> tuple[float, float]:
        return self.lower, self.upper

    def __contains__(self, value) -> bool:
        return self.lower < value < self.upper


def credible_interval(samples, param: ParamFn, level: float, side: str = "upper-open") -> CredibleInterval:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("credible interval from an empty sample")
    lo_edge, hi_edge = param.support
    if side == "upper-open":
        lo, hi = lo_edge, empirical_quantile(x, level)
    elif side == "lower-open":
        lo, hi = empirical_quantile(x, 1.0 - level), hi_edge
    elif side == "two-sided":
        tail = 0.5 * (1.0 - level)
        lo, hi = empirical_quantile(x, tail), empirical_quantile(x, 1.0 - tail)
    else:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    return CredibleInterval(param, level, side, lo, hi)


# ---------------------------------------------------------------------------
# Closed-form marginal posteriors for exact matching priors

def _a_is_one(p: PriorSpec) -> bool:
    return p.is_ab and p.a == 1.0


def _b_is_two(p: PriorSpec) -> bool:
    return p.is_ab and p.b == 2.0


# parameter tag -> predicate on the prior
TABLE1_PRIORS = {
    "mu1": _a_is_one,
    "mu2": lambda p: p == PI_J,
    "dmean": lambda p: p == PI_J,
    "sigma1": _a_is_one,
    "rho": lambda p: p == PI_H,
    "eta3": _b_is_two,
    "theta1": _b_is_two,
    "theta2": _b_is_two,
    "theta3": lambda p: p in (PI_H, PI_IJ),
    "theta4": lambda p: p == PI_H,
    "theta5": _a_is_one,
    "dvar": lambda p: p == PI_J,
}


def in_table1(param: ParamFn, prior: PriorSpec) -> bool:
    check = TABLE1_PRIORS.get(param.tag)
    return bool(check and check(prior))


def table1_constructive(param: ParamFn, stats: SuffStats, prior: PriorSpec, n_draws: int, rng) -> np.ndarray:
    """Simulate the closed-form marginal posterior of ``param`` directly.

    Only (parameter, prior) pairs with exact frequentist matching are
    available; everything else raises :class:`NotInTableError`. The draws use
    their own chi-squared variates and never touch the joint samplers.
    """
    if not in_table1(param, prior):
        raise NotInTableError(f"no closed-form posterior for {param.name} under {prior.name}")
    rng = make_rng(rng)
    n = stats.n
    t = param.tag
    s11, s22, r = stats.s11, stats.s22, stats.r
    rn = math.sqrt(n)
    rs = r / math.sqrt(1.0 - r * r)
    if t == "mu1":
        z, c1 = rng.standard_normal(n_draws), chi2(rng, n - 1, n_draws)
        return stats.xbar1 + z / np.sqrt(c1) * math.sqrt(s11 / n)
    if t == "mu2":
        z, c1 = rng.standard_normal(n_draws), chi2(rng, n - 1, n_draws)
        return stats.xbar2 + z / np.sqrt(c1) * math.sqrt(s22 / n)
    if t == "dmean":
        d1, d2 = param.d
        dsd = d1 * d1 * s11 + 2 * d1 * d2 * stats.s12 + d2 * d2 * s22
        z, c1 = rng.standard_normal(n_draws), chi2(rng, n - 1, n_draws)
        return d1 * stats.xbar1 + d2 * stats.xbar2 + z / np.sqrt(c1) * math.sqrt(dsd / n)
    if t == "sigma1":
        return np.sqrt(s11 / chi2(rng, n - 1, n_draws))
    if t == "rho":
        z, c1, c2 = rng.standard_normal(n_draws), chi2(rng, n - 1, n_draws), chi2(rng, n - 2, n_draws)
        return psi(-z / np.sqrt(c1) + np.sqrt(c2 / c1) * rs)
    if t == "eta3":
        z, c2 = rng.standard_normal(n_draws), chi2(rng, n - 2, n_draws)
        return z / math.sqrt(s11) - np.sqrt(c2) / math.sqrt(s11) * rs
    if t == "theta1":
        z, c2 = rng.standard_normal(n_draws), chi2(rng, n - 2, n_draws)
        return r * math.sqrt(s22 / s11) - z / np.sqrt(c2) * math.sqrt((1 - r * r) * s22 / s11)
    if t == "theta2":
        return s22 * (1 - r * r) / chi2(rng, n - 2, n_draws)
    if t == "theta3":
        c1, c2 = chi2(rng, n - 1, n_draws), chi2(rng, n - 2, n_draws)
        return stats.det / (c1 * c2)
    if t == "theta4":
        c1, c2 = chi2(rng, n - 1, n_draws), chi2(rng, n - 2, n_draws)
        return np.sqrt(c1 / c2) * math.sqrt(s22 * (1 - r * r) / s11)
    if t == "theta5":
        z, c1 = rng.standard_normal(n_draws), chi2(rng, n - 1, n_draws)
        return z / rn + stats.xbar1 * np.sqrt(c1) / math.sqrt(s11)
    if t == "dvar":
        d1, d2 = param.d
        dsd = d1 * d1 * s11 + 2 * d1 * d2 * stats.s12 + d2 * d2 * s22
        return dsd / chi2(rng, n - 1, n_draws)
    raise NotInTableError(t)  # pragma: no cover
