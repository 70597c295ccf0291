"""Posterior simulation for the prior catalog.

* ``ab`` family: exact constructive draws built from independent normal and
  chi-squared variates.
* r-rho, r-sigma, r-sigma-tilde, scale: accept-reject with the independence
  Jeffreys posterior as the envelope.
* r-lambda: independence Metropolis-Hastings with the same proposal.

The means always have a flat prior, so given a scale draw they are
N2(xbar, Sigma / n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import BvnParams, EtaParams, SuffStats, sigma_from_eta
from .priors import (
    PI_RLAMBDA,
    REJECTION_FAMILY,
    PriorSpec,
    UnsupportedPriorError,
    acceptance_probability,
    log_ratio_to_ij,
)

MAX_PROPOSALS = 10**6
DEFAULT_BURN_IN = 1000


class PathologicalDataError(RuntimeError):
    """Accept-reject exhausted its proposal budget without accepting."""


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def chi2(rng: np.random.Generator, df, size=None):
    """Chi-squared variates for real ``df > 0`` (numpy draws 2 * Gamma(df / 2))."""
    if np.any(np.asarray(df) <= 0):
        raise ValueError(f"chi-squared degrees of freedom must be positive, got {df}")
    if np.ndim(df) == 0 and df == 1:
        # the squared normal is several times faster than the gamma(1/2) path
        return rng.standard_normal(size) ** 2
    if np.ndim(df) == 0 and df == 2:
        return 2.0 * rng.standard_exponential(size)
    return rng.chisquare(df, size)


@dataclass(frozen=True)
class PosteriorSample:
    """Posterior draws stored column-wise; ``sample[i]`` is one draw."""

    mu1: np.ndarray
    mu2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    rho: np.ndarray

    def __len__(self):
        return int(np.shape(self.sigma1)[0])

    def __getitem__(self, i) -> BvnParams:
        return BvnParams(
            float(self.mu1[i]), float(self.mu2[i]), float(self.sigma1[i]),
            float(self.sigma2[i]), float(self.rho[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def as_params(self) -> BvnParams:
        return BvnParams(self.mu1, self.mu2, self.sigma1, self.sigma2, self.rho)

    def to_array(self) -> np.ndarray:
        return np.column_stack([self.mu1, self.mu2, self.sigma1, self.sigma2, self.rho])

    @classmethod
    def empty(cls):
        e = np.empty(0)
        return cls(e, e, e, e, e)


@dataclass(frozen=True)
class ConstructiveDraw:
    """A constructive scale draw together with the variates that produced it."""

    sigma1: np.ndarray
    sigma2: np.ndarray
    rho: np.ndarray
    z3: np.ndarray
    chi_a: np.ndarray
    chi_b: np.ndarray


@dataclass(frozen=True)
class McmcDiagnostics:
    acceptance_rate: float
    chain_length: int
    burn_in: int
    accepted: int
    proposed: int


# ---------------------------------------------------------------------------
# Constructive posteriors for the ab family

def _check_df(stats: SuffStats, a, b):
    if stats.n - a <= 0 or stats.n - b <= 0:
        raise ValueError(f"n - a and n - b must be positive (n={stats.n}, a={a}, b={b})")


def eta_from_variates(stats: SuffStats, z3, chi_a, chi_b) -> EtaParams:
    rs = stats.r / np.sqrt(1.0 - stats.r**2)
    rt11 = np.sqrt(stats.s11)
    eta1 = np.sqrt(chi_a / stats.s11)
    eta2 = np.sqrt(chi_b / (stats.s22 * (1.0 - stats.r**2)))
    eta3 = z3 / rt11 - np.sqrt(chi_b) / rt11 * rs
    return EtaParams(eta1, eta2, eta3)


def scale_from_variates(stats: SuffStats, z3, chi_a, chi_b):
    """(sigma1, sigma2, rho) as explicit functions of (Z3, chi2_{n-a}, chi2_{n-b})."""
    return sigma_from_eta(eta_from_variates(stats, z3, chi_a, chi_b))


def mean_from_variates(stats: SuffStats, z1, z2, z3, chi_a, chi_b):
    """(mu1, mu2) sharing (Z3, chi_a, chi_b) with the paired scale draw.

    Derived as xbar + L z / sqrt(n) with L the Cholesky factor of Sigma
    written in the eta coordinates: sigma1 = 1/eta1, the regression slope
    rho sigma2 = -eta3 / (eta1 eta2) and the residual sd 1/eta2.
    """
    rn = math.sqrt(stats.n)
    q1 = z1 / np.sqrt(chi_a)
    mu1 = stats.xbar1 + q1 * np.sqrt(stats.s11) / rn
    mu2 = (
        stats.xbar2
        + q1 * stats.r * np.sqrt(stats.s22) / rn
        + (z2 - z3 * q1) / np.sqrt(chi_b) * np.sqrt(stats.s22 * (1.0 - stats.r**2)) / rn
    )
    return mu1, mu2


def constructive_scale_draw(stats: SuffStats, a, b, rng, size=None) -> ConstructiveDraw:
    """Exact draw(s) of (sigma1, sigma2, rho) under the ab prior."""
    _check_df(stats, a, b)
    rng = make_rng(rng)
    z3 = rng.standard_normal(size)
    chi_a = chi2(rng, stats.n - a, size)
    chi_b = chi2(rng, stats.n - b, size)
    s1, s2, rho = scale_from_variates(stats, z3, chi_a, chi_b)
    return ConstructiveDraw(s1, s2, rho, z3, chi_a, chi_b)


def constructive_mean_draw(stats: SuffStats, a, b, draw: ConstructiveDraw, rng):
    _check_df(stats, a, b)
    rng = make_rng(rng)
    shape = np.shape(draw.z3)
    z1 = rng.standard_normal(shape or None)
    z2 = rng.standard_normal(shape or None)
    return mean_from_variates(stats, z1, z2, draw.z3, draw.chi_a, draw.chi_b)


def mean_given_scale_draw(stats: SuffStats, sigma1, sigma2, rho, rng):
    """Draw (mu1, mu2) from N2(xbar, Sigma / n)."""
    rng = make_rng(rng)
    shape = np.broadcast(sigma1, sigma2, rho).shape
    z1 = rng.standard_normal(shape or None)
    z2 = rng.standard_normal(shape or None)
    rn = math.sqrt(stats.n)
    mu1 = stats.xbar1 + sigma1 * z1 / rn
    mu2 = stats.xbar2 + sigma2 * (rho * z1 + np.sqrt(1.0 - rho * rho) * z2) / rn
    return mu1, mu2


# ---------------------------------------------------------------------------
# Accept-reject

def _require_rejection(spec: PriorSpec):
    if spec not in REJECTION_FAMILY:
        raise UnsupportedPriorError(f"{spec.name} is not sampled by accept-reject")


def accept_reject_draw(spec: PriorSpec, stats: SuffStats, rng):
    """One accepted scale draw and the number of proposals it took."""
    _require_rejection(spec)
    rng = make_rng(rng)
    for used in range(1, MAX_PROPOSALS + 1):
        d = constructive_scale_draw(stats, 2, 1, rng)
        if rng.random() <= acceptance_probability(spec, d.rho):
            return (float(d.sigma1), float(d.sigma2), float(d.rho)), used
    raise PathologicalDataError(f"no acceptance in {MAX_PROPOSALS} proposals")


def accept_reject_sample(spec: PriorSpec, stats: SuffStats, n_draws: int, rng):
    """``n_draws`` accepted scale draws, proposed in vectorized batches.

    Returns ``((sigma1, sigma2, rho), proposals_used)`` where the count stops at
    the final accepted proposal, exactly as a one-at-a-time loop would.
    """
    _require_rejection(spec)
    rng = make_rng(rng)
    out = [[], [], []]
    have = 0
    used = 0
    since_last = 0
    rate = 0.5
    while have < n_draws:
        m = int(min(max(64, 1.2 * (n_draws - have) / rate), 4 * 10**6))
        d = constructive_scale_draw(stats, 2, 1, rng, m)
        acc = rng.random(m) <= acceptance_probability(spec, d.rho)
        hits = np.flatnonzero(acc)
        need = n_draws - have
        if hits.size == 0:
            used += m
            since_last += m
            if since_last >= MAX_PROPOSALS:
                raise PathologicalDataError(f"no acceptance in {since_last} proposals")
            rate = max(rate / 4, 1e-6)
            continue
        take = hits[:need]
        used += int(take[-1]) + 1 if take.size == need else m
        since_last = m - 1 - int(hits[-1])
        for lst, arr in zip(out, (d.sigma1, d.sigma2, d.rho)):
            lst.append(arr[take])
        have += take.size
        rate = max(hits.size / m, 1e-6)
    s1, s2, rho = (np.concatenate(x) if x else np.empty(0) for x in out)
    return (s1, s2, rho), used


def long_run_acceptance(spec: PriorSpec, stats: SuffStats, n_proposals: int, rng) -> float:
    """Fraction of ``n_proposals`` envelope draws that pass the rejection step."""
    _require_rejection(spec)
    rng = make_rng(rng)
    d = constructive_scale_draw(stats, 2, 1, rng, n_proposals)
    return float(np.mean(rng.random(n_proposals) <= acceptance_probability(spec, d.rho)))


# ---------------------------------------------------------------------------
# Independence Metropolis-Hastings

def mh_chain(spec: PriorSpec, stats: SuffStats, chain_length: int, burn_in: int, rng, thin: int = 1):
    """Independence MH targeting the posterior under ``spec``.

    Proposals come from the independence Jeffreys posterior, so the
    likelihood cancels and the move probability is
    min(1, w(proposal) / w(current)) with w = pi / pi_IJ.
    Returns ``((sigma1, sigma2, rho), diagnostics)`` for the post-burn-in states.
    """
    if not chain_length > burn_in >= 0:
        raise ValueError("need chain_length > burn_in >= 0")
    rng = make_rng(rng)
    d = constructive_scale_draw(stats, 2, 1, rng, chain_length)
    log_u = np.log(rng.random(chain_length))
    with np.errstate(divide="ignore"):
        log_w = log_ratio_to_ij(spec, d.sigma1, d.sigma2, d.rho)
    idx, acc = kernels.imh_states(log_w[None, :], log_u[None, :])
    keep = idx[0, burn_in::thin]
    moves = chain_length - 1
    diag = McmcDiagnostics(
        acceptance_rate=float(acc[0]) / moves if moves else 1.0,
        chain_length=chain_length,
        burn_in=burn_in,
        accepted=int(acc[0]),
        proposed=moves,
    )
    return (d.sigma1[keep], d.sigma2[keep], d.rho[keep]), diag


def mh_rlambda_chain(stats: SuffStats, chain_length: int, burn_in: int, rng, thin: int = 1):
    return mh_chain(PI_RLAMBDA, stats, chain_length, burn_in, rng, thin)


# ---------------------------------------------------------------------------

def posterior_sample(
    spec: PriorSpec,
    stats: SuffStats,
    n_draws: int,
    rng,
    burn_in: int = DEFAULT_BURN_IN,
    thin: int = 1,
) -> PosteriorSample:
    """Draw ``n_draws`` joint posterior samples of (mu1, mu2, sigma1, sigma2, rho)."""
    rng = make_rng(rng)
    if n_draws < 0:
        raise ValueError("n_draws must be >= 0")
    if n_draws == 0:
        return PosteriorSample.empty()
    if spec.is_ab:
        d = constructive_scale_draw(stats, spec.a, spec.b, rng, n_draws)
        mu1, mu2 = constructive_mean_draw(stats, spec.a, spec.b, d, rng)
        return PosteriorSample(mu1, mu2, d.sigma1, d.sigma2, d.rho)
    if spec in REJECTION_FAMILY:
        (s1, s2, rho), _ = accept_reject_sample(spec, stats, n_draws, rng)
    elif spec == PI_RLAMBDA:
        (s1, s2, rho), _ = mh_chain(spec, stats, burn_in + thin * n_draws, burn_in, rng, thin)
        s1, s2, rho = s1[:n_draws], s2[:n_draws], rho[:n_draws]
    else:  # pragma: no cover
        raise UnsupportedPriorError(spec.name)
    mu1, mu2 = mean_given_scale_draw(stats, s1, s2, rho, rng)
    return PosteriorSample(mu1, mu2, s1, s2, rho)

