"""Frequentist coverage of one-sided credible intervals.

Two independent routes estimate the same probability:

* :func:`simulate_coverage` simulates datasets from a true parameter point,
  computes the posterior quantile of the parameter from ``inner_draws``
  posterior draws, and counts how often the truth falls below it.
* :func:`coverage_identity` evaluates the equivalent probability written
  purely in terms of independent normal and chi-squared variables, without
  data or posterior sampling.

Replications run in fixed-size blocks, each with its own child generator
spawned from the master one, so results depend only on (seed, reps) and not
on the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import kernels
from .core import (
    ETA3,
    MU1,
    RHO,
    SIGMA1,
    THETA,
    BvnParams,
    ParamFn,
    SuffStats,
    param_value,
    psi_inv,
)
from .inference import quantile_index
from .priors import (
    PI_H,
    PI_IJ,
    PI_J,
    PI_RLAMBDA,
    REJECTION_FAMILY,
    PiAB,
    PriorSpec,
    UnsupportedPriorError,
    log_ratio_to_ij,
    ratio_to_ij,
)
from .samplers import (
    DEFAULT_BURN_IN,
    chi2,
    make_rng,
    mean_given_scale_draw,
    scale_from_variates,
)

DEFAULT_INNER_DRAWS = 4000
FIXED_INNER_DRAWS = 10**6
SIGMA_CASES = {"a": (1.0, 1.0), "b": (2.0, 1.0)}

# Envelope size per accepted draw for the rejection family; rows that come
# up short are topped up, so these only affect speed.
_PROPOSAL_FACTOR = {"r-rho": 2.2, "r-sigma": 1.8, "r-sigma-tilde": 2.0, "scale": 4.5}
_BLOCK_VALUES = 10**6
_MAX_PROPOSAL_FACTOR = 100
_IS_DRAWS = 10**5


@dataclass(frozen=True)
class CoverageResult:
    """Estimated coverage of the interval (edge, q_level) or (q_{1-level}, edge).

    ``tail="upper"`` scores ``theta < q_level``; ``tail="lower"`` scores
    ``theta > q_{1-level}``. Either way the nominal value is ``level``.
    """

    prior: PriorSpec
    param: ParamFn
    truth: BvnParams
    n: int
    level: float
    reps: int
    coverage: float
    mc_stderr: float
    tail: str = "upper"
    hits: int = 0

    @classmethod
    def from_hits(cls, prior, param, truth, n, level, reps, hits, tail="upper"):
        c = hits / reps
        return cls(prior, param, truth, n, level, reps, c, math.sqrt(c * (1 - c) / reps), tail, int(hits))

    @property
    def nominal_stderr(self) -> float:
        return math.sqrt(self.level * (1 - self.level) / self.reps)

    def matches_nominal(self, n_se: float = 3.0) -> bool:
        return abs(self.coverage - self.level) <= n_se * self.nominal_stderr


# ---------------------------------------------------------------------------
# Sampling distribution of the sufficient statistics

def pivotal_suffstats(sigma1, sigma2, rho, n: int, rng, size=None):
    """Draw (s11, s22, r) with their exact sampling law, without raw data.

    Uses the independent pivots Z3 ~ N(0, 1), s22(1 - r^2) / (sigma2^2 (1 - rho^2))
    ~ chi2_{n-2} and s11 / sigma1^2 ~ chi2_{n-1}.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    z3 = rng.standard_normal(size)
    c2 = chi2(rng, n - 2, size)
    c1 = chi2(rng, n - 1, size)
    s11 = sigma1**2 * c1
    resid_sd = sigma2 * math.sqrt(1 - rho * rho)
    s12_over_rt11 = resid_sd * z3 + rho * sigma2 * np.sqrt(c1)  # r sqrt(s22)
    resid_ss = resid_sd**2 * c2  # s22 (1 - r^2)
    s22 = s12_over_rt11**2 + resid_ss
    r = s12_over_rt11 / np.sqrt(s22)
    return s11, s22, r


def _draw_stats(truth: BvnParams, n: int, B: int, rng, mode: str) -> SuffStats:
    if mode == "pivotal":
        s11, s22, r = pivotal_suffstats(truth.sigma1, truth.sigma2, truth.rho, n, rng, B)
        z = rng.standard_normal((2, B))
        rn = math.sqrt(n)
        xb1 = truth.mu1 + truth.sigma1 * z[0] / rn
        xb2 = truth.mu2 + truth.sigma2 * (truth.rho * z[0] + math.sqrt(1 - truth.rho**2) * z[1]) / rn
    elif mode == "raw":
        z = rng.standard_normal((B, n, 2))
        x1 = truth.mu1 + truth.sigma1 * z[..., 0]
        x2 = truth.mu2 + truth.sigma2 * (truth.rho * z[..., 0] + math.sqrt(1 - truth.rho**2) * z[..., 1])
        xb1, xb2 = x1.mean(1), x2.mean(1)
        d1, d2 = x1 - xb1[:, None], x2 - xb2[:, None]
        s11, s22 = (d1 * d1).sum(1), (d2 * d2).sum(1)
        r = (d1 * d2).sum(1) / np.sqrt(s11 * s22)
    else:
        raise ValueError(f"mode must be 'pivotal' or 'raw', got {mode!r}")
    col = lambda v: np.asarray(v, dtype=float)[:, None]  # noqa: E731
    return SuffStats.unchecked(n, col(xb1), col(xb2), col(s11), col(s22), col(r))


# ---------------------------------------------------------------------------
# Posterior quantiles for a block of datasets

def _ab_quantiles(prior, st: SuffStats, param, N, ks, rng):
    B = st.s11.shape[0]
    z3 = rng.standard_normal((B, N))
    ca = chi2(rng, st.n - prior.a, (B, N))
    cb = chi2(rng, st.n - prior.b, (B, N))
    z1 = z2 = None
    if param.needs_means:
        z1, z2 = rng.standard_normal((2, B, N))
    return kernels.ab_param_kth(param, st, z3, ca, cb, z1, z2, ks)


def _weighted_quantiles(values, weights, levels):
    """Inverse of the weighted empirical CDF at each level."""
    order = np.argsort(values)
    cw = np.cumsum(weights[order])
    idx = np.searchsorted(cw, np.asarray(levels) * cw[-1])
    return values[order][np.minimum(idx, values.size - 1)]


def _importance_quantiles(prior, st: SuffStats, param, levels, rng):
    """Posterior quantiles from ratio-weighted envelope draws, for one row."""
    z3 = rng.standard_normal(_IS_DRAWS)
    ca = chi2(rng, st.n - 2, _IS_DRAWS)
    cb = chi2(rng, st.n - 1, _IS_DRAWS)
    s1, s2, rho = scale_from_variates(st, z3, ca, cb)
    if param.needs_means:
        mu1, mu2 = mean_given_scale_draw(st, s1, s2, rho, rng)
    else:
        mu1 = mu2 = 0.0
    w = ratio_to_ij(prior, rho)
    return _weighted_quantiles(_pv(mu1, mu2, s1, s2, rho, param).ravel(), w.ravel(), levels)


def _rejection_quantiles(prior, st: SuffStats, param, N, levels, rng):
    """Accept-reject until every row holds N accepted draws.

    Rows that come up short are redrawn together in further rounds sized from
    their observed acceptance rates. A row that exhausts its budget of
    ``_MAX_PROPOSAL_FACTOR * N`` proposals (acceptance below about 1%, which
    happens when |r| is very close to 1) takes its quantiles from
    importance-weighted envelope draws instead; the expected accept-reject
    cost over such rows is unbounded at small n.
    """
    B = st.s11.shape[0]
    out = np.empty((B, N))
    filled = np.zeros(B, dtype=np.int64)
    used = np.zeros(B, dtype=np.int64)
    budget = _MAX_PROPOSAL_FACTOR * N
    todo = np.arange(B)
    rate = np.full(B, 1.0 / _PROPOSAL_FACTOR[prior.tag])
    while todo.size:
        need = N - filled[todo]
        m = int(np.clip(1.2 * np.max(need / rate[todo]), 256, max(256, _BLOCK_VALUES // todo.size)))
        shape = (todo.size, m)
        z3 = rng.standard_normal(shape)
        ca = chi2(rng, st.n - 2, shape)
        cb = chi2(rng, st.n - 1, shape)
        u = rng.random(shape)
        z1 = z2 = None
        if param.needs_means:
            z1, z2 = rng.standard_normal((2,) + shape)
        before = filled[todo].copy()
        kernels.rejection_fill(param, prior, todo, st, z3, ca, cb, u, z1, z2, out, filled)
        got = filled[todo] - before
        used[todo] += m
        # rows that filled up stopped early, so their rate estimate is not updated
        rate[todo] = np.where(filled[todo] < N, np.maximum(got / m, 1e-5), rate[todo])
        todo = todo[(filled[todo] < N) & (used[todo] < budget)]
    ks = [quantile_index(lv, N) for lv in levels]
    q = np.empty((B, len(ks)))
    full = filled == N
    q[full] = kernels.kth_smallest_rows(out[full], ks)
    for i in np.flatnonzero(~full):
        q[i] = _importance_quantiles(prior, _rows(st, [i]), param, levels, rng)
    return q


def _rows(st: SuffStats, idx) -> SuffStats:
    return SuffStats.unchecked(st.n, st.xbar1[idx], st.xbar2[idx], st.s11[idx], st.s22[idx], st.r[idx])


def _pv(mu1, mu2, s1, s2, rho, param):
    return kernels.param_from_code(kernels.PARAM_CODES[param.tag], *(param.d or (0.0, 0.0)), mu1, mu2, s1, s2, rho)


def _block_quantiles(prior, st: SuffStats, param, N, levels, rng, burn_in):
    """Posterior ``levels`` quantiles of ``param`` from N draws, for each dataset row."""
    ks = [quantile_index(lv, N) for lv in levels]
    if prior.is_ab:
        return _ab_quantiles(prior, st, param, N, ks, rng)
    if prior in REJECTION_FAMILY:
        return _rejection_quantiles(prior, st, param, N, levels, rng)
    if prior == PI_RLAMBDA:
        B = st.s11.shape[0]
        L = burn_in + N
        z3 = rng.standard_normal((B, L))
        ca = chi2(rng, st.n - 2, (B, L))
        cb = chi2(rng, st.n - 1, (B, L))
        s1, s2, rho = scale_from_variates(st, z3, ca, cb)
        log_u = np.log(rng.random((B, L)))
        with np.errstate(divide="ignore"):
            log_w = log_ratio_to_ij(prior, s1, s2, rho)
        idx, _ = kernels.imh_states(log_w, log_u)
        idx = idx[:, burn_in:]
        s1, s2, rho = (np.take_along_axis(v, idx, axis=1) for v in (s1, s2, rho))
        if param.needs_means:
            mu1, mu2 = mean_given_scale_draw(st, s1, s2, rho, rng)
        else:
            mu1 = mu2 = 0.0
        return kernels.kth_smallest_rows(_pv(mu1, mu2, s1, s2, rho, param), ks)
    raise UnsupportedPriorError(prior.name)  # pragma: no cover


def _block_rows(prior: PriorSpec, inner_draws: int, burn_in: int) -> int:
    if prior.is_ab:
        per_row = inner_draws
    elif prior in REJECTION_FAMILY:
        per_row = _PROPOSAL_FACTOR[prior.tag] * inner_draws
    else:
        per_row = inner_draws + burn_in
    return max(1, int(_BLOCK_VALUES // per_row))


def _run_block(args):
    prior, param, truth, n, levels, B, N, rng, mode, burn_in = args
    st = _draw_stats(truth, n, B, rng, mode)
    q = _block_quantiles(prior, st, param, N, levels, rng, burn_in)
    theta = param_value(truth, param)
    return (theta < q).sum(axis=0)


def coverage_hits(
    prior: PriorSpec,
    param: ParamFn,
    truth: BvnParams,
    n: int,
    levels,
    reps: int,
    rng=None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    mode: str = "pivotal",
    workers: int = 1,
    burn_in: int = DEFAULT_BURN_IN,
) -> np.ndarray:
    """Count replications with ``theta < q_level`` for each level in ``levels``."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if inner_draws < 1:
        raise ValueError("inner_draws must be >= 1")
    if prior.is_ab and (n - prior.a <= 0 or n - prior.b <= 0):
        raise ValueError(f"n - a and n - b must be positive (n={n}, prior={prior.name})")
    rng = make_rng(rng)
    bsize = _block_rows(prior, inner_draws, burn_in)
    sizes = [min(bsize, reps - s) for s in range(0, reps, bsize)]
    children = rng.spawn(len(sizes))
    jobs = [
        (prior, param, truth, n, tuple(levels), B, inner_draws, child, mode, burn_in)
        for B, child in zip(sizes, children)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block, jobs))
    else:
        parts = [_run_block(j) for j in jobs]
    return np.sum(parts, axis=0)


def simulate_coverage(
    prior: PriorSpec,
    param: ParamFn,
    truth: BvnParams,
    n: int,
    level: float,
    reps: int,
    rng=None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    tail: str = "upper",
    mode: str = "pivotal",
    workers: int = 1,
    burn_in: int = DEFAULT_BURN_IN,
) -> CoverageResult:
    """Monte Carlo frequentist coverage of a one-sided credible interval.

    Parameters
    ----------
    tail : {"upper", "lower"}
        ``"upper"`` estimates P(theta < q_level); ``"lower"`` estimates
        P(theta > q_{1 - level}).
    mode : {"pivotal", "raw"}
        ``"pivotal"`` draws (s11, s22, r) from their exact sampling law and the
        means from N2(mu, Sigma / n); ``"raw"`` simulates n observations per
        replication and reduces them.
    """
    if tail == "upper":
        h = coverage_hits(prior, param, truth, n, [level], reps, rng, inner_draws, mode, workers, burn_in)[0]
    elif tail == "lower":
        below = coverage_hits(prior, param, truth, n, [1 - level], reps, rng, inner_draws, mode, workers, burn_in)[0]
        h = reps - below
    else:
        raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")
    return CoverageResult.from_hits(prior, param, truth, n, level, reps, int(h), tail)


def case_truth(rho: float, sigma_case: str = "a", mu=(0.0, 0.0)) -> BvnParams:
    s1, s2 = SIGMA_CASES[sigma_case]
    return BvnParams(mu[0], mu[1], s1, s2, rho)


def rho_scan(
    prior: PriorSpec,
    param: ParamFn,
    n: int,
    level: float,
    rho_grid,
    reps: int,
    rng=None,
    sigma_case: str = "a",
    inner_draws: int = DEFAULT_INNER_DRAWS,
    mode: str = "pivotal",
    workers: int = 1,
) -> list[CoverageResult]:
    """Coverage of both one-sided intervals at each rho on the grid.

    Returns two results per grid point, ``tail="lower"`` (theta > q_{1-level})
    then ``tail="upper"`` (theta < q_level). Each grid point gets its own child
    generator so the curve is reproducible point by point.
    """
    rng = make_rng(rng)
    grid = [float(x) for x in rho_grid]
    children = rng.spawn(len(grid)) if grid else []
    out = []
    for rho, child in zip(grid, children):
        truth = case_truth(rho, sigma_case)
        lo, hi = coverage_hits(prior, param, truth, n, [1 - level, level], reps, child, inner_draws, mode, workers)
        out.append(CoverageResult.from_hits(prior, param, truth, n, level, reps, reps - int(lo), "lower"))
        out.append(CoverageResult.from_hits(prior, param, truth, n, level, reps, int(hi), "upper"))
    return out


# ---------------------------------------------------------------------------
# Pivotal identities

IDENTITIES = ("rho", "eta3", "theta1", "theta2", "theta3", "theta4", "theta5")


@dataclass(frozen=True)
class PivotalSpec:
    """Which identity to evaluate and for which (a, b, n).

    ``value`` is rho for the rho and eta3 identities, theta5 = mu1/sigma1 for
    the theta5 identity, and unused otherwise (those do not depend on rho).
    """

    which: str
    a: float
    b: float
    n: int
    value: float = 0.0

    def __post_init__(self):
        if self.which not in IDENTITIES:
            raise ValueError(f"unknown identity {self.which!r}; choose from {IDENTITIES}")
        if self.n - self.a <= 0 or self.n - self.b <= 0 or self.n < 3:
            raise ValueError("degrees of freedom n - a, n - b, n - 2 must be positive")
        if self.which in ("rho", "eta3") and not abs(self.value) < 1:
            raise ValueError("rho must lie in (-1, 1)")


def _fixed_quantile(values, q):
    k = quantile_index(q, values.size)
    return float(np.partition(values, k)[k])


def coverage_identity(
    spec: PivotalSpec,
    level: float,
    mc_reps: int,
    rng=None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    fixed_inner_draws: int = FIXED_INNER_DRAWS,
) -> float:
    """Coverage P(theta < q_level) under the ab prior, via its pivotal form.

    Closed-form chi-squared / t probabilities are used for theta1 and theta2.
    Where the inner quantile does not depend on the outer variables (rho,
    theta3, theta4, theta5) it is computed once from ``fixed_inner_draws``
    draws; for eta3 it is recomputed per outer replication from
    ``inner_draws`` draws.
    """
    rng = make_rng(rng)
    n, a, b = spec.n, spec.a, spec.b
    alpha = 1.0 - level
    w = spec.which
    if w == "theta1":
        t_post = sps.t.ppf(level, n - b)
        return float(sps.t.cdf(math.sqrt((n - 2) / (n - b)) * t_post, n - 2))
    if w == "theta2":
        return float(sps.chi2.sf(sps.chi2.ppf(alpha, n - b), n - 2))
    F = fixed_inner_draws
    if w == "rho":
        rho = spec.value
        c = math.sqrt(1 - rho * rho)
        inner = (c * rng.standard_normal(F) + rho * np.sqrt(chi2(rng, n - a, F))) / np.sqrt(chi2(rng, n - b, F))
        q = _fixed_quantile(inner, alpha)
        outer = (c * rng.standard_normal(mc_reps) + rho * np.sqrt(chi2(rng, n - 1, mc_reps))) / np.sqrt(
            chi2(rng, n - 2, mc_reps)
        )
        return float(np.mean(outer > q))
    if w == "theta3":
        q = _fixed_quantile(chi2(rng, n - a, F) * chi2(rng, n - b, F), alpha)
        return float(np.mean(chi2(rng, n - 1, mc_reps) * chi2(rng, n - 2, mc_reps) > q))
    if w == "theta4":
        q = _fixed_quantile(chi2(rng, n - a, F) / chi2(rng, n - b, F), level)
        return float(np.mean(chi2(rng, n - 1, mc_reps) / chi2(rng, n - 2, mc_reps) < q))
    if w == "theta5":
        shift = spec.value * math.sqrt(n)
        q = _fixed_quantile((rng.standard_normal(F) - shift) / np.sqrt(chi2(rng, n - a, F)), level)
        outer = (rng.standard_normal(mc_reps) - shift) / np.sqrt(chi2(rng, n - 1, mc_reps))
        return float(np.mean(outer < q))
    # eta3: inner quantile depends on the outer chi2_{n-1}
    k = psi_inv(spec.value)
    kq = quantile_index(level, inner_draws)
    block = max(1, _BLOCK_VALUES // inner_draws)
    hits = 0
    for start in range(0, mc_reps, block):
        B = min(block, mc_reps - start)
        z3 = rng.standard_normal(B)
        c1 = chi2(rng, n - 1, B)
        c2 = chi2(rng, n - 2, B)
        shift = (k * np.sqrt(c1))[:, None]
        inner = (rng.standard_normal((B, inner_draws)) + shift) / np.sqrt(chi2(rng, n - b, (B, inner_draws)))
        q = kernels.kth_smallest_rows(inner, [kq])[:, 0]
        hits += int(np.sum((z3 + k * np.sqrt(c1)) / np.sqrt(c2) < q))
    return hits / mc_reps


def identity_stderr(spec: PivotalSpec, value: float, mc_reps: int) -> float:
    """Monte Carlo standard error of :func:`coverage_identity` (0 when closed form)."""
    if spec.which in ("theta1", "theta2"):
        return 0.0
    return math.sqrt(value * (1 - value) / mc_reps)


_IDENTITY_PARAM = {
    "rho": RHO,
    "eta3": ETA3,
    "theta1": THETA[1],
    "theta2": THETA[2],
    "theta3": THETA[3],
    "theta4": THETA[4],
    "theta5": THETA[5],
}


@dataclass(frozen=True)
class CrossCheck:
    """Data-level coverage next to its pivotal-identity value."""

    data: CoverageResult
    identity: float
    identity_stderr: float
    combined_stderr: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "combined_stderr", math.hypot(self.data.mc_stderr, self.identity_stderr)
        )

    def __iter__(self):
        yield self.data.coverage
        yield self.identity

    def agree(self, n_se: float = 3.0) -> bool:
        return abs(self.data.coverage - self.identity) <= n_se * self.combined_stderr


def cross_validate(
    prior: PriorSpec,
    param: ParamFn,
    value: float,
    n: int,
    level: float,
    reps: int,
    rng=None,
    identity_reps: int | None = None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    mode: str = "pivotal",
) -> CrossCheck:
    """Estimate one coverage both ways; unpacks as ``(data, identity)``.

    ``value`` is the true rho, or the true theta5 when ``param`` is theta5 (in
    which case the truth is mu1 = theta5, sigma1 = 1, rho = 0.5).
    """
    if not prior.is_ab:
        raise UnsupportedPriorError("pivotal identities exist only for the ab family")
    which = next((k for k, p in _IDENTITY_PARAM.items() if p == param), None)
    if which is None:
        raise ValueError(f"no pivotal identity for {param.name}")
    rng = make_rng(rng)
    r_data, r_id = rng.spawn(2)
    if which == "theta5":
        truth = BvnParams(value, 0.0, 1.0, 1.0, 0.5)
    else:
        truth = case_truth(value, "a")
    data = simulate_coverage(prior, param, truth, n, level, reps, r_data, inner_draws, mode=mode)
    spec = PivotalSpec(which, prior.a, prior.b, n, value)
    id_reps = identity_reps or max(reps, 100_000)
    val = coverage_identity(spec, level, id_reps, r_id, inner_draws)
    return CrossCheck(data, val, identity_stderr(spec, val, id_reps))


# ---------------------------------------------------------------------------
# Exact-matching suite

@dataclass(frozen=True)
class MatchingCheck:
    name: str
    expect_match: bool
    result: CoverageResult
    passed: bool

    @property
    def deviation_se(self) -> float:
        return (self.result.coverage - self.result.level) / self.result.nominal_stderr


# (prior, parameter) pairs with exact frequentist matching
EXACT_MATCHING_PAIRS = (
    [(PI_H, p) for p in (RHO, ETA3, THETA[1], THETA[2], THETA[3], THETA[4])]
    + [(PI_J, p) for p in (MU1, SIGMA1, THETA[5])]
    + [(PI_IJ, THETA[3])]
)
def expected_exact_match(prior: PriorSpec, param: ParamFn) -> bool:
    """Whether one-sided intervals for ``param`` have exact coverage under ``prior``.

    Only the ab family has exact results; the rule covers mu1, sigma1,
    theta5 (a = 1), rho and theta4 ((a, b) = (1, 2)), eta3, theta1, theta2
    (b = 2) and theta3 ((1, 2) or (2, 1)).
    """
    if not prior.is_ab:
        return False
    ab = (prior.a, prior.b)
    rule = {
        "mu1": prior.a == 1,
        "sigma1": prior.a == 1,
        "theta5": prior.a == 1,
        "rho": ab == (1, 2),
        "theta4": ab == (1, 2),
        "eta3": prior.b == 2,
        "theta1": prior.b == 2,
        "theta2": prior.b == 2,
        "theta3": ab in ((1, 2), (2, 1)),
    }
    return bool(rule.get(param.tag, False))


# (prior, parameter, rho, tail) points where coverage is visibly off at n = 3
NON_MATCHING_POINTS = ((PI_J, RHO, 0.9, "lower"),)


def matching_suite(
    reps: int = 20_000,
    rhos=(-0.9, 0.0, 0.5, 0.9),
    n: int = 3,
    level: float = 0.95,
    rng=None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    pairs=EXACT_MATCHING_PAIRS,
    non_matching=NON_MATCHING_POINTS,
    both_tails: bool = True,
    n_se: float = 3.0,
    workers: int = 1,
    progress=None,
) -> list[MatchingCheck]:
    """Check every exact-matching cell at the upper (and lower) level.

    Expected-non-matching points pass when the coverage of the interval on
    the given tail deviates from ``level`` by more than ``n_se`` standard
    errors.
    """
    rng = make_rng(rng)
    cells = [(pr, pa, rho, None) for pr, pa in pairs for rho in rhos]
    cells += list(non_matching)
    children = rng.spawn(len(cells))
    checks = []
    for (prior, param, rho, tail), child in zip(cells, children):
        truth = case_truth(rho, "a")
        expect = tail is None
        if expect:
            levels = [level, 1 - level] if both_tails else [level]
            hits = coverage_hits(prior, param, truth, n, levels, reps, child, inner_draws, workers=workers)
            results = [CoverageResult.from_hits(prior, param, truth, n, lv, reps, int(h)) for lv, h in zip(levels, hits)]
        else:
            results = [simulate_coverage(prior, param, truth, n, level, reps, child, inner_draws, tail, workers=workers)]
        for res in results:
            ok = res.matches_nominal(n_se)
            name = f"{prior.name}/{param.name}/rho={rho:g}/level={res.level:g}/{res.tail}"
            checks.append(MatchingCheck(name, expect, res, ok if expect else not ok))
            if progress:
                progress(checks[-1])
    return checks


def cross_validation_suite(
    reps: int = 10_000,
    identity_reps: int = 200_000,
    n: int = 3,
    level: float = 0.95,
    rng=None,
    inner_draws: int = DEFAULT_INNER_DRAWS,
    n_se: float = 3.0,
    progress=None,
):
    """Data-level vs pivotal coverage for every identity at two (a, b) settings."""
    settings = {
        "rho": [(PiAB(1, 2), 0.9), (PiAB(1, 0), 0.9)],
        "eta3": [(PiAB(1, 2), 0.5), (PiAB(2, 1), 0.5)],
        "theta1": [(PiAB(1, 2), 0.5), (PiAB(1, 0), 0.5)],
        "theta2": [(PiAB(1, 2), 0.0), (PiAB(1, 0), 0.0)],
        "theta3": [(PiAB(2, 1), 0.0), (PiAB(1, 0), 0.0)],
        "theta4": [(PiAB(1, 2), 0.0), (PiAB(2, 1), 0.0)],
        "theta5": [(PiAB(1, 0), 0.0), (PiAB(2, 1), 1.0)],
    }
    rng = make_rng(rng)
    out = []
    items = [(w, pr, v) for w, lst in settings.items() for pr, v in lst]
    for (w, prior, v), child in zip(items, rng.spawn(len(items))):
        id_reps = identity_reps if w != "eta3" else min(identity_reps, max(reps, 20_000))
        cc = cross_validate(prior, _IDENTITY_PARAM[w], v, n, level, reps, child, id_reps, inner_draws)
        out.append((w, prior, v, cc, cc.agree(n_se)))
        if progress:
            progress(out[-1])
    return out
