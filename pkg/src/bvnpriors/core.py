"""Parameter-space types, reparameterizations and sufficient statistics.

Everything here works on scalars or on broadcastable numpy arrays, so the
same ``param_value`` call evaluates one parameter point or a whole matrix
of posterior draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# |r| and |rho| at or above this are treated as the collapsed univariate case.
RHO_EDGE = 1.0 - 1e-12


class DegenerateDataError(ValueError):
    """Sample statistics violate n >= 3, s_ii > 0 or |r| < 1."""


class InvalidParameterError(ValueError):
    pass


def _check(cond, exc, msg):
    if not np.all(cond):
        raise exc(msg)


@dataclass(frozen=True)
class BvnParams:
    """A point (mu1, mu2, sigma1, sigma2, rho) of the bivariate normal model.

    Fields may be numpy arrays of a common broadcast shape, in which case the
    object represents a batch of points (e.g. posterior draws).
    """

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self):
        _check(np.asarray(self.sigma1) > 0, InvalidParameterError, "sigma1 must be positive")
        _check(np.asarray(self.sigma2) > 0, InvalidParameterError, "sigma2 must be positive")
        _check(
            np.abs(np.asarray(self.rho)) < 1,
            InvalidParameterError,
            "|rho| must be strictly less than 1",
        )

    @property
    def scale(self) -> tuple:
        return self.sigma1, self.sigma2, self.rho

    def covariance(self) -> np.ndarray:
        c = self.rho * self.sigma1 * self.sigma2
        return np.array([[self.sigma1**2, c], [c, self.sigma2**2]], dtype=float)


@dataclass(frozen=True)
class SuffStats:
    """Sufficient statistics (n, xbar1, xbar2, s11, s22, r).

    ``s11`` and ``s22`` are centered sums of squares (not divided by n - 1).
    The float fields may be arrays, which is how the coverage engine carries a
    block of simulated datasets through the samplers.
    """

    n: int
    xbar1: float
    xbar2: float
    s11: float
    s22: float
    r: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DegenerateDataError(f"need n >= 3 observations, got n = {self.n}")
        _check(np.asarray(self.s11) > 0, DegenerateDataError, "degenerate data: s11 = 0")
        _check(np.asarray(self.s22) > 0, DegenerateDataError, "degenerate data: s22 = 0")
        _check(
            np.abs(np.asarray(self.r)) < RHO_EDGE,
            DegenerateDataError,
            "degenerate data: |r| = 1 (sample is collinear)",
        )

    @classmethod
    def unchecked(cls, n, xbar1, xbar2, s11, s22, r):
        """Build without validation, for blocks of simulated datasets.

        At n = 3 a simulated |r| lands within 1e-12 of 1 a few times per
        million datasets; ``r`` is clipped to the largest double below 1 so
        the posterior formulas stay finite.
        """
        out = object.__new__(cls)
        edge = np.nextafter(1.0, 0.0)
        vals = (int(n), xbar1, xbar2, s11, s22, np.clip(r, -edge, edge))
        for k, v in zip(("n", "xbar1", "xbar2", "s11", "s22", "r"), vals):
            object.__setattr__(out, k, v)
        return out

    @property
    def s12(self):
        return self.r * np.sqrt(self.s11 * self.s22)

    @property
    def det(self):
        """|S| = s11 s22 (1 - r^2)."""
        return self.s11 * self.s22 * (1.0 - self.r**2)


@dataclass(frozen=True)
class EtaParams:
    """Cholesky-type coordinates of the precision matrix."""

    eta1: float
    eta2: float
    eta3: float

    def __post_init__(self):
        _check(np.asarray(self.eta1) > 0, InvalidParameterError, "eta1 must be positive")
        _check(np.asarray(self.eta2) > 0, InvalidParameterError, "eta2 must be positive")


# ---------------------------------------------------------------------------
# Parameter functions

_SIMPLE_TAGS = (
    "mu1", "mu2", "mu_diff", "sigma1", "sigma2", "rho",
    "eta1", "eta2", "eta3",
    "theta1", "theta2", "theta3", "theta4", "theta5", "theta6",
    "theta7", "theta8", "theta9", "theta10",
    "lambda1", "lambda2",
)
_VECTOR_TAGS = ("dmean", "dvar")

# Parameters whose range is (0, inf); the rest are unbounded except rho.
_POSITIVE_TAGS = frozenset(
    {"sigma1", "sigma2", "eta1", "eta2", "theta2", "theta3", "theta4", "theta6",
     "theta7", "theta10", "lambda1", "lambda2", "dvar"}
)
_MEAN_TAGS = frozenset({"mu1", "mu2", "mu_diff", "theta5", "theta8", "dmean"})


@dataclass(frozen=True)
class ParamFn:
    """Names a scalar function of the model parameters.

    ``d`` is only used by the ``dmean`` (d'mu) and ``dvar`` (d'Sigma d) tags.
    """

    tag: str
    d: tuple[float, float] | None = None

    def __post_init__(self):
        if self.tag in _SIMPLE_TAGS:
            if self.d is not None:
                raise InvalidParameterError(f"{self.tag} takes no direction vector")
        elif self.tag in _VECTOR_TAGS:
            if self.d is None or len(self.d) != 2:
                raise InvalidParameterError(f"{self.tag} needs a 2-vector d")
            object.__setattr__(self, "d", (float(self.d[0]), float(self.d[1])))
            if self.tag == "dvar" and self.d[0] == 0.0:
                raise InvalidParameterError("dvar: d must not be proportional to (0, 1)")
            if self.tag == "dmean" and self.d == (0.0, 0.0):
                raise InvalidParameterError("dmean: d must be nonzero")
        else:
            raise InvalidParameterError(f"unknown parameter function {self.tag!r}")

    @property
    def needs_means(self) -> bool:
        return self.tag in _MEAN_TAGS

    @property
    def support(self) -> tuple[float, float]:
        if self.tag == "rho":
            return (-1.0, 1.0)
        if self.tag in _POSITIVE_TAGS:
            return (0.0, math.inf)
        return (-math.inf, math.inf)

    @property
    def name(self) -> str:
        if self.d is None:
            return self.tag.replace("_", "-")
        return f"{self.tag}:{self.d[0]:g}:{self.d[1]:g}"

    def __str__(self):
        return self.name


MU1 = ParamFn("mu1")
MU2 = ParamFn("mu2")
MU_DIFF = ParamFn("mu_diff")
SIGMA1 = ParamFn("sigma1")
SIGMA2 = ParamFn("sigma2")
RHO = ParamFn("rho")
ETA1 = ParamFn("eta1")
ETA2 = ParamFn("eta2")
ETA3 = ParamFn("eta3")
THETA = {i: ParamFn(f"theta{i}") for i in range(1, 11)}
THETA5_OVER_SIGMA = THETA[5]
LAMBDA1 = ParamFn("lambda1")
LAMBDA2 = ParamFn("lambda2")


def DMean(d) -> ParamFn:
    return ParamFn("dmean", tuple(d))


def DVar(d) -> ParamFn:
    return ParamFn("dvar", tuple(d))


def parse_param(text: str) -> ParamFn:
    """Parse CLI names such as ``rho``, ``theta3``, ``mu-diff`` or ``dvar:1:-1``."""
    s = text.strip().lower()
    if s.startswith(("dmean:", "dvar:")):
        parts = s.split(":")
        if len(parts) != 3:
            raise InvalidParameterError(f"expected {parts[0]}:<d1>:<d2>, got {text!r}")
        return ParamFn(parts[0], (float(parts[1]), float(parts[2])))
    aliases = {"theta11": "dvar", "mudiff": "mu_diff", "mu-diff": "mu_diff"}
    s = aliases.get(s, s)
    return ParamFn(s)


# ---------------------------------------------------------------------------
# Reparameterizations

def eta_from_sigma(sigma1, sigma2, rho) -> EtaParams:
    c = np.sqrt(1.0 - np.asarray(rho) ** 2)
    return EtaParams(1.0 / sigma1, 1.0 / (sigma2 * c), -rho / (sigma1 * c))


def sigma_from_eta(e: EtaParams) -> tuple:
    """Inverse of :func:`eta_from_sigma`; returns ``(sigma1, sigma2, rho)``."""
    h = np.hypot(e.eta1, e.eta3)
    return 1.0 / e.eta1, h / (e.eta1 * e.eta2), -e.eta3 / h


def psi(y):
    """Map the real line onto (-1, 1): y / sqrt(1 + y^2)."""
    return y / np.sqrt(1.0 + np.square(y))


def psi_inv(rho):
    return rho / np.sqrt(1.0 - np.square(rho))


def _eigenvalues(s1, s2, rho):
    v1, v2 = s1 * s1, s2 * s2
    root = np.sqrt((v1 - v2) ** 2 + 4.0 * rho * rho * v1 * v2)
    return 0.5 * (v1 + v2 + root), 0.5 * (v1 + v2 - root)


def param_value(p: BvnParams, f: ParamFn):
    """Evaluate the parameter function ``f`` at ``p`` (scalar or batch)."""
    m1, m2, s1, s2, rho = p.mu1, p.mu2, p.sigma1, p.sigma2, p.rho
    t = f.tag
    if t == "mu1":
        return m1 + 0.0 * s1
    if t == "mu2":
        return m2 + 0.0 * s1
    if t == "mu_diff":
        return m1 - m2
    if t == "sigma1":
        return s1 + 0.0 * s2
    if t == "sigma2":
        return s2 + 0.0 * s1
    if t == "rho":
        return rho + 0.0 * s1
    c = np.sqrt(1.0 - rho * rho)
    if t == "eta1":
        return 1.0 / s1 + 0.0 * rho
    if t == "eta2":
        return 1.0 / (s2 * c)
    if t == "eta3":
        return -rho / (s1 * c)
    if t == "theta1":
        return rho * s2 / s1
    if t == "theta2":
        return s2 * s2 * (1.0 - rho * rho)
    if t == "theta3":
        return s1 * s1 * s2 * s2 * (1.0 - rho * rho)
    if t == "theta4":
        return s2 * c / s1
    if t == "theta5":
        return m1 / s1
    if t == "theta6":
        return s1 * s1 * s2 * s2 + 0.0 * rho
    if t == "theta7":
        return s2 / s1 + 0.0 * rho
    if t == "theta8":
        return m2 / s2
    if t == "theta9":
        return rho * s1 * s2
    if t == "theta10":
        return s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2
    if t == "lambda1":
        return _eigenvalues(s1, s2, rho)[0]
    if t == "lambda2":
        return _eigenvalues(s1, s2, rho)[1]
    d1, d2 = f.d
    if t == "dmean":
        return d1 * m1 + d2 * m2
    if t == "dvar":
        return d1 * d1 * s1 * s1 + 2.0 * d1 * d2 * rho * s1 * s2 + d2 * d2 * s2 * s2
    raise InvalidParameterError(f"unknown parameter function {t!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Data

def suff_stats(data: Iterable) -> SuffStats:
    """Means, centered sums of squares and the sample correlation of ``data``.

    Raises
    ------
    DegenerateDataError
        If n < 3, a column is constant, or the points are collinear.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array of pairs, got shape {x.shape}")
    n = x.shape[0]
    if n < 3:
        raise DegenerateDataError(f"need n >= 3 observations, got n = {n}")
    xbar = x.mean(axis=0)
    dx = x - xbar
    s11 = float(dx[:, 0] @ dx[:, 0])
    s22 = float(dx[:, 1] @ dx[:, 1])
    s12 = float(dx[:, 0] @ dx[:, 1])
    if s11 <= 0 or s22 <= 0:
        raise DegenerateDataError("degenerate data: a column has zero variance (s_ii = 0)")
    r = s12 / math.sqrt(s11 * s22)
    if abs(r) >= RHO_EDGE:
        raise DegenerateDataError("degenerate data: |r| = 1 (sample is collinear)")
    return SuffStats(n, float(xbar[0]), float(xbar[1]), s11, s22, r)


def sample_bvn(p: BvnParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. pairs from the model at ``p``; returns an (n, 2) array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = rng.standard_normal((n, 2))
    x1 = p.mu1 + p.sigma1 * z[:, 0]
    x2 = p.mu2 + p.sigma2 * (p.rho * z[:, 0] + math.sqrt(1.0 - p.rho**2) * z[:, 1])
    return np.column_stack([x1, x2])


def log_marginal_likelihood(stats: SuffStats, sigma1, sigma2, rho):
    """log |Sigma|^{-(n-1)/2} exp(-tr(S Sigma^{-1}) / 2), no normalizing constant."""
    one_m = 1.0 - rho * rho
    log_det = 2.0 * np.log(sigma1) + 2.0 * np.log(sigma2) + np.log(one_m)
    tr = (
        stats.s11 / sigma1**2
        + stats.s22 / sigma2**2
        - 2.0 * rho * stats.s12 / (sigma1 * sigma2)
    ) / one_m
    return -0.5 * (stats.n - 1) * log_det - 0.5 * tr
