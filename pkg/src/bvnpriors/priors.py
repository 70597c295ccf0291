"""Catalog of objective prior densities for (sigma1, sigma2, rho).

All densities are improper and are returned as logs with the additive
constant fixed at zero. A flat prior on (mu1, mu2) is implied throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class UnsupportedPriorError(ValueError):
    pass


class PolePriorError(ValueError):
    """The density has a pole at the requested point."""


_NAMED = ("r-rho", "r-sigma", "r-sigma-tilde", "scale", "r-lambda")


@dataclass(frozen=True)
class PriorSpec:
    """A member of the prior catalog.

    ``tag`` is ``"ab"`` for the two-parameter family, in which case ``a`` and
    ``b`` hold the exponents, or one of the named reference/scale priors.
    """

    tag: str
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.tag == "ab":
            if self.a is None or self.b is None:
                raise ValueError("the ab family needs both a and b")
            object.__setattr__(self, "a", float(self.a))
            object.__setattr__(self, "b", float(self.b))
        elif self.tag in _NAMED:
            if self.a is not None or self.b is not None:
                raise ValueError(f"{self.tag} takes no (a, b)")
        else:
            raise ValueError(f"unknown prior tag {self.tag!r}")

    @property
    def is_ab(self) -> bool:
        return self.tag == "ab"

    @property
    def name(self) -> str:
        if self.is_ab:
            alias = _AB_ALIASES.get((self.a, self.b))
            return alias or f"ab:{self.a:g}:{self.b:g}"
        return self.tag

    @property
    def scale_invariant(self) -> bool:
        """True for priors of the form h(rho) / (sigma1^c1 sigma2^c2)."""
        return self.tag != "r-lambda"

    def __str__(self):
        return self.name


def PiAB(a: float, b: float) -> PriorSpec:
    return PriorSpec("ab", a, b)


PI_J = PiAB(1, 0)
PI_H = PiAB(1, 2)
PI_IJ = PiAB(2, 1)
PI_RO = PiAB(1, 1)
PI_RRHO = PriorSpec("r-rho")
PI_RSIGMA = PriorSpec("r-sigma")
PI_RSIGMA_TILDE = PriorSpec("r-sigma-tilde")
PI_S = PriorSpec("scale")
PI_RLAMBDA = PriorSpec("r-lambda")

_AB_ALIASES = {(1.0, 0.0): "jeffreys", (1.0, 2.0): "right-haar", (2.0, 1.0): "ind-jeffreys", (1.0, 1.0): "ro"}

REJECTION_FAMILY = (PI_RRHO, PI_RSIGMA, PI_RSIGMA_TILDE, PI_S)

_BY_NAME = {
    "jeffreys": PI_J,
    "right-haar": PI_H,
    "ind-jeffreys": PI_IJ,
    "ro": PI_RO,
    "r-rho": PI_RRHO,
    "r-sigma": PI_RSIGMA,
    "r-sigma-tilde": PI_RSIGMA_TILDE,
    "r-lambda": PI_RLAMBDA,
    "scale": PI_S,
}


def parse_prior(text: str) -> PriorSpec:
    """Parse a CLI prior name (``"right-haar"``, ``"ab:1.5:2"``, ...)."""
    s = text.strip().lower()
    if s.startswith("ab:"):
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected ab:<a>:<b>, got {text!r}")
        return PiAB(float(parts[1]), float(parts[2]))
    try:
        return _BY_NAME[s]
    except KeyError:
        raise ValueError(
            f"unknown prior {text!r}; choose from {', '.join(_BY_NAME)} or ab:<a>:<b>"
        ) from None


def log_prior_density(spec: PriorSpec, sigma1, sigma2, rho):
    """Log density with respect to d sigma1 d sigma2 d rho (constant dropped)."""
    ls = np.log(sigma1) + np.log(sigma2)
    one_m = 1.0 - np.square(rho)
    t = spec.tag
    if t == "ab":
        return (
            -(3.0 - spec.a) * np.log(sigma1)
            - (2.0 - spec.b) * np.log(sigma2)
            - (2.0 - 0.5 * spec.b) * np.log(one_m)
        )
    if t == "r-rho":
        return -ls - np.log(one_m)
    if t == "r-sigma":
        return 0.5 * np.log1p(np.square(rho)) - ls - np.log(one_m)
    if t == "r-sigma-tilde":
        return -ls - np.log(one_m) - 0.5 * np.log(2.0 - np.square(rho))
    if t == "scale":
        return -ls
    if t == "r-lambda":
        disc = _rlambda_disc(sigma1, sigma2, rho)
        if np.any(disc == 0):
            raise PolePriorError("r-lambda density has a pole at sigma1 = sigma2, rho = 0")
        return -ls - np.log(one_m) - 0.5 * np.log(disc)
    raise UnsupportedPriorError(t)  # pragma: no cover


def _rlambda_disc(sigma1, sigma2, rho):
    w = sigma1 / sigma2
    return np.square(w - 1.0 / w) + 4.0 * np.square(rho)


def log_ratio_to_ij(spec: PriorSpec, sigma1, sigma2, rho):
    """log(pi / pi_IJ), computed directly rather than as a difference of logs."""
    one_m = 1.0 - np.square(rho)
    t = spec.tag
    if t == "ab":
        return (
            (spec.a - 2.0) * np.log(sigma1)
            + (spec.b - 1.0) * np.log(sigma2)
            + (0.5 * spec.b - 0.5) * np.log(one_m)
        ) + 0.0 * sigma2
    if t == "r-lambda":
        return 0.5 * np.log(one_m) - 0.5 * np.log(_rlambda_disc(sigma1, sigma2, rho))
    return np.log(ratio_to_ij(spec, rho)) + 0.0 * sigma1


def ratio_to_ij(spec: PriorSpec, rho):
    """pi / pi_IJ for the four priors sampled by rejection; a function of rho only."""
    one_m = 1.0 - np.square(rho)
    t = spec.tag
    if t == "r-rho":
        return np.sqrt(one_m)
    if t == "r-sigma":
        return np.sqrt(1.0 - np.power(rho, 4))
    if t == "r-sigma-tilde":
        return np.sqrt(one_m / (2.0 - np.square(rho)))
    if t == "scale":
        return one_m**1.5
    raise UnsupportedPriorError(f"{spec.name} has no bounded ratio to the independence Jeffreys prior")


def rejection_bound(spec: PriorSpec) -> float:
    """sup over rho of :func:`ratio_to_ij`."""
    if spec.tag in ("r-rho", "r-sigma", "scale"):
        return 1.0
    if spec.tag == "r-sigma-tilde":
        return 1.0 / math.sqrt(2.0)
    raise UnsupportedPriorError(f"{spec.name} is not sampled by rejection")


def acceptance_probability(spec: PriorSpec, rho):
    return ratio_to_ij(spec, rho) / rejection_bound(spec)
