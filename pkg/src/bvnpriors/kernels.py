"""Kernel backend selection.

The compiled extension is used when it imports; set ``BVNPRIORS_PURE_PYTHON=1``
to force the numpy fallback. :func:`use_backend` switches at runtime, which the
tests and the benchmark use to compare the two.
"""

import os

import numpy as np

from . import _fallback
from .core import BvnParams, ParamFn, param_value
from .priors import PI_RRHO, PI_RSIGMA, PI_RSIGMA_TILDE, PI_S

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

HAVE_COMPILED = _compiled is not None
_active = _fallback if (_compiled is None or os.environ.get("BVNPRIORS_PURE_PYTHON")) else _compiled


def backend() -> str:
    return "compiled" if _active is _compiled else "python"


def use_backend(name: str) -> str:
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    prev = backend()
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        _active = _compiled
    elif name == "python":
        _active = _fallback
    else:
        raise ValueError(name)
    return prev


# Parameter tags in the order of the switch in ``_kernels._param``.
PARAM_TAGS = (
    "mu1", "mu2", "mu_diff", "sigma1", "sigma2", "rho", "eta1", "eta2", "eta3",
    "theta1", "theta2", "theta3", "theta4", "theta5", "theta6", "theta7",
    "theta8", "theta9", "theta10", "lambda1", "lambda2", "dmean", "dvar",
)
PARAM_CODES = {t: i for i, t in enumerate(PARAM_TAGS)}

# rejection-family priors in the order of ``_kernels._accept_ratio``
REJECTION_CODES = (PI_RRHO, PI_RSIGMA, PI_RSIGMA_TILDE, PI_S)


def param_from_code(code, d1, d2, mu1, mu2, s1, s2, rho):
    """numpy evaluation of parameter ``code`` on unvalidated arrays."""
    tag = PARAM_TAGS[code]
    f = ParamFn(tag, (d1, d2) if tag in ("dmean", "dvar") else None)
    p = object.__new__(BvnParams)  # skip validation on large blocks
    for k, v in zip(("mu1", "mu2", "sigma1", "sigma2", "rho"), (mu1, mu2, s1, s2, rho)):
        object.__setattr__(p, k, v)
    return np.asarray(param_value(p, f), dtype=float)


def kth_smallest_rows(values, ks):
    return _active.kth_smallest_rows(np.ascontiguousarray(values, dtype=np.float64), ks)


def first_accepted_kth(values, accept, n_keep, ks):
    return _active.first_accepted_kth(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(accept, dtype=np.uint8),
        int(n_keep),
        ks,
    )


def imh_states(log_w, log_u):
    return _active.imh_states(
        np.ascontiguousarray(log_w, dtype=np.float64),
        np.ascontiguousarray(log_u, dtype=np.float64),
    )


def ab_param_kth(param, stats, z3, chi_a, chi_b, z1=None, z2=None, ks=(0,)):
    """Order statistics of constructive ab-family draws of ``param``, row by row.

    ``stats`` is a SuffStats whose fields are length-B arrays (or (B, 1)
    columns); the variates are (B, N).
    """
    f64 = lambda v: np.ascontiguousarray(v, dtype=np.float64)  # noqa: E731
    flat = lambda v: f64(np.broadcast_to(np.ravel(v), (z3.shape[0],)))  # noqa: E731
    d1, d2 = param.d if param.d is not None else (0.0, 0.0)
    return _active.ab_param_kth(
        PARAM_CODES[param.tag], f64(z3), f64(chi_a), f64(chi_b),
        None if z1 is None else f64(z1), None if z2 is None else f64(z2),
        flat(stats.xbar1), flat(stats.xbar2), flat(stats.s11), flat(stats.s22), flat(stats.r),
        float(stats.n), float(d1), float(d2), ks,
    )


def rejection_fill(param, prior, rows, stats, z3, chi_a, chi_b, u, z1, z2, out, filled):
    """Append accepted draws of ``param`` to ``out[rows[j]]`` for each proposal row j.

    ``filled`` (int64, one entry per dataset) tracks how many slots of each
    ``out`` row are used and is updated in place.
    """
    f64 = lambda v: np.ascontiguousarray(v, dtype=np.float64)  # noqa: E731
    flat = lambda v: f64(np.ravel(v))  # noqa: E731
    d1, d2 = param.d if param.d is not None else (0.0, 0.0)
    _active.rejection_fill(
        PARAM_CODES[param.tag], REJECTION_CODES.index(prior), np.ascontiguousarray(rows, dtype=np.intp),
        f64(z3), f64(chi_a), f64(chi_b), f64(u),
        None if z1 is None else f64(z1), None if z2 is None else f64(z2),
        flat(stats.xbar1), flat(stats.xbar2), flat(stats.s11), flat(stats.s22), flat(stats.r),
        float(stats.n), float(d1), float(d2), out, filled,
    )
