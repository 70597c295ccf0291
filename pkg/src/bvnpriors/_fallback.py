"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def kth_smallest_rows(values, ks):
    ks = np.asarray(ks, dtype=np.intp)
    return np.partition(values, ks, axis=1)[:, ks]


def first_accepted_kth(values, accept, n_keep, ks):
    ks = np.asarray(ks, dtype=np.intp)
    accept = np.asarray(accept, dtype=bool)
    counts = accept.sum(axis=1).astype(np.int64)
    keep = accept & (np.cumsum(accept, axis=1) <= n_keep)
    masked = np.where(keep, values, np.inf)
    # every kept entry sorts ahead of the inf padding
    q = np.partition(masked, ks, axis=1)[:, ks]
    q[counts < n_keep] = np.nan
    return q, counts


def imh_states(log_w, log_u):
    B, L = log_w.shape
    idx = np.empty((B, L), dtype=np.int64)
    acc = np.zeros(B, dtype=np.int64)
    for i in range(B):
        lw = log_w[i].tolist()
        lu = log_u[i].tolist()
        row = [0] * L
        cur = 0
        n = 0
        for t in range(1, L):
            if lu[t] < lw[t] - lw[cur]:
                cur = t
                n += 1
            row[t] = cur
        idx[i] = row
        acc[i] = n
    return idx, acc


def ab_param_kth(code, z3, chi_a, chi_b, z1, z2, xbar1, xbar2, s11, s22, r, n, d1, d2, ks):
    from .core import SuffStats
    from .kernels import PARAM_TAGS, param_from_code
    from .samplers import mean_from_variates, scale_from_variates

    col = lambda v: np.asarray(v, dtype=float)[:, None]  # noqa: E731
    st = SuffStats.unchecked(int(n), col(xbar1), col(xbar2), col(s11), col(s22), col(r))
    s1, s2, rho = scale_from_variates(st, z3, chi_a, chi_b)
    if z1 is not None:
        mu1, mu2 = mean_from_variates(st, z1, z2, z3, chi_a, chi_b)
    else:
        mu1 = mu2 = 0.0
    values = param_from_code(code, d1, d2, mu1, mu2, s1, s2, rho)
    return kth_smallest_rows(values, ks)


def rejection_fill(code, prior, rows, z3, chi_a, chi_b, u, z1, z2, xbar1, xbar2, s11, s22, r, n, d1, d2, out, filled):
    from .core import SuffStats
    from .kernels import REJECTION_CODES, param_from_code
    from .priors import acceptance_probability
    from .samplers import scale_from_variates

    col = lambda v: np.asarray(v, dtype=float)[rows][:, None]  # noqa: E731
    st = SuffStats.unchecked(int(n), col(xbar1), col(xbar2), col(s11), col(s22), col(r))
    s1, s2, rho = scale_from_variates(st, z3, chi_a, chi_b)
    accept = u <= acceptance_probability(REJECTION_CODES[prior], rho)
    if z1 is not None:
        rn = np.sqrt(n)
        mu1 = st.xbar1 + s1 * z1 / rn
        mu2 = st.xbar2 + s2 * (rho * z1 + np.sqrt(1.0 - rho * rho) * z2) / rn
    else:
        mu1 = mu2 = np.zeros_like(s1)
    values = param_from_code(code, d1, d2, mu1, mu2, s1, s2, rho)
    cap = out.shape[1]
    for j, i in enumerate(rows):
        got = values[j][accept[j]][: cap - filled[i]]
        out[i, filled[i]:filled[i] + got.size] = got
        filled[i] += got.size
