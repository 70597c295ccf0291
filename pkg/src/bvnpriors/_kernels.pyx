# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Each function has a numpy twin in ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport NAN, hypot, sqrt
from libc.stdint cimport int64_t, uint8_t
from libcpp.algorithm cimport nth_element
from libcpp.vector cimport vector

cnp.import_array()


def kth_smallest_rows(const double[:, ::1] values, ks):
    """Order statistics ``ks`` (0-based) of every row of ``values``."""
    cdef Py_ssize_t B = values.shape[0], N = values.shape[1]
    cdef Py_ssize_t[:] kk = np.asarray(ks, dtype=np.intp)
    cdef Py_ssize_t nk = kk.shape[0]
    out = np.empty((B, nk), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef vector[double] buf
    cdef Py_ssize_t i, j, m
    buf.resize(N)
    with nogil:
        for i in range(B):
            for j in range(N):
                buf[j] = values[i, j]
            for m in range(nk):
                nth_element(buf.begin(), buf.begin() + kk[m], buf.end())
                o[i, m] = buf[kk[m]]
    return out


def first_accepted_kth(const double[:, ::1] values, const uint8_t[:, ::1] accept,
                       Py_ssize_t n_keep, ks):
    """Order statistics of the first ``n_keep`` accepted entries of each row.

    Returns ``(q, n_accepted)``; rows with fewer than ``n_keep`` accepted
    entries get NaN in ``q``.
    """
    cdef Py_ssize_t B = values.shape[0], M = values.shape[1]
    cdef Py_ssize_t[:] kk = np.asarray(ks, dtype=np.intp)
    cdef Py_ssize_t nk = kk.shape[0]
    out = np.empty((B, nk), dtype=np.float64)
    counts = np.empty(B, dtype=np.int64)
    cdef double[:, ::1] o = out
    cdef int64_t[:] c = counts
    cdef vector[double] buf
    cdef Py_ssize_t i, j, m, got, total
    buf.resize(n_keep if n_keep > 0 else 1)
    with nogil:
        for i in range(B):
            got = 0
            total = 0
            for j in range(M):
                if accept[i, j]:
                    if got < n_keep:
                        buf[got] = values[i, j]
                        got += 1
                    total += 1
            c[i] = total
            if got < n_keep:
                for m in range(nk):
                    o[i, m] = NAN
                continue
            for m in range(nk):
                nth_element(buf.begin(), buf.begin() + kk[m], buf.begin() + n_keep)
                o[i, m] = buf[kk[m]]
    return out, counts


def imh_states(const double[:, ::1] log_w, const double[:, ::1] log_u):
    """Independence Metropolis-Hastings over pre-drawn proposals.

    Row ``i`` holds the log importance weights of a stream of proposals; the
    chain starts at proposal 0 and moves to proposal ``t`` when
    ``log_u[i, t] < log_w[i, t] - log_w[i, current]``.
    Returns the state index at every step and the number of accepted moves.
    """
    cdef Py_ssize_t B = log_w.shape[0], L = log_w.shape[1]
    idx = np.empty((B, L), dtype=np.int64)
    acc = np.zeros(B, dtype=np.int64)
    cdef int64_t[:, ::1] s = idx
    cdef int64_t[:] a = acc
    cdef Py_ssize_t i, t, cur
    with nogil:
        for i in range(B):
            cur = 0
            s[i, 0] = 0
            for t in range(1, L):
                if log_u[i, t] < log_w[i, t] - log_w[i, cur]:
                    cur = t
                    a[i] += 1
                s[i, t] = cur
    return idx, acc


cdef inline double _param(int code, double mu1, double mu2, double s1, double s2,
                          double rho, double d1, double d2) nogil:
    cdef double c2 = 1.0 - rho * rho
    cdef double v1, v2, root
    if code == 0:
        return mu1
    elif code == 1:
        return mu2
    elif code == 2:
        return mu1 - mu2
    elif code == 3:
        return s1
    elif code == 4:
        return s2
    elif code == 5:
        return rho
    elif code == 6:
        return 1.0 / s1
    elif code == 7:
        return 1.0 / (s2 * sqrt(c2))
    elif code == 8:
        return -rho / (s1 * sqrt(c2))
    elif code == 9:
        return rho * s2 / s1
    elif code == 10:
        return s2 * s2 * c2
    elif code == 11:
        return s1 * s1 * s2 * s2 * c2
    elif code == 12:
        return s2 * sqrt(c2) / s1
    elif code == 13:
        return mu1 / s1
    elif code == 14:
        return s1 * s1 * s2 * s2
    elif code == 15:
        return s2 / s1
    elif code == 16:
        return mu2 / s2
    elif code == 17:
        return rho * s1 * s2
    elif code == 18:
        return s1 * s1 + s2 * s2 - 2.0 * rho * s1 * s2
    elif code == 19 or code == 20:
        v1 = s1 * s1
        v2 = s2 * s2
        root = sqrt((v1 - v2) * (v1 - v2) + 4.0 * rho * rho * v1 * v2)
        if code == 19:
            return 0.5 * (v1 + v2 + root)
        return 0.5 * (v1 + v2 - root)
    elif code == 21:
        return d1 * mu1 + d2 * mu2
    elif code == 22:
        return d1 * d1 * s1 * s1 + 2.0 * d1 * d2 * rho * s1 * s2 + d2 * d2 * s2 * s2
    return NAN


def ab_param_kth(int code, const double[:, ::1] z3, const double[:, ::1] chi_a,
                 const double[:, ::1] chi_b, z1, z2, const double[:] xbar1,
                 const double[:] xbar2, const double[:] s11, const double[:] s22,
                 const double[:] r, double n, double d1, double d2, ks):
    """Constructive ab-family draws of one parameter, reduced to order statistics.

    Row ``i`` uses the sufficient statistics at index ``i``. ``z1``/``z2``
    may be None when the parameter does not involve the means.
    """
    cdef Py_ssize_t B = z3.shape[0], N = z3.shape[1]
    cdef Py_ssize_t[:] kk = np.asarray(ks, dtype=np.intp)
    cdef Py_ssize_t nk = kk.shape[0]
    cdef bint means = z1 is not None
    cdef const double[:, ::1] w1 = z1 if means else z3
    cdef const double[:, ::1] w2 = z2 if means else z3
    out = np.empty((B, nk), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef vector[double] buf
    cdef Py_ssize_t i, j, m
    cdef double rt11, rt22, omr, rs, e1, e2, e3, h, sg1, sg2, rh, q1, m1, m2, rn
    rn = sqrt(n)
    buf.resize(N)
    with nogil:
        for i in range(B):
            rt11 = sqrt(s11[i])
            rt22 = sqrt(s22[i])
            omr = 1.0 - r[i] * r[i]
            rs = r[i] / sqrt(omr)
            for j in range(N):
                e1 = sqrt(chi_a[i, j] / s11[i])
                e2 = sqrt(chi_b[i, j] / (s22[i] * omr))
                e3 = z3[i, j] / rt11 - sqrt(chi_b[i, j]) / rt11 * rs
                h = hypot(e1, e3)
                sg1 = 1.0 / e1
                sg2 = h / (e1 * e2)
                rh = -e3 / h
                m1 = 0.0
                m2 = 0.0
                if means:
                    q1 = w1[i, j] / sqrt(chi_a[i, j])
                    m1 = xbar1[i] + q1 * rt11 / rn
                    m2 = (xbar2[i] + q1 * r[i] * rt22 / rn
                          + (w2[i, j] - z3[i, j] * q1) / sqrt(chi_b[i, j]) * sqrt(s22[i] * omr) / rn)
                buf[j] = _param(code, m1, m2, sg1, sg2, rh, d1, d2)
            for m in range(nk):
                nth_element(buf.begin(), buf.begin() + kk[m], buf.end())
                o[i, m] = buf[kk[m]]
    return out


cdef inline double _accept_ratio(int prior, double rho) nogil:
    cdef double c2 = 1.0 - rho * rho
    if prior == 0:
        return sqrt(c2)
    elif prior == 1:
        return sqrt(1.0 - rho * rho * rho * rho)
    elif prior == 2:
        return sqrt(2.0 * c2 / (2.0 - rho * rho))
    return c2 * sqrt(c2)


def rejection_fill(int code, int prior, const Py_ssize_t[:] rows,
                   const double[:, ::1] z3, const double[:, ::1] chi_a,
                   const double[:, ::1] chi_b, const double[:, ::1] u, z1, z2,
                   const double[:] xbar1, const double[:] xbar2, const double[:] s11,
                   const double[:] s22, const double[:] r, double n, double d1,
                   double d2, double[:, ::1] out, long long[:] filled):
    """Accept-reject on pre-drawn independence-Jeffreys proposals.

    Proposal row ``j`` belongs to dataset ``rows[j]``; accepted parameter
    values are appended to ``out[rows[j]]`` until it is full. The means, when
    needed, are xbar + L z / sqrt(n) with L the Cholesky factor of the
    accepted Sigma.
    """
    cdef Py_ssize_t J = z3.shape[0], M = z3.shape[1], cap = out.shape[1]
    cdef bint means = z1 is not None
    cdef const double[:, ::1] w1 = z1 if means else z3
    cdef const double[:, ::1] w2 = z2 if means else z3
    cdef Py_ssize_t j, t, i
    cdef long long k
    cdef double rt11, omr, rs, e1, e2, e3, h, rh, sg1, sg2, m1, m2, rn
    rn = sqrt(n)
    with nogil:
        for j in range(J):
            i = rows[j]
            k = filled[i]
            rt11 = sqrt(s11[i])
            omr = 1.0 - r[i] * r[i]
            rs = r[i] / sqrt(omr)
            for t in range(M):
                if k >= cap:
                    break
                e1 = sqrt(chi_a[j, t] / s11[i])
                e3 = z3[j, t] / rt11 - sqrt(chi_b[j, t]) / rt11 * rs
                h = hypot(e1, e3)
                rh = -e3 / h
                if u[j, t] > _accept_ratio(prior, rh):
                    continue
                e2 = sqrt(chi_b[j, t] / (s22[i] * omr))
                sg1 = 1.0 / e1
                sg2 = h / (e1 * e2)
                m1 = 0.0
                m2 = 0.0
                if means:
                    m1 = xbar1[i] + sg1 * w1[j, t] / rn
                    m2 = xbar2[i] + sg2 * (rh * w1[j, t] + sqrt(1.0 - rh * rh) * w2[j, t]) / rn
                out[i, k] = _param(code, m1, m2, sg1, sg2, rh, d1, d2)
                k += 1
            filled[i] = k
