# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a drop-in numpy counterpart in ``_kernels_py``;
``iftrkit.kernels`` decides at import time which one is used.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs, log, lgamma, sin, floor, M_PI
from scipy.special.cython_special cimport i0e

cnp.import_array()

cdef enum:
    MAX_TAYLOR = 90


cdef inline Py_ssize_t _lower_bound(const double[::1] a, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def rician_mixture(const double[::1] r, const double[::1] s, const double[::1] w,
                   double sigma2, double width=12.0):
    """Weighted sum of Rician densities with common diffuse variance.

    ``s`` must be sorted ascending.  Terms with ``|r - s| > width * sigma``
    are skipped; they are below ``exp(-width**2 / 2)`` relative to the peak.
    """
    cdef Py_ssize_t nr = r.shape[0], i, j, j0, j1
    cdef double sig = sqrt(sigma2), inv = 1.0 / sigma2, ri, acc, d
    out_arr = np.zeros(nr, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(nr):
            ri = r[i]
            if ri <= 0.0:
                continue
            j0 = _lower_bound(s, ri - width * sig)
            j1 = _lower_bound(s, ri + width * sig)
            acc = 0.0
            for j in range(j0, j1):
                d = ri - s[j]
                acc += w[j] * exp(-0.5 * d * d * inv) * i0e(ri * s[j] * inv)
            out[i] = acc * ri * inv
    return out_arr


cdef double _asymptotic(double m, double y, double* ok) noexcept nogil:
    """Large-argument form of 1F1(m; 1; -y) once the exponential part is negligible."""
    cdef double sn = sin(M_PI * m)
    cdef double t = 1.0, total = 1.0, ratio
    cdef int k
    ok[0] = 0.0
    if fabs(m - <double>(<long>(m + 0.5))) < 1e-12:
        # integer shape: the algebraic part vanishes identically
        ok[0] = 1.0
        return 0.0
    for k in range(200):
        ratio = (m + k) * (m + k) / ((k + 1.0) * y)
        if ratio >= 1.0:
            return 0.0
        t *= ratio
        total += t
        if fabs(t) < 1e-17 * fabs(total):
            ok[0] = 1.0
            break
    if ok[0] == 0.0:
        return 0.0
    return exp(-m * log(y) + lgamma(m)) * sn / M_PI * total


def kummer_profile(double m, const double[::1] y):
    """Evaluate 1F1(m; 1; -y) on an ascending grid of ``y >= 0``.

    The function solves ``y u'' + (1 + y) u' + m u = 0`` by Taylor stepping
    from the origin, with steps short enough that neither the oscillation
    nor the exponential mode costs accuracy.  Past the point where the
    exponentially small part is negligible, the algebraic asymptotic series
    takes over.
    """
    cdef Py_ssize_t n = y.shape[0], i = 0, k, nterm
    cdef double a[MAX_TAYLOR + 2]
    cdef double y0 = 0.0, u = 1.0, du = -m, h, om, t, v, dv, scale, nxt
    cdef double y_switch = m + 12.0 * sqrt(m) + 50.0
    cdef double ok = 0.0, asym
    cdef bint use_asym = False
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        while i < n:
            if use_asym:
                out[i] = _asymptotic(m, y[i], &ok)
                i += 1
                continue
            if y0 >= y_switch:
                asym = _asymptotic(m, y0, &ok)
                if ok != 0.0 and fabs(asym - u) < 1e-12:
                    use_asym = True
                    continue
            if y0 == 0.0:
                h = 0.5 / (m + 1.0)
                a[0] = 1.0
                nterm = 1
                for k in range(MAX_TAYLOR):
                    a[k + 1] = -a[k] * (m + k) / ((k + 1.0) * (k + 1.0))
                    nterm = k + 2
                    if fabs(a[k + 1]) * h ** (k + 1) < 1e-18:
                        break
            else:
                om = sqrt(m / y0) + 1.0
                h = 0.5 * y0
                if 2.0 / om < h:
                    h = 2.0 / om
                a[0] = u
                a[1] = du
                nterm = 2
                scale = fabs(u) + fabs(du) * h + 1e-300
                for k in range(MAX_TAYLOR - 1):
                    nxt = -((k + 1.0) * (k + 1.0 + y0) * a[k + 1] + (k + m) * a[k]) \
                        / (y0 * (k + 1.0) * (k + 2.0))
                    a[k + 2] = nxt
                    nterm = k + 3
                    if (fabs(a[k + 2]) * h ** (k + 2) + fabs(a[k + 1]) * h ** (k + 1)) < 1e-18 * (1.0 + scale):
                        break
            while i < n and y[i] <= y0 + h:
                t = y[i] - y0
                v = 0.0
                for k in range(nterm - 1, -1, -1):
                    v = v * t + a[k]
                out[i] = v
                i += 1
            v = 0.0
            dv = 0.0
            for k in range(nterm - 1, -1, -1):
                dv = dv * h + v
                v = v * h + a[k]
            u = v
            du = dv
            y0 = y0 + h
    return out_arr


def nondominated_ranks(const double[:, ::1] f):
    """Front index of every row of an objective matrix (0 = non-dominated).

    Implements the fast non-dominated sort: domination counts and
    dominated-sets are built in one pass, then peeled front by front.
    """
    cdef Py_ssize_t n = f.shape[0], d = f.shape[1], i, j, k, head, tail, cur_end, q
    cdef bint le_ij, lt_ij, le_ji, lt_ji
    count_arr = np.zeros(n, dtype=np.intp)
    rank_arr = np.full(n, -1, dtype=np.intp)
    # adjacency as dense boolean matrix: n is at most a few thousand
    dom_arr = np.zeros((n, n), dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] count = count_arr
    cdef Py_ssize_t[::1] rank = rank_arr
    cdef unsigned char[:, ::1] dom = dom_arr
    cdef Py_ssize_t[::1] queue = queue_arr
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                le_ij = True
                lt_ij = False
                le_ji = True
                lt_ji = False
                for k in range(d):
                    if f[i, k] > f[j, k]:
                        le_ij = False
                        lt_ji = True
                    elif f[i, k] < f[j, k]:
                        le_ji = False
                        lt_ij = True
                if le_ij and lt_ij:
                    dom[i, j] = 1
                    count[j] += 1
                elif le_ji and lt_ji:
                    dom[j, i] = 1
                    count[i] += 1
        tail = 0
        for i in range(n):
            if count[i] == 0:
                rank[i] = 0
                queue[tail] = i
                tail += 1
        head = 0
        while head < tail:
            cur_end = tail
            while head < cur_end:
                q = queue[head]
                head += 1
                for j in range(n):
                    if dom[q, j]:
                        count[j] -= 1
                        if count[j] == 0:
                            rank[j] = rank[q] + 1
                            queue[tail] = j
                            tail += 1
    return rank_arr


def bin_lagrange(const double[::1] s, const double[::1] w, double h, int order):
    """Spread weighted points ``s >= 0`` onto the grid ``g * h`` (``g >= 0``).

    Each point hands its weight to ``order`` consecutive grid nodes using
    the Lagrange basis polynomials of those nodes, so sums of any smooth
    function over the points are reproduced to interpolation accuracy.
    Nodes with negative index are folded onto ``-g``, which is exact for
    functions even in ``s``.
    """
    cdef Py_ssize_t n = s.shape[0], i, q, p, g
    cdef Py_ssize_t half = order // 2 - 1
    cdef double smax = 0.0, x, num, coef
    cdef long g0
    cdef double den[64]
    if order < 2 or order > 64:
        raise ValueError("order must lie in [2, 64]")
    for i in range(n):
        if s[i] > smax:
            smax = s[i]
    cdef Py_ssize_t size = <Py_ssize_t>(smax / h) + order + 2
    out_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for q in range(order):
            coef = 1.0
            for p in range(order):
                if p != q:
                    coef *= <double>(q - p)
            den[q] = coef
        for i in range(n):
            x = s[i] / h
            g0 = <long>floor(x) - half
            for q in range(order):
                num = w[i] / den[q]
                for p in range(order):
                    if p != q:
                        num *= x - <double>(g0 + p)
                g = g0 + q
                if g < 0:
                    g = -g
                out[g] += num
    return out_arr
