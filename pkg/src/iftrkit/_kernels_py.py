"""Pure numpy implementations of the compiled kernels.

These follow the same contracts as ``_kernels.pyx`` and are used when the
extension is unavailable or ``IFTRKIT_PURE_PYTHON`` is set.
"""

import numpy as np
from scipy.special import hyp1f1, i0e


def rician_mixture(r, s, w, sigma2, width=12.0):
    """Weighted sum of Rician densities with common diffuse variance."""
    r = np.ascontiguousarray(r, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    out = np.zeros(r.size)
    sig = np.sqrt(sigma2)
    lo = np.searchsorted(s, r - width * sig, side="left")
    hi = np.searchsorted(s, r + width * sig, side="left")
    # group points into chunks so the dense block stays a few MB
    chunk = max(1, int(4_000_000 // max(1, int(np.max(hi - lo, initial=1)))))
    for start in range(0, r.size, chunk):
        stop = min(r.size, start + chunk)
        j0, j1 = lo[start:stop].min(initial=0), hi[start:stop].max(initial=0)
        if j1 <= j0:
            continue
        rr = r[start:stop, None]
        ss = s[None, j0:j1]
        d = rr - ss
        block = np.exp(-0.5 * d * d / sigma2) * i0e(rr * ss / sigma2)
        block[np.abs(d) > width * sig] = 0.0
        out[start:stop] = block @ w[j0:j1]
    out *= r / sigma2
    out[r <= 0] = 0.0
    return out


def kummer_profile(m, y):
    """Evaluate 1F1(m; 1; -y) on a grid of ``y >= 0``."""
    return hyp1f1(m, 1.0, -np.asarray(y, dtype=float))


def nondominated_ranks(f):
    """Front index of every row of an objective matrix (0 = non-dominated)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    le = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    lt = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dom = le & lt
    count = dom.sum(axis=0)
    rank = np.full(n, -1, dtype=np.intp)
    current = np.flatnonzero(count == 0)
    level = 0
    while current.size:
        rank[current] = level
        count = count - dom[current].sum(axis=0)
        count[rank >= 0] = -1
        current = np.flatnonzero(count == 0)
        level += 1
    return rank


def bin_lagrange(s, w, h, order):
    """Spread weighted points ``s >= 0`` onto the grid ``g * h`` (``g >= 0``)."""
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    if order < 2 or order > 64:
        raise ValueError("order must lie in [2, 64]")
    size = int(np.max(s, initial=0.0) / h) + order + 2
    out = np.zeros(size)
    x = s / h
    g0 = np.floor(x).astype(np.int64) - (order // 2 - 1)
    for q in range(order):
        num = w.copy()
        den = 1.0
        for p in range(order):
            if p != q:
                num = num * (x - (g0 + p))
                den *= q - p
        out += np.bincount(np.abs(g0 + q), weights=num / den, minlength=size)[:size]
    return out
