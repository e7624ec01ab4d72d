"""Numba twins of the numpy kernels.

Loop-style implementations compiled with ``@njit``. Arithmetic follows
numpy_impl.py operation for operation (including evaluation order in
the symmetrized clauses and the offset trick in the row-diameter
search) so results match the numpy backend bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_THIRDS = 2.0 / 3.0
FOUR_THIRDS = 4.0 / 3.0
ONE_THIRD = 1.0 / 3.0
FIVE_THIRDS = 5.0 / 3.0
BETWEEN_TOL = 1e-9
DIAMETER_ROW_BLOCK = 1024


@njit(cache=True)
def _cdist(a, b, L):
    delta = abs(a - b) % L
    if delta <= L - delta:
        return delta
    return L - delta


@njit(cache=True)
def circle_dist(a, b, L):
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    out = np.empty(a.shape, dtype=np.float64)
    af = a.ravel()
    bf = b.ravel()
    of = out.ravel()
    for i in range(af.shape[0]):
        of[i] = _cdist(af[i], bf[i], L)
    return out


@njit(cache=True)
def rows_diameter_circle(rows, L):
    R, k = rows.shape
    out = np.empty(R, dtype=np.float64)
    if k < 2:
        for r in range(R):
            out[r] = 0.0
        return out
    half = L / 2.0
    for r in range(R):
        arr = np.sort(rows[r].copy())
        off = 2.0 * L * (r % DIAMETER_ROW_BLOCK)
        shifted = arr + off
        best = 0.0
        for i in range(k):
            target = (arr[i] + half) % L + off
            # bisect_left over the shifted row
            lo, hi = 0, k
            while lo < hi:
                mid = (lo + hi) // 2
                if shifted[mid] < target:
                    lo = mid + 1
                else:
                    hi = mid
            for step in range(2):
                j = (lo - step) % k
                d = _cdist(arr[i], arr[j], L)
                if d > best:
                    best = d
        out[r] = best
    return out


@njit(cache=True)
def rows_diameter_interval(rows):
    R, k = rows.shape
    out = np.empty(R, dtype=np.float64)
    for r in range(R):
        mx = rows[r, 0]
        mn = rows[r, 0]
        for i in range(1, k):
            v = rows[r, i]
            if v > mx:
                mx = v
            if v < mn:
                mn = v
        out[r] = mx - mn
    return out


@njit(cache=True)
def rows_diameter_triode(legs, ts):
    R, k = legs.shape
    out = np.empty(R, dtype=np.float64)
    for r in range(R):
        best = 0.0
        maxs = np.zeros(3, dtype=np.float64)
        mins = np.zeros(3, dtype=np.float64)
        present = np.zeros(3, dtype=np.bool_)
        for c in range(3):
            tmax = -np.inf
            tmin = np.inf
            found = False
            for i in range(k):
                if legs[r, i] == c:
                    found = True
                    v = ts[r, i]
                    if v > tmax:
                        tmax = v
                    if v < tmin:
                        tmin = v
            present[c] = found
            if found:
                maxs[c] = tmax
                mins[c] = tmin
                ext = tmax - tmin
                if ext > best:
                    best = ext
        for c1 in range(3):
            for c2 in range(c1 + 1, 3):
                if present[c1] and present[c2]:
                    s = maxs[c1]
                    t = maxs[c2]
                    cross = np.sqrt(s * s + t * t + s * t)
                    if cross > best:
                        best = cross
        out[r] = best
    return out


@njit(cache=True)
def zero_one_op(w, z):
    w = np.ascontiguousarray(w)
    z = np.ascontiguousarray(z)
    out = np.empty(w.shape, dtype=np.float64)
    wf = w.ravel()
    zf = z.ravel()
    of = out.ravel()
    for i in range(wf.shape[0]):
        if wf[i] == 0.0:
            of[i] = zf[i]
        elif wf[i] == 1.0:
            of[i] = 1.0
        else:
            if zf[i] < TWO_THIRDS:
                of[i] = ONE_THIRD
            elif zf[i] < FOUR_THIRDS:
                of[i] = 1.0
            else:
                of[i] = FIVE_THIRDS
    return out


@njit(cache=True)
def idem_comm_op(s, t):
    s = np.ascontiguousarray(s)
    t = np.ascontiguousarray(t)
    out = np.empty(s.shape, dtype=np.float64)
    sf = s.ravel()
    tf = t.ravel()
    of = out.ravel()
    for i in range(sf.shape[0]):
        x = sf[i]
        y = tf[i]
        in01x = 0.0 <= x <= 1.0
        in01y = 0.0 <= y <= 1.0
        in13x = 1.0 <= x <= 3.0
        in13y = 1.0 <= y <= 3.0
        in23x = 2.0 <= x <= 3.0
        in23y = 2.0 <= y <= 3.0
        in12x = 1.0 <= x <= 2.0
        in12y = 1.0 <= y <= 2.0
        mx = max(x, y)
        if in01x and in01y:
            of[i] = mx
        elif in13x and in13y:
            of[i] = mx
        elif in01x and in23y:
            of[i] = (1.0 + x + y) % 3.0
        elif in01y and in23x:
            of[i] = (1.0 + y + x) % 3.0
        elif in01x and in12y:
            of[i] = (2.0 + y) % 3.0
        elif in01y and in12x:
            of[i] = (2.0 + x) % 3.0
        else:
            of[i] = mx
    return out


@njit(cache=True)
def majority_op(a, b, c):
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    c = np.ascontiguousarray(c)
    out = np.empty(a.shape, dtype=np.float64)
    af = a.ravel()
    bf = b.ravel()
    cf = c.ravel()
    of = out.ravel()
    for i in range(af.shape[0]):
        p1 = af[i]
        p2 = bf[i]
        p3 = cf[i]
        if p1 > p2:
            p1, p2 = p2, p1
        if p2 > p3:
            p2, p3 = p3, p2
        if p1 > p2:
            p1, p2 = p2, p1
        d12 = _cdist(p1, p2, 2.0)
        d23 = _cdist(p2, p3, 2.0)
        d13 = _cdist(p1, p3, 2.0)
        s12 = d12 < TWO_THIRDS
        s23 = d23 < TWO_THIRDS
        s13 = d13 < TWO_THIRDS
        count = int(s12) + int(s23) + int(s13)
        if count == 3:
            if abs(d13 - (d12 + d23)) <= BETWEEN_TOL:
                of[i] = p2
            elif abs(d23 - (d12 + d13)) <= BETWEEN_TOL:
                of[i] = p1
            else:
                of[i] = p3
        elif count == 2:
            if not s12:
                of[i] = p3
            elif not s23:
                of[i] = p1
            else:
                of[i] = p2
        elif count == 1:
            if s12:
                of[i] = p1
            elif s23:
                of[i] = p2
            else:
                of[i] = p1
        else:
            of[i] = p1
    return out


@njit(cache=True)
def _phi(leg, t):
    if leg == 0.0:
        return ONE_THIRD - t / 3.0
    if leg == 1.0:
        return ONE_THIRD + t / 3.0
    if t == 0.0:
        return ONE_THIRD
    return TWO_THIRDS + t / 3.0


@njit(cache=True)
def triode_phi(legs, ts):
    legs = np.ascontiguousarray(legs)
    ts = np.ascontiguousarray(ts)
    out = np.empty(legs.shape, dtype=np.float64)
    lf = legs.ravel()
    tf = ts.ravel()
    of = out.ravel()
    for i in range(lf.shape[0]):
        of[i] = _phi(lf[i], tf[i])
    return out


@njit(cache=True)
def triode_meet(l1, t1, l2, t2):
    l1 = np.ascontiguousarray(l1)
    t1 = np.ascontiguousarray(t1)
    l2 = np.ascontiguousarray(l2)
    t2 = np.ascontiguousarray(t2)
    lo = np.empty(l1.shape, dtype=np.float64)
    to = np.empty(l1.shape, dtype=np.float64)
    l1f, t1f, l2f, t2f = l1.ravel(), t1.ravel(), l2.ravel(), t2.ravel()
    lof, tof = lo.ravel(), to.ravel()
    for i in range(l1f.shape[0]):
        if _phi(l1f[i], t1f[i]) <= _phi(l2f[i], t2f[i]):
            lof[i] = l1f[i]
            tof[i] = t1f[i]
        else:
            lof[i] = l2f[i]
            tof[i] = t2f[i]
    return lo, to


@njit(cache=True)
def triode_join(l1, t1, l2, t2):
    l1 = np.ascontiguousarray(l1)
    t1 = np.ascontiguousarray(t1)
    l2 = np.ascontiguousarray(l2)
    t2 = np.ascontiguousarray(t2)
    lo = np.empty(l1.shape, dtype=np.float64)
    to = np.empty(l1.shape, dtype=np.float64)
    l1f, t1f, l2f, t2f = l1.ravel(), t1.ravel(), l2.ravel(), t2.ravel()
    lof, tof = lo.ravel(), to.ravel()
    for i in range(l1f.shape[0]):
        if _phi(l1f[i], t1f[i]) >= _phi(l2f[i], t2f[i]):
            lof[i] = l1f[i]
            tof[i] = t1f[i]
        else:
            lof[i] = l2f[i]
            tof[i] = t2f[i]
    return lo, to


@njit(cache=True)
def hilbert_d2xy(order, d):
    d = np.ascontiguousarray(d)
    x = np.zeros(d.shape, dtype=np.int64)
    y = np.zeros(d.shape, dtype=np.int64)
    df = d.ravel()
    xf = x.ravel()
    yf = y.ravel()
    n = np.int64(1) << order
    for i in range(df.shape[0]):
        t = df[i]
        xi = np.int64(0)
        yi = np.int64(0)
        s = np.int64(1)
        while s < n:
            rx = np.int64(1) & (t // 2)
            ry = np.int64(1) & (t ^ rx)
            if ry == 0:
                if rx == 1:
                    xi = s - 1 - xi
                    yi = s - 1 - yi
                xi, yi = yi, xi
            xi = xi + s * rx
            yi = yi + s * ry
            t = t // 4
            s *= 2
        xf[i] = xi
        yf[i] = yi
    return x, y


@njit(cache=True)
def hilbert_xy2d(order, x, y):
    x = np.ascontiguousarray(x)
    y = np.ascontiguousarray(y)
    d = np.zeros(x.shape, dtype=np.int64)
    xf = x.ravel()
    yf = y.ravel()
    df = d.ravel()
    for i in range(xf.shape[0]):
        xi = xf[i]
        yi = yf[i]
        di = np.int64(0)
        s = np.int64(1) << (order - 1)
        while s > 0:
            rx = np.int64(1) if (xi & s) > 0 else np.int64(0)
            ry = np.int64(1) if (yi & s) > 0 else np.int64(0)
            di += s * s * ((3 * rx) ^ ry)
            if ry == 0:
                if rx == 1:
                    xi = s - 1 - xi
                    yi = s - 1 - yi
                xi, yi = yi, xi
            s //= 2
        df[i] = di
    return d
