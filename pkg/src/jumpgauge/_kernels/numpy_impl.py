"""Vectorized numpy implementations of the hot kernels.

Every function here has a numba twin with the same name and the same
arithmetic, so the two backends produce bitwise-identical outputs.
Inputs are float64 arrays (int64 for Hilbert indices); shapes are
documented per function.
"""

from __future__ import annotations

import numpy as np

TWO_THIRDS = 2.0 / 3.0
FOUR_THIRDS = 4.0 / 3.0
ONE_THIRD = 1.0 / 3.0
FIVE_THIRDS = 5.0 / 3.0
BETWEEN_TOL = 1e-9


def circle_dist(a, b, L):
    """Elementwise arc distance on a circle of circumference L."""
    delta = np.abs(np.asarray(a) - np.asarray(b)) % L
    return np.minimum(delta, L - delta)


# rows are processed in blocks so the searchsorted offsets stay small;
# the numba twin adds the same per-row offset before its binary search,
# which keeps every comparison bit-identical across backends
DIAMETER_ROW_BLOCK = 1024


def rows_diameter_circle(rows, L):
    """Exact diameter of each row of circle parameters. rows: (R, k).

    The farthest partner of a sample is the sample nearest its
    antipode, so after sorting each row the two candidates bracketing
    the antipode insertion index realize the row diameter.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    R, k = rows.shape
    if k < 2:
        return np.zeros(R, dtype=np.float64)
    out = np.empty(R, dtype=np.float64)
    for start in range(0, R, DIAMETER_ROW_BLOCK):
        arr = np.sort(rows[start : start + DIAMETER_ROW_BLOCK], axis=1)
        r = arr.shape[0]
        targets = (arr + L / 2.0) % L
        offs = np.arange(r, dtype=np.float64)[:, None] * (2.0 * L)
        flat = (arr + offs).ravel()
        tflat = (targets + offs).ravel()
        idx = np.searchsorted(flat, tflat).reshape(r, k)
        local = idx - np.arange(r)[:, None] * k
        best = np.zeros(r, dtype=np.float64)
        for off in (0, -1):
            j = (local + off) % k
            partner = np.take_along_axis(arr, j, axis=1)
            d = circle_dist(arr, partner, L)
            best = np.maximum(best, d.max(axis=1))
        out[start : start + r] = best
    return out


def rows_diameter_interval(rows):
    """Diameter of each row under the absolute-value metric."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    return rows.max(axis=1) - rows.min(axis=1)


def rows_diameter_triode(legs, ts):
    """Exact diameter of each row of triode points.

    legs, ts: (R, k) leg codes in {0,1,2} and leg parameters. Same-leg
    extent is max minus min; cross-leg distance grows in both
    parameters, so only per-leg maxima enter the cross terms.
    """
    legs = np.asarray(legs, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    if legs.ndim == 1:
        legs = legs[None, :]
        ts = ts[None, :]
    R = legs.shape[0]
    best = np.zeros(R, dtype=np.float64)
    maxs = np.zeros((R, 3), dtype=np.float64)
    present = np.zeros((R, 3), dtype=bool)
    for c in range(3):
        mask = legs == c
        present[:, c] = mask.any(axis=1)
        tmax = np.where(mask, ts, -np.inf).max(axis=1)
        tmin = np.where(mask, ts, np.inf).min(axis=1)
        maxs[:, c] = np.where(present[:, c], tmax, 0.0)
        extent = np.where(present[:, c], tmax - tmin, 0.0)
        best = np.maximum(best, extent)
    for c1 in range(3):
        for c2 in range(c1 + 1, 3):
            both = present[:, c1] & present[:, c2]
            s, t = maxs[:, c1], maxs[:, c2]
            cross = np.sqrt(s * s + t * t + s * t)
            best = np.maximum(best, np.where(both, cross, 0.0))
    return best


def zero_one_op(w, z):
    """Binary op on the circumference-2 circle with unit 0.0, zero 1.0.

    Acting on the unit it returns its argument, acting on the zero it
    returns the zero, and for any other first argument it collapses the
    second to one of three equally spaced anchors.
    """
    w = np.asarray(w, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    sector = np.where(z < TWO_THIRDS, ONE_THIRD, np.where(z < FOUR_THIRDS, 1.0, FIVE_THIRDS))
    return np.where(w == 0.0, z, np.where(w == 1.0, 1.0, sector))


def idem_comm_op(s, t):
    """Idempotent commutative binary op on the circumference-3 circle.

    Piecewise definition over the nine unit squares of the torus;
    symmetrized clause by clause, first matching clause wins.
    """
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    in01s, in01t = (s >= 0.0) & (s <= 1.0), (t >= 0.0) & (t <= 1.0)
    in13s, in13t = (s >= 1.0) & (s <= 3.0), (t >= 1.0) & (t <= 3.0)
    in23s, in23t = (s >= 2.0) & (s <= 3.0), (t >= 2.0) & (t <= 3.0)
    in12s, in12t = (s >= 1.0) & (s <= 2.0), (t >= 1.0) & (t <= 2.0)
    mx = np.maximum(s, t)
    conds = [
        in01s & in01t,
        in13s & in13t,
        in01s & in23t,
        in01t & in23s,
        in01s & in12t,
        in01t & in12s,
    ]
    vals = [
        mx,
        mx,
        (1.0 + s + t) % 3.0,
        (1.0 + t + s) % 3.0,
        (2.0 + t) % 3.0,
        (2.0 + s) % 3.0,
    ]
    return np.select(conds, vals, default=mx)


def majority_op(a, b, c):
    """Ternary near-majority op on the circumference-2 circle.

    Evaluates on the parameter-sorted triple, which makes the result
    independent of argument order bit for bit. Clause selection follows
    the count of pairwise distances below 2/3.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    trip = np.sort(np.stack([a, b, c], axis=-1), axis=-1)
    p1, p2, p3 = trip[..., 0], trip[..., 1], trip[..., 2]
    d12 = circle_dist(p1, p2, 2.0)
    d23 = circle_dist(p2, p3, 2.0)
    d13 = circle_dist(p1, p3, 2.0)
    s12, s23, s13 = d12 < TWO_THIRDS, d23 < TWO_THIRDS, d13 < TWO_THIRDS
    count = s12.astype(np.int64) + s23.astype(np.int64) + s13.astype(np.int64)
    # all distances small: return the point between the other two
    bet2 = np.abs(d13 - (d12 + d23)) <= BETWEEN_TOL
    bet1 = np.abs(d23 - (d12 + d13)) <= BETWEEN_TOL
    all_small = np.where(bet2, p2, np.where(bet1, p1, p3))
    # exactly two small: return the point the two small distances share
    two_small = np.where(~s12, p3, np.where(~s23, p1, p2))
    # exactly one small: least parameter of the close pair
    one_small = np.where(s12, p1, np.where(s23, p2, p1))
    out = np.where(
        count == 3,
        all_small,
        np.where(count == 2, two_small, np.where(count == 1, one_small, p1)),
    )
    return out


def triode_phi(legs, ts):
    """Order parameter of the pulled-back chain on the triode.

    Leg A runs from 1/3 at the center down to 0 at its end vertex, leg
    B from 1/3 up to 2/3, leg C covers (2/3, 1] with the center cut
    off: the assignment is a bijection onto [0, 1] but deliberately
    discontinuous where leg C approaches the center.
    """
    legs = np.asarray(legs, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    a_val = ONE_THIRD - ts / 3.0
    b_val = ONE_THIRD + ts / 3.0
    c_val = np.where(ts == 0.0, ONE_THIRD, TWO_THIRDS + ts / 3.0)
    return np.where(legs == 0.0, a_val, np.where(legs == 1.0, b_val, c_val))


def triode_meet(l1, t1, l2, t2):
    """Lattice meet pulled back through the chain bijection.

    Returns the input point whose order parameter is smaller, so the
    output is bitwise one of the operands.
    """
    u1 = triode_phi(l1, t1)
    u2 = triode_phi(l2, t2)
    take_first = u1 <= u2
    return (
        np.where(take_first, np.asarray(l1, dtype=np.float64), np.asarray(l2, dtype=np.float64)),
        np.where(take_first, np.asarray(t1, dtype=np.float64), np.asarray(t2, dtype=np.float64)),
    )


def triode_join(l1, t1, l2, t2):
    """Lattice join pulled back through the chain bijection."""
    u1 = triode_phi(l1, t1)
    u2 = triode_phi(l2, t2)
    take_first = u1 >= u2
    return (
        np.where(take_first, np.asarray(l1, dtype=np.float64), np.asarray(l2, dtype=np.float64)),
        np.where(take_first, np.asarray(t1, dtype=np.float64), np.asarray(t2, dtype=np.float64)),
    )


def hilbert_d2xy(order, d):
    """Map curve indices to lattice coordinates on a 2^order grid."""
    d = np.asarray(d, dtype=np.int64)
    n = np.int64(1) << order
    x = np.zeros_like(d)
    y = np.zeros_like(d)
    t = d.copy()
    s = np.int64(1)
    while s < n:
        rx = np.int64(1) & (t // 2)
        ry = np.int64(1) & (t ^ rx)
        # rotate quadrant contents
        flip = (ry == 0) & (rx == 1)
        xf = np.where(flip, s - 1 - x, x)
        yf = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x2 = np.where(swap, yf, xf)
        y2 = np.where(swap, xf, yf)
        x = x2 + s * rx
        y = y2 + s * ry
        t = t // 4
        s *= 2
    return x, y


def hilbert_xy2d(order, x, y):
    """Map lattice coordinates to curve indices on a 2^order grid."""
    x = np.asarray(x, dtype=np.int64).copy()
    y = np.asarray(y, dtype=np.int64).copy()
    d = np.zeros_like(x)
    s = np.int64(1) << (order - 1)
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        # rotate
        flip = (ry == 0) & (rx == 1)
        xf = np.where(flip, s - 1 - x, x)
        yf = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x2 = np.where(swap, yf, xf)
        y2 = np.where(swap, xf, yf)
        x, y = x2, y2
        s //= 2
    return d
