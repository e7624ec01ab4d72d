"""Metric carrier spaces, points, grids, and geodesics.

Every estimator in this package works over one of five concrete
carriers: a circle of configurable circumference, the unit interval,
a real window, the planar triode, or a finite product of these.
Points use a canonical parameterization per carrier:

* circle: arc-length parameter ``s`` in ``[0, L)``
* interval: float in ``[0, 1]``
* window: float in ``[lo, hi]``
* triode: ``TriodePoint(leg, t)`` with ``leg`` in ``{A, B, C}`` and
  ``t`` in ``[0, 1]``; ``t == 0`` is the shared center regardless of tag
* product: tuple of member points

Spaces also define a canonical float64 array encoding used by the
batch estimators (one column per scalar slot, two for triode points).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SpaceMismatchError",
    "GeodesicError",
    "AntipodalPairError",
    "GeodesicUnsupportedError",
    "TriodePoint",
    "Grid",
    "Space",
    "CircleSpace",
    "IntervalSpace",
    "RealWindow",
    "TriodeSpace",
    "ProductSpace",
    "distance",
    "diameter",
    "grid",
    "geodesic_point",
    "space_from_jsonable",
]

TRIODE_LEGS = ("A", "B", "C")

# Cartesian product grids larger than this are refused rather than
# silently exhausting memory; estimators subsample instead.
MAX_GRID_POINTS = 2_000_000


class SpaceMismatchError(ValueError):
    """A point does not belong to the space it was used with."""


class GeodesicError(ValueError):
    """No geodesic point can be produced for the given arguments."""


class AntipodalPairError(GeodesicError):
    """Circle pair at exactly half the circumference: no unique shorter arc."""


class GeodesicUnsupportedError(GeodesicError):
    """The space's metric does not support in-space geodesic interpolation."""


@dataclass(frozen=True)
class TriodePoint:
    """Point on the triode: leg tag plus distance from the center.

    The center is shared by all three legs, so any point with ``t == 0``
    is canonicalized to leg ``A`` and compares equal across tags.
    """

    leg: str
    t: float

    def __post_init__(self) -> None:
        if self.leg not in TRIODE_LEGS:
            raise ValueError(f"triode leg must be one of {TRIODE_LEGS}, got {self.leg!r}")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"triode parameter must lie in [0, 1], got {self.t}")
        if self.t == 0.0:
            object.__setattr__(self, "leg", "A")
            object.__setattr__(self, "t", 0.0)

    @property
    def is_center(self) -> bool:
        return self.t == 0.0


@dataclass(frozen=True)
class Grid:
    """Deterministic finite sample of a space.

    ``mesh`` is the covering radius: every point of the space lies
    within ``mesh`` of some grid point.
    """

    space: "Space"
    points: tuple
    mesh: float

    def __len__(self) -> int:
        return len(self.points)

    def encoded(self) -> np.ndarray:
        return self.space.encode(self.points)


class Space:
    """Base class for metric carriers.

    Subclasses implement the scalar metric, the canonical array
    encoding, grid generation, and uniform random sampling. All
    operations are pure; instances are safe to share between threads.
    """

    kind: str = "abstract"

    # number of float64 columns a point occupies in the array encoding
    width: int = 1

    def distance(self, p, q) -> float:
        raise NotImplementedError

    @property
    def full_diameter(self) -> float:
        """Diameter of the whole space (sup of pairwise distances)."""
        raise NotImplementedError

    def contains(self, p) -> bool:
        try:
            self.check_point(p)
        except SpaceMismatchError:
            return False
        return True

    def check_point(self, p) -> None:
        raise NotImplementedError

    def grid(self, n: int) -> Grid:
        raise NotImplementedError

    def sample_array(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform random sample, returned in the array encoding."""
        raise NotImplementedError

    def encode(self, points: Sequence) -> np.ndarray:
        raise NotImplementedError

    def decode(self, arr: np.ndarray) -> list:
        raise NotImplementedError

    def distance_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise distances between two encoded arrays."""
        raise NotImplementedError

    def geodesic_point(self, p, q, t: float):
        raise GeodesicUnsupportedError(
            f"{self.kind} space does not support geodesic interpolation"
        )

    def to_jsonable(self) -> dict:
        raise NotImplementedError

    def point_to_jsonable(self, p):
        raise NotImplementedError

    def point_from_jsonable(self, obj):
        raise NotImplementedError

    def set_diameter(self, points: Sequence) -> float:
        """Exact diameter of a finite point set (max pairwise distance)."""
        if len(points) == 0:
            raise ValueError("diameter of an empty point set is undefined")
        enc = self.encode(points)
        return float(self.encoded_diameter(enc))

    def encoded_diameter(self, enc: np.ndarray) -> float:
        # generic quadratic fallback; subclasses override with exact
        # linear or n-log-n algorithms where the geometry allows
        n = enc.shape[0]
        if n == 1:
            return 0.0
        best = 0.0
        chunk = max(1, 4_000_000 // max(n, 1))
        for i in range(0, n, chunk):
            block = enc[i : i + chunk]
            left = np.repeat(block, n, axis=0)
            right = np.tile(enc, (block.shape[0], 1))
            d = self.distance_array(left, right)
            best = max(best, float(d.max()))
        return best


# ---------------------------------------------------------------------------
# circle


def _circle_dist_scalar(a: float, b: float, L: float) -> float:
    delta = abs(a - b) % L
    return min(delta, L - delta)


@dataclass(frozen=True)
class CircleSpace(Space):
    """Circle of circumference ``L`` with the arc-length metric.

    The canonical parameter is arc length in ``[0, L)``. The default
    circumference 2 makes the diameter exactly 1.
    """

    L: float = 2.0
    kind = "circle"
    width = 1

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError("circle circumference must be positive")

    def canonical(self, s: float) -> float:
        return float(s) % self.L

    def check_point(self, p) -> None:
        if not isinstance(p, (float, int)) or isinstance(p, bool):
            raise SpaceMismatchError(f"circle point must be a real parameter, got {p!r}")
        if not 0.0 <= float(p) < self.L:
            raise SpaceMismatchError(f"circle parameter {p} outside [0, {self.L})")

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        return _circle_dist_scalar(float(p), float(q), self.L)

    @property
    def full_diameter(self) -> float:
        return self.L / 2.0

    def grid(self, n: int) -> Grid:
        if n < 2:
            raise ValueError("grid needs n >= 2")
        step = self.L / n
        pts = tuple(i * step for i in range(n))
        return Grid(self, pts, mesh=step / 2.0)

    def sample_array(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(0.0, self.L, size=n)

    def encode(self, points: Sequence) -> np.ndarray:
        return np.asarray(points, dtype=np.float64)

    def decode(self, arr: np.ndarray) -> list:
        return [float(x) for x in np.asarray(arr, dtype=np.float64).ravel()]

    def distance_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        delta = np.abs(np.asarray(a) - np.asarray(b)) % self.L
        return np.minimum(delta, self.L - delta)

    def encoded_diameter(self, enc: np.ndarray) -> float:
        arr = np.sort(np.asarray(enc, dtype=np.float64).ravel())
        n = arr.shape[0]
        if n < 2:
            return 0.0
        # farthest partner of each sample is the sample nearest its
        # antipode; candidates bracket the antipode insertion index
        targets = (arr + self.L / 2.0) % self.L
        idx = np.searchsorted(arr, targets)
        best = 0.0
        for off in (0, -1):
            j = (idx + off) % n
            d = self.distance_array(arr, arr[j])
            best = max(best, float(d.max()))
        return best

    def geodesic_point(self, p, q, t: float):
        self.check_point(p)
        self.check_point(q)
        if not 0.0 <= t <= 1.0:
            raise ValueError("geodesic fraction must lie in [0, 1]")
        if t == 0.0:
            return float(p)
        if t == 1.0:
            return float(q)
        raw = (float(q) - float(p)) % self.L
        half = self.L / 2.0
        if abs(raw - half) <= 1e-12:
            raise AntipodalPairError(
                f"points {p} and {q} are antipodal on circumference {self.L}"
            )
        delta = raw if raw < half else raw - self.L
        return (float(p) + t * delta) % self.L

    def to_jsonable(self) -> dict:
        return {"space": "circle", "L": self.L}

    def point_to_jsonable(self, p):
        return {"circle": float(p)}

    def point_from_jsonable(self, obj):
        return float(obj["circle"])


# ---------------------------------------------------------------------------
# interval and window


@dataclass(frozen=True)
class RealWindow(Space):
    """Closed real interval ``[lo, hi]`` with the absolute-value metric."""

    lo: float
    hi: float
    kind = "window"
    width = 1
    _point_key: str = field(default="real", repr=False)

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("window needs lo < hi")

    def check_point(self, p) -> None:
        if not isinstance(p, (float, int)) or isinstance(p, bool):
            raise SpaceMismatchError(f"window point must be a real number, got {p!r}")
        if not self.lo <= float(p) <= self.hi:
            raise SpaceMismatchError(f"point {p} outside [{self.lo}, {self.hi}]")

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        return abs(float(p) - float(q))

    @property
    def full_diameter(self) -> float:
        return self.hi - self.lo

    @property
    def radius(self) -> float:
        return (self.hi - self.lo) / 2.0

    def grid(self, n: int) -> Grid:
        if n < 2:
            raise ValueError("grid needs n >= 2")
        pts = tuple(float(x) for x in np.linspace(self.lo, self.hi, n))
        step = (self.hi - self.lo) / (n - 1)
        return Grid(self, pts, mesh=step / 2.0)

    def sample_array(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)

    def encode(self, points: Sequence) -> np.ndarray:
        return np.asarray(points, dtype=np.float64)

    def decode(self, arr: np.ndarray) -> list:
        return [float(x) for x in np.asarray(arr, dtype=np.float64).ravel()]

    def distance_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(a) - np.asarray(b))

    def encoded_diameter(self, enc: np.ndarray) -> float:
        arr = np.asarray(enc, dtype=np.float64).ravel()
        if arr.shape[0] < 2:
            return 0.0
        return float(arr.max() - arr.min())

    def geodesic_point(self, p, q, t: float):
        self.check_point(p)
        self.check_point(q)
        if not 0.0 <= t <= 1.0:
            raise ValueError("geodesic fraction must lie in [0, 1]")
        if t == 0.0:
            return float(p)
        if t == 1.0:
            return float(q)
        return float(p) + t * (float(q) - float(p))

    def to_jsonable(self) -> dict:
        return {"space": "window", "lo": self.lo, "hi": self.hi}

    def point_to_jsonable(self, p):
        return {self._point_key: float(p)}

    def point_from_jsonable(self, obj):
        return float(obj[self._point_key])


@dataclass(frozen=True)
class IntervalSpace(RealWindow):
    """The unit interval ``[0, 1]`` with the usual metric."""

    lo: float = 0.0
    hi: float = 1.0
    kind = "interval"
    _point_key: str = field(default="interval", repr=False)

    def __post_init__(self) -> None:
        if (self.lo, self.hi) != (0.0, 1.0):
            raise ValueError("interval space is fixed to [0, 1]; use RealWindow")

    def to_jsonable(self) -> dict:
        return {"space": "interval"}


# ---------------------------------------------------------------------------
# triode


@dataclass(frozen=True)
class TriodeSpace(Space):
    """Three unit segments glued at a common center, planar metric.

    The legs leave the center at 90, 210 and 330 degrees, so they are
    pairwise 120 degrees apart and the space inherits the Euclidean
    metric of the plane: points on one leg at parameters s and t are
    |s - t| apart, points on different legs are sqrt(s^2 + t^2 + s t)
    apart. End vertices are sqrt(3) from each other and 1 from the
    center.
    """

    kind = "triode"
    width = 2

    def check_point(self, p) -> None:
        if not isinstance(p, TriodePoint):
            raise SpaceMismatchError(f"triode point expected, got {p!r}")

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        if p.leg == q.leg:
            return abs(p.t - q.t)
        # center points carry t=0, so the chord formula covers them too
        return math.sqrt(p.t * p.t + q.t * q.t + p.t * q.t)

    @property
    def full_diameter(self) -> float:
        return math.sqrt(3.0)

    def vertex(self, leg: str) -> TriodePoint:
        return TriodePoint(leg, 1.0)

    @property
    def center(self) -> TriodePoint:
        return TriodePoint("A", 0.0)

    def grid(self, n: int) -> Grid:
        if n < 2:
            raise ValueError("grid needs n >= 2 points per leg")
        pts = [self.center]
        for leg in TRIODE_LEGS:
            for i in range(1, n):
                pts.append(TriodePoint(leg, i / (n - 1)))
        return Grid(self, tuple(pts), mesh=0.5 / (n - 1))

    def sample_array(self, rng: np.random.Generator, n: int) -> np.ndarray:
        legs = rng.integers(0, 3, size=n).astype(np.float64)
        ts = rng.uniform(0.0, 1.0, size=n)
        legs[ts == 0.0] = 0.0
        return np.stack([legs, ts], axis=1)

    def encode(self, points: Sequence) -> np.ndarray:
        out = np.empty((len(points), 2), dtype=np.float64)
        for i, p in enumerate(points):
            self.check_point(p)
            out[i, 0] = float(TRIODE_LEGS.index(p.leg))
            out[i, 1] = p.t
        return out

    def decode(self, arr: np.ndarray) -> list:
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, 2)
        return [TriodePoint(TRIODE_LEGS[int(row[0])], float(row[1])) for row in arr]

    def distance_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
        b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
        t1, t2 = a[:, 1], b[:, 1]
        same_leg = a[:, 0] == b[:, 0]
        cross = np.sqrt(t1 * t1 + t2 * t2 + t1 * t2)
        return np.where(same_leg, np.abs(t1 - t2), cross)

    def encoded_diameter(self, enc: np.ndarray) -> float:
        arr = np.asarray(enc, dtype=np.float64).reshape(-1, 2)
        best = 0.0
        maxs = {}
        for c in range(3):
            ts = arr[arr[:, 0] == c, 1]
            if ts.size:
                maxs[c] = float(ts.max())
                best = max(best, maxs[c] - float(ts.min()))
        # cross-leg distance grows in both parameters, so only leg maxima matter
        codes = sorted(maxs)
        for i, c1 in enumerate(codes):
            for c2 in codes[i + 1 :]:
                s, t = maxs[c1], maxs[c2]
                best = max(best, math.sqrt(s * s + t * t + s * t))
        return best

    def to_jsonable(self) -> dict:
        return {"space": "triode"}

    def point_to_jsonable(self, p):
        return {"triode": [p.leg, float(p.t)]}

    def point_from_jsonable(self, obj):
        leg, t = obj["triode"]
        return TriodePoint(str(leg), float(t))


# ---------------------------------------------------------------------------
# product


@dataclass(frozen=True)
class ProductSpace(Space):
    """Finite product of spaces under the sum or averaged-sum metric.

    ``mode="sum"`` is the taxicab combination of factor distances;
    ``mode="averaged"`` divides the sum by the number of factors, which
    keeps input-side closeness thresholds on the scale of one factor.
    """

    factors: tuple
    mode: str = "sum"
    kind = "product"

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("product needs at least one factor")
        if self.mode not in ("sum", "averaged"):
            raise ValueError(f"unknown product mode {self.mode!r}")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def width(self) -> int:  # type: ignore[override]
        return sum(f.width for f in self.factors)

    def _scale(self, total):
        return total / len(self.factors) if self.mode == "averaged" else total

    def check_point(self, p) -> None:
        if not isinstance(p, tuple) or len(p) != len(self.factors):
            raise SpaceMismatchError(
                f"product point must be a tuple of {len(self.factors)} parts, got {p!r}"
            )
        for f, part in zip(self.factors, p):
            f.check_point(part)

    def distance(self, p, q) -> float:
        self.check_point(p)
        self.check_point(q)
        total = sum(f.distance(a, b) for f, a, b in zip(self.factors, p, q))
        return self._scale(total)

    @property
    def full_diameter(self) -> float:
        return self._scale(sum(f.full_diameter for f in self.factors))

    def grid(self, n: int) -> Grid:
        grids = [f.grid(n) for f in self.factors]
        total = 1
        for g in grids:
            total *= len(g)
        if total > MAX_GRID_POINTS:
            raise ValueError(
                f"product grid would hold {total} points; "
                f"cap is {MAX_GRID_POINTS}, sample instead"
            )
        pts = tuple(itertools.product(*(g.points for g in grids)))
        mesh = self._scale(sum(g.mesh for g in grids))
        return Grid(self, pts, mesh=mesh)

    def sample_array(self, rng: np.random.Generator, n: int) -> np.ndarray:
        cols = []
        for f in self.factors:
            part = f.sample_array(rng, n)
            cols.append(part.reshape(n, f.width))
        return np.concatenate(cols, axis=1)

    def encode(self, points: Sequence) -> np.ndarray:
        n = len(points)
        out = np.empty((n, self.width), dtype=np.float64)
        col = 0
        for fi, f in enumerate(self.factors):
            part = f.encode([p[fi] for p in points]).reshape(n, f.width)
            out[:, col : col + f.width] = part
            col += f.width
        return out

    def decode(self, arr: np.ndarray) -> list:
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, self.width)
        cols = []
        col = 0
        for f in self.factors:
            cols.append(f.decode(arr[:, col : col + f.width]))
            col += f.width
        return [tuple(parts) for parts in zip(*cols)]

    def distance_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64).reshape(-1, self.width)
        b = np.asarray(b, dtype=np.float64).reshape(-1, self.width)
        total = np.zeros(a.shape[0], dtype=np.float64)
        col = 0
        for f in self.factors:
            total += f.distance_array(
                a[:, col : col + f.width].reshape(-1) if f.width == 1 else a[:, col : col + f.width],
                b[:, col : col + f.width].reshape(-1) if f.width == 1 else b[:, col : col + f.width],
            )
            col += f.width
        return self._scale(total)

    def geodesic_point(self, p, q, t: float):
        self.check_point(p)
        self.check_point(q)
        return tuple(
            f.geodesic_point(a, b, t) for f, a, b in zip(self.factors, p, q)
        )

    def to_jsonable(self) -> dict:
        return {
            "space": "product",
            "mode": self.mode,
            "factors": [f.to_jsonable() for f in self.factors],
        }

    def point_to_jsonable(self, p):
        return {
            "product": [f.point_to_jsonable(part) for f, part in zip(self.factors, p)]
        }

    def point_from_jsonable(self, obj):
        return tuple(
            f.point_from_jsonable(part) for f, part in zip(self.factors, obj["product"])
        )


# ---------------------------------------------------------------------------
# module-level operations


def distance(space: Space, p, q) -> float:
    """Distance between two points of ``space``."""
    return space.distance(p, q)


def diameter(space: Space, points: Sequence) -> float:
    """Exact diameter of a finite point set: the max pairwise distance."""
    return space.set_diameter(points)


def grid(space: Space, n: int) -> Grid:
    """Evenly spaced deterministic sample of ``space``; see ``Grid``."""
    return space.grid(n)


def geodesic_point(space: Space, p, q, t: float):
    """Point a fraction ``t`` of the way from ``p`` to ``q`` along the
    shorter geodesic. Endpoints are reproduced exactly."""
    return space.geodesic_point(p, q, t)


def space_from_jsonable(obj: dict) -> Space:
    """Rebuild a space from its JSON description."""
    kind = obj.get("space")
    if kind == "circle":
        return CircleSpace(L=float(obj.get("L", 2.0)))
    if kind == "interval":
        return IntervalSpace()
    if kind == "window":
        return RealWindow(lo=float(obj["lo"]), hi=float(obj["hi"]))
    if kind == "triode":
        return TriodeSpace()
    if kind == "product":
        return ProductSpace(
            factors=tuple(space_from_jsonable(f) for f in obj["factors"]),
            mode=obj.get("mode", "sum"),
        )
    raise ValueError(f"unknown space kind {kind!r}")
