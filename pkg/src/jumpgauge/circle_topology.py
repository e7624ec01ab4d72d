"""Arcs, winding numbers, and loop families on the circle.

The degree obstruction that powers the circle lower bounds is made
computable here: a finite subset of small diameter lies on a short arc
(so maps into it can be treated like real-valued maps), discretely
sampled loops get an exact integer winding number whenever every step
has an unambiguous shorter arc, and a family of loops meant to realize
a continuous deformation is checked step-by-step — either every member
winds the same way, or the check reports exactly where the family
breaks the smallness preconditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .equations import Algebra
from .metric_core import CircleSpace

__all__ = [
    "Arc",
    "Loop",
    "WindingError",
    "CellFitError",
    "FamilyPreconditionError",
    "WindingMismatchError",
    "FamilyReport",
    "arc_cover",
    "winding_number",
    "interpolate_unary",
    "InterpolatedMap",
    "winding_family_check",
    "loops_from_binary_op",
]

MEMBER_TOL = 1e-12
LIFT_TOL = 1e-9


class WindingError(ValueError):
    """A loop step has no unique shorter arc, or the lift fails to close."""


class CellFitError(ValueError):
    """A cell's endpoint values do not fit inside its arc constraint."""


class FamilyPreconditionError(ValueError):
    """A loop family violates the smallness preconditions."""


class WindingMismatchError(ValueError):
    """A loop family has members with different winding numbers."""


@dataclass(frozen=True)
class Arc:
    """Closed arc of length at most half the circumference, running
    counterclockwise from start."""

    space: CircleSpace
    start: float
    length: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.length <= self.space.L / 2.0 + MEMBER_TOL:
            raise ValueError("arc length must lie in [0, L/2]")

    @property
    def end(self) -> float:
        return (self.start + self.length) % self.space.L

    def contains(self, x: float, tol: float = MEMBER_TOL) -> bool:
        d1 = self.space.distance(self.start, x)
        d2 = self.space.distance(x, self.end)
        return d1 + d2 <= self.length + tol

    def offset_of(self, x: float) -> float:
        """Counterclockwise offset of a member point from start."""
        return (x - self.start) % self.space.L


@dataclass(frozen=True)
class Loop:
    """Cyclically indexed samples of a circle map."""

    space: CircleSpace
    samples: tuple

    def __post_init__(self) -> None:
        if len(self.samples) < 1:
            raise ValueError("loop needs at least one sample")
        object.__setattr__(
            self, "samples", tuple(float(s) % self.space.L for s in self.samples)
        )

    @property
    def max_step(self) -> float:
        arr = np.asarray(self.samples)
        nxt = np.roll(arr, -1)
        return float(self.space.distance_array(arr, nxt).max())

    def to_jsonable(self) -> dict:
        return {
            "space": self.space.to_jsonable(),
            "samples": [float(s) for s in self.samples],
            "max_step": self.max_step,
        }


def arc_cover(pts: Sequence[float], space: CircleSpace | None = None) -> Arc | None:
    """Shortest closed arc containing a finite set, when one exists.

    A finite set of diameter below one third of the circumference
    always lies on an arc whose length equals the set's diameter, with
    the diameter-realizing pair at the arc's endpoints; at or above the
    threshold no covering arc is guaranteed and none is returned. The
    equally spaced triple shows the threshold is sharp.
    """
    space = space or CircleSpace(2.0)
    pts = [float(p) % space.L for p in pts]
    if not pts:
        raise ValueError("point set must be nonempty")
    arr = np.asarray(pts)
    n = len(pts)
    if n == 1:
        return Arc(space, pts[0], 0.0)
    diam = 0.0
    pi = qi = 0
    for i in range(n):
        d = space.distance_array(np.full(n - i - 1, arr[i]), arr[i + 1 :])
        if d.size and d.max() > diam:
            j = int(np.argmax(d))
            diam = float(d.max())
            pi, qi = i, i + 1 + j
    if diam >= space.L / 3.0:
        return None
    p, q = arr[pi], arr[qi]
    # orient so the arc runs counterclockwise from p through every point
    if (q - p) % space.L <= space.L / 2.0:
        start = p
    else:
        start = q
    return Arc(space, float(start), diam)


def winding_number(loop: Loop) -> int:
    """Exact degree of a sampled loop via signed shorter-arc steps.

    Each consecutive step is lifted to its shorter arc; a step of
    exactly half the circumference has no unique lift and is an error.
    The signed steps telescope to an integer multiple of the
    circumference, recovered exactly up to 1e-9.
    """
    L = loop.space.L
    arr = np.asarray(loop.samples)
    nxt = np.roll(arr, -1)
    raw = np.mod(nxt - arr, L)
    ambiguous = np.abs(raw - L / 2.0) <= MEMBER_TOL
    if np.any(ambiguous):
        i = int(np.argmax(ambiguous))
        raise WindingError(
            f"step {i} -> {(i + 1) % len(arr)} spans exactly half the "
            f"circumference ({arr[i]!r} to {nxt[i]!r}); lift is ambiguous"
        )
    signed = np.where(raw < L / 2.0, raw, raw - L)
    total = float(signed.sum())
    turns = total / L
    nearest = round(turns)
    if abs(turns - nearest) > LIFT_TOL:
        raise WindingError(f"lift does not close: {turns!r} turns")
    return int(nearest)


class InterpolatedMap:
    """Piecewise-geodesic circle map built from node values and per-cell
    arc constraints; each cell maps into its declared arc."""

    def __init__(self, space, nodes, values, arcs, cyclic):
        self.space = space
        self.nodes = nodes
        self.values = values
        self.arcs = arcs
        self.cyclic = cyclic

    def __call__(self, x):
        arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.empty_like(arr)
        L = self.space.L
        nodes = self.nodes
        k = len(nodes)
        for i, xi in enumerate(arr):
            xi = xi % L
            j = int(np.searchsorted(nodes, xi, side="right") - 1)
            if j < 0:
                j = k - 1 if self.cyclic else 0
            if j >= k - 1 and not self.cyclic:
                out[i] = self.values[k - 1]
                continue
            jn = (j + 1) % k
            t0 = nodes[j]
            span = (nodes[jn] - t0) % L if self.cyclic else nodes[jn] - t0
            if span == 0.0:
                out[i] = self.values[j]
                continue
            s = ((xi - t0) % L) / span
            if s <= 0.0:
                out[i] = self.values[j]
                continue
            if s >= 1.0:
                out[i] = self.values[jn]
                continue
            arc = self.arcs[j]
            o0 = arc.offset_of(self.values[j])
            o1 = arc.offset_of(self.values[jn])
            out[i] = (arc.start + o0 + s * (o1 - o0)) % L
        return out if np.ndim(x) else float(out[0])


def interpolate_unary(
    values: Sequence[tuple], arcs: Sequence[Arc], space: CircleSpace | None = None
) -> InterpolatedMap:
    """Interpolate node values into a map whose cells stay in their arcs.

    `values` pairs each grid node with its value; `arcs` constrains each
    cell between consecutive nodes (one arc per cell: equal counts make
    the map cyclic, one fewer leaves it an open path). Both endpoint
    values of every cell must already lie in that cell's arc.
    """
    space = space or CircleSpace(2.0)
    if len(values) < 2:
        raise ValueError("need at least two nodes")
    nodes = [float(t) % space.L for t, _ in values]
    vals = [float(v) % space.L for _, v in values]
    order = np.argsort(nodes)
    nodes = [nodes[i] for i in order]
    vals = [vals[i] for i in order]
    if len(set(nodes)) != len(nodes):
        raise ValueError("grid nodes must be distinct")
    if len(arcs) == len(values):
        cyclic = True
    elif len(arcs) == len(values) - 1:
        cyclic = False
    else:
        raise ValueError("need one arc per cell")
    n_cells = len(arcs)
    for j in range(n_cells):
        jn = (j + 1) % len(values)
        for which, v in (("left", vals[j]), ("right", vals[jn])):
            if not arcs[j].contains(v):
                raise CellFitError(
                    f"cell {j} (nodes {nodes[j]!r} to {nodes[jn]!r}): "
                    f"{which} value {v!r} lies outside the cell arc"
                )
    return InterpolatedMap(space, nodes, vals, list(arcs), cyclic)


@dataclass
class FamilyReport:
    """Outcome of a loop-family deformation check."""

    passed: bool
    windings: list
    violations: list
    first_disagreement: int | None
    bound: float

    def require_pass(self) -> None:
        if self.violations:
            raise FamilyPreconditionError(str(self.violations[0]))
        if self.first_disagreement is not None:
            i = self.first_disagreement
            raise WindingMismatchError(
                f"loops {i - 1} and {i} wind {self.windings[i - 1]} vs "
                f"{self.windings[i]}"
            )

    def to_jsonable(self) -> dict:
        return {
            "passed": self.passed,
            "windings": self.windings,
            "violations": self.violations,
            "first_disagreement": self.first_disagreement,
            "bound": self.bound,
        }


def winding_family_check(fam: Sequence[Loop], bound: float) -> FamilyReport:
    """Check that a family of loops deforms continuously and winds
    consistently: every loop's steps and every pointwise move between
    consecutive loops must stay below one third of the circumference,
    and then all winding numbers must agree. Violations are reported
    with witnesses rather than raised, so a family exhibiting an
    obstruction can be inspected; require_pass() escalates them."""
    if not fam:
        raise ValueError("family must be nonempty")
    L = fam[0].space.L
    if not 0.0 < bound < L / 3.0:
        raise ValueError("bound must lie in (0, L/3)")
    violations = []
    for i, loop in enumerate(fam):
        if loop.space.L != L:
            raise ValueError("family loops must share one circle")
        ms = loop.max_step
        if ms >= L / 3.0:
            violations.append(
                {"kind": "max-step", "loop": i, "value": ms, "limit": L / 3.0}
            )
    n = len(fam[0].samples)
    for i in range(1, len(fam)):
        if len(fam[i].samples) != n:
            raise ValueError("family loops must share sample count")
        a = np.asarray(fam[i - 1].samples)
        b = np.asarray(fam[i].samples)
        moves = fam[i].space.distance_array(a, b)
        worst = int(np.argmax(moves))
        if moves[worst] >= bound:
            violations.append(
                {
                    "kind": "pointwise-bound",
                    "loops": [i - 1, i],
                    "sample": worst,
                    "value": float(moves[worst]),
                    "limit": bound,
                }
            )
    windings = []
    for loop in fam:
        try:
            windings.append(winding_number(loop))
        except WindingError:
            windings.append(None)
    first = None
    for i in range(1, len(windings)):
        if windings[i] != windings[i - 1]:
            first = i
            break
    passed = not violations and first is None and None not in windings
    return FamilyReport(
        passed=passed,
        windings=windings,
        violations=violations,
        first_disagreement=first,
        bound=bound,
    )


def loops_from_binary_op(
    alg: Algebra, op_name: str, w_values: Sequence[float], n_samples: int
) -> list:
    """Sample the slices z -> op(w, z) of a binary circle operation as a
    loop family along a path of first arguments."""
    space = alg.space
    if not isinstance(space, CircleSpace):
        raise TypeError("loop families need a circle carrier")
    z = space.grid(n_samples).encoded()
    batch = alg.ops[op_name].batch
    loops = []
    for w in w_values:
        out = batch(np.full_like(z, float(w) % space.L), z)
        loops.append(Loop(space, tuple(np.asarray(out))))
    return loops
