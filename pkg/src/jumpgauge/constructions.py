"""Concrete algebras with known jump behavior.

Each construction bundles an algebra, the equation system it satisfies
exactly, the claimed jump value on its native scale, seam data (input
tuples suspected of lying on discontinuity loci), and a seeded sampler
producing environments on which the residual is zero to within
1e-12. The curve-pair construction realizes a space-filling curve and
its right inverse on a finite dyadic lattice, so the projection
identities hold bit for bit on grid-aligned points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .equations import (
    Algebra,
    EvaluationError,
    Operation,
    Theory,
    catalog,
    eval_term_batch,
    z_term,
)
from .metric_core import (
    CircleSpace,
    IntervalSpace,
    RealWindow,
    TriodePoint,
    TriodeSpace,
)

__all__ = [
    "Construction",
    "PeanoPair",
    "s1_zero_one",
    "s1_idem_comm",
    "s1_majority",
    "peano_pair",
    "reals_lgroup_model",
    "interpret_lgroup_to_sigma2",
    "triode_pullback_lattice",
    "export_model",
    "CONSTRUCTIONS",
    "get_construction",
]

EXPORT_MAX_CELLS = 4_000_000


@dataclass
class Construction:
    """An algebra with its theory, claimed jump, and probe data."""

    name: str
    algebra: Algebra
    theory: Theory
    claimed_chi: float | None
    scale_note: str
    constants: dict = field(default_factory=dict)
    sampler: Callable | None = None
    radii_hint: tuple | None = None
    residual_tol: float = 1e-12

    def normalized_chi(self) -> float | None:
        """Claimed jump rescaled to a diameter-1 carrier."""
        if self.claimed_chi is None:
            return None
        return self.claimed_chi / self.algebra.space.full_diameter

    def sample_envs(self, rng: np.random.Generator, n: int) -> list:
        if self.sampler is None:
            raise ValueError(f"construction {self.name} has no sampler")
        return self.sampler(rng, n)


@dataclass(frozen=True)
class PeanoPair:
    """Scale data for the curve pair: epsilon, lattice depth, and the
    measured lattice-adjacency jump of the inverse curve."""

    epsilon: float
    depth_m: int
    h_jump: float

    def __post_init__(self) -> None:
        if not 0.0 < self.h_jump <= 1.0:
            raise ValueError("inverse-curve jump must lie in (0, 1]")


# ---------------------------------------------------------------------------
# circle constructions


def s1_zero_one() -> Construction:
    """Left-zero/left-one algebra on the circumference-2 circle.

    The unit sits at parameter 0, the zero at parameter 1 (the
    antipode), and away from the anchors the operation collapses its
    second argument to one of three equally spaced anchor points.
    """
    space = CircleSpace(2.0)
    thy = catalog("zero-one")

    def f_batch(w, z):
        return _kernels.kernels().zero_one_op(w, z)

    ops = {
        "F": Operation(thy.symbol("F"), batch=f_batch),
        "one": Operation(thy.symbol("one"), constant=np.float64(0.0)),
        "zero": Operation(thy.symbol("zero"), constant=np.float64(1.0)),
    }
    two_thirds = 2.0 / 3.0
    seam_z = (0.0, two_thirds, 2.0 * two_thirds)
    seams = {
        "F": tuple(
            (w, z)
            for w in (0.0, 1.0, 0.01, 1.99, 0.99, 1.01)
            for z in seam_z
        )
    }

    def sampler(rng, n):
        return [(z,) for z in space.sample_array(rng, n)]

    alg = Algebra(
        "s1-zero-one",
        space,
        ops,
        seams=seams,
        seam_coords=(0.0, 1.0 / 3.0, two_thirds, 1.0, 4.0 / 3.0, 5.0 / 3.0),
    )
    return Construction(
        name="s1-zero-one",
        algebra=alg,
        theory=thy,
        claimed_chi=two_thirds,
        scale_note="circumference 2, diameter 1; jump claimed at 2/3",
        constants={
            "one": 0.0,
            "zero": 1.0,
            "sector_anchors": [1.0 / 3.0, 1.0, 5.0 / 3.0],
        },
        sampler=sampler,
    )


def s1_idem_comm() -> Construction:
    """Idempotent commutative algebra on the circumference-3 circle.

    Four piecewise clauses over the nine unit cells of the torus,
    symmetrized pairwise, first match wins. Idempotence and
    commutativity hold bitwise; the sharpest jump is 1 on this scale.
    """
    space = CircleSpace(3.0)
    thy = catalog("idem-comm")

    def f_batch(s, t):
        return _kernels.kernels().idem_comm_op(s, t)

    ops = {"F": Operation(thy.symbol("F"), batch=f_batch)}
    corners = (0.0, 1.0, 2.0)
    seams = {"F": tuple((s, t) for s in corners for t in corners)}

    def sampler(rng, n):
        arr = space.sample_array(rng, 2 * n).reshape(n, 2)
        return [tuple(row) for row in arr]

    alg = Algebra("s1-idem-comm", space, ops, seams=seams, seam_coords=corners)
    return Construction(
        name="s1-idem-comm",
        algebra=alg,
        theory=thy,
        claimed_chi=1.0,
        scale_note="circumference 3, diameter 3/2; jump 1 here is 2/3 normalized",
        constants={},
        sampler=sampler,
    )


def s1_majority() -> Construction:
    """Near-majority ternary algebra on the circumference-2 circle.

    Satisfies the symmetric majority system exactly (evaluation is on
    the sorted triple), always returns one of its arguments, and when
    two arguments are within 2/3 the result lies on their shorter arc.
    """
    space = CircleSpace(2.0)
    thy = catalog("majority-symmetric")

    def f_batch(a, b, c):
        return _kernels.kernels().majority_op(a, b, c)

    ops = {"F": Operation(thy.symbol("F"), batch=f_batch)}
    two_thirds = 2.0 / 3.0
    equilateral = (0.0, two_thirds, 2.0 * two_thirds)
    seams = {
        "F": (
            equilateral,
            (0.2, 0.2 + two_thirds, 0.2 + 2.0 * two_thirds),
            (1.5, (1.5 + two_thirds) % 2.0, (1.5 + 2.0 * two_thirds) % 2.0),
            (0.0, two_thirds, 0.1),
            (0.0, two_thirds, 1.9),
        )
    }

    def sampler(rng, n):
        arr = space.sample_array(rng, 3 * n).reshape(n, 3)
        return [tuple(row) for row in arr]

    alg = Algebra("s1-majority", space, ops, seams=seams, seam_coords=equilateral)
    return Construction(
        name="s1-majority",
        algebra=alg,
        theory=thy,
        claimed_chi=two_thirds,
        scale_note="circumference 2, diameter 1; jump claimed at 2/3",
        constants={"distance_threshold": two_thirds},
        sampler=sampler,
    )


# ---------------------------------------------------------------------------
# curve pair on the interval

# snapping tolerance for recovering lattice parameters after a
# multiply/divide round trip; actual drift is below 1e-10
SNAP_TOL = 1e-6


def _curve_coords(order: int, ks: np.ndarray) -> tuple:
    kern = _kernels.kernels()
    x, y = kern.hilbert_d2xy(order, ks)
    return x, y


def _p_eval(order: int, u: np.ndarray) -> tuple:
    """Piecewise-linear plane-filling curve through the lattice walk.

    Parameters land on vertex k at u = k/4^order (dyadic, hence exact
    floats); values within SNAP_TOL of a vertex parameter are snapped
    so that lattice round-trips are exact. Beyond the last vertex the
    curve saturates.
    """
    cells = 1 << (2 * order)  # 4^order
    side = 1 << order
    r = np.asarray(u, dtype=np.float64) * cells
    rr = np.rint(r)
    r = np.where(np.abs(r - rr) <= SNAP_TOL, rr, r)
    np.clip(r, 0.0, float(cells - 1), out=r)
    k = np.floor(r).astype(np.int64)
    np.clip(k, 0, cells - 2, out=k)
    frac = r - k
    x0, y0 = _curve_coords(order, k)
    x1, y1 = _curve_coords(order, k + 1)
    cx = (x0 * (1.0 - frac) + x1 * frac) / side
    cy = (y0 * (1.0 - frac) + y1 * frac) / side
    return cx, cy


def _h_eval(order: int, a0: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """Right inverse of the curve on the lattice: nearest lattice point,
    then the curve parameter of its walk index."""
    side = 1 << order
    cells = 1 << (2 * order)
    xi = np.rint(np.asarray(a0, dtype=np.float64) * side).astype(np.int64)
    yi = np.rint(np.asarray(a1, dtype=np.float64) * side).astype(np.int64)
    np.clip(xi, 0, side - 1, out=xi)
    np.clip(yi, 0, side - 1, out=yi)
    d = _kernels.kernels().hilbert_xy2d(order, xi, yi)
    return d.astype(np.float64) / cells


def _lattice_jump(order: int) -> float:
    """Max walk-index gap between spatially adjacent lattice points,
    as a fraction of the full walk; probed exhaustively up to order 8,
    on a stride sublattice beyond."""
    probe = min(order, 8)
    stride = 1 << (order - probe)
    side_pts = 1 << probe
    coords = (np.arange(side_pts, dtype=np.int64)) * stride
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    D = _kernels.kernels().hilbert_xy2d(order, X.ravel(), Y.ravel()).reshape(
        side_pts, side_pts
    )
    gap_h = np.abs(np.diff(D, axis=0)).max() if side_pts > 1 else 0
    gap_v = np.abs(np.diff(D, axis=1)).max() if side_pts > 1 else 0
    cells = 1 << (2 * order)
    return float(max(gap_h, gap_v)) / cells


def peano_pair(epsilon: float, depth_m: int = 8) -> tuple:
    """Curve pair witnessing an arbitrarily small binary-injection jump.

    Returns (construction, pair_info). The binary operation squeezes a
    pair into the single parameter epsilon * inverse-curve value; the
    unary projections recover the pair through the curve. Projection
    identities are bit-exact on lattice-aligned inputs.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    if not 1 <= depth_m <= 16:
        raise ValueError("depth_m must lie in 1..16")
    space = IntervalSpace()
    thy = catalog("injective-binary")
    order = depth_m
    side = 1 << order

    def g_batch(a0, a1):
        return epsilon * _h_eval(order, a0, a1)

    def f0_batch(a):
        u = np.minimum(1.0, np.asarray(a, dtype=np.float64) / epsilon)
        return _p_eval(order, u)[0]

    def f1_batch(a):
        u = np.minimum(1.0, np.asarray(a, dtype=np.float64) / epsilon)
        return _p_eval(order, u)[1]

    ops = {
        "G": Operation(thy.symbol("G"), batch=g_batch),
        "F0": Operation(thy.symbol("F0"), batch=f0_batch),
        "F1": Operation(thy.symbol("F1"), batch=f1_batch),
    }

    # seam inputs: the lattice adjacency with the largest walk-index gap
    probe = min(order, 8)
    stride = 1 << (order - probe)
    side_pts = 1 << probe
    coords = np.arange(side_pts, dtype=np.int64) * stride
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    D = _kernels.kernels().hilbert_xy2d(order, X.ravel(), Y.ravel()).reshape(
        side_pts, side_pts
    )
    dh = np.abs(np.diff(D, axis=0))
    dv = np.abs(np.diff(D, axis=1))
    if dh.max() >= dv.max():
        i, j = np.unravel_index(int(np.argmax(dh)), dh.shape)
        p = (coords[i] / side, coords[j] / side)
        q = (coords[i + 1] / side, coords[j] / side)
    else:
        i, j = np.unravel_index(int(np.argmax(dv)), dv.shape)
        p = (coords[i] / side, coords[j] / side)
        q = (coords[i] / side, coords[j + 1] / side)
    # the squeeze is piecewise constant on lattice cells, so its jump
    # lives on the boundary between the two gap cells
    mid = ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)
    seams = {"G": (mid, p, q)}

    def sampler(rng, n):
        xi = rng.integers(0, side, size=n)
        yi = rng.integers(0, side, size=n)
        return [(x / side, y / side) for x, y in zip(xi, yi)]

    alg = Algebra(
        "peano-pair",
        space,
        ops,
        seams=seams,
        seam_coords=(mid[0], mid[1], p[0], p[1], q[0], q[1], 0.0, 0.5, 1.0),
    )
    h_jump = _lattice_jump(order)
    pair = PeanoPair(epsilon=epsilon, depth_m=depth_m, h_jump=h_jump)
    cons = Construction(
        name="peano-pair",
        algebra=alg,
        theory=thy,
        claimed_chi=epsilon,
        scale_note=(
            "unit interval; squeeze jump is at most epsilon "
            f"(epsilon * lattice jump {epsilon * h_jump:.6f})"
        ),
        constants={"epsilon": epsilon, "depth_m": depth_m},
        sampler=sampler,
        radii_hint=(0.1, 0.03, 0.01, 3e-3, 1e-3, 1e-4, 1e-5, 1e-6),
    )
    return cons, pair


# ---------------------------------------------------------------------------
# ordered-group model and its derived algebra


def reals_lgroup_model(window: RealWindow | None = None) -> Algebra:
    """Standard ordered-group operations (min, max, +, -, 0) on a real
    window; the window should be wide enough that evaluated terms stay
    inside for the sampled ranges."""
    space = window or RealWindow(-32.0, 32.0)
    if not space.lo <= 0.0 <= space.hi:
        raise ValueError("window must contain 0")
    lg = catalog("lambda-gamma")
    ops = {
        "meet": Operation(lg.symbol("meet"), batch=np.minimum),
        "join": Operation(lg.symbol("join"), batch=np.maximum),
        "add": Operation(lg.symbol("add"), batch=np.add),
        "sub": Operation(lg.symbol("sub"), batch=np.subtract),
        "zero": Operation(lg.symbol("zero"), constant=np.float64(0.0)),
    }
    return Algebra("reals-lgroup", space, ops, seam_coords=(0.0,))


def interpret_lgroup_to_sigma2(alg: Algebra, m_max: int = 3, k_max: int = 3) -> Algebra:
    """Derive the four-place/two-place/stack operations from an
    ordered-group algebra; every derived operation is a term operation
    of depth at most 3 over the source operations."""
    for name in ("meet", "join", "add", "sub", "zero"):
        if name not in alg.ops:
            raise EvaluationError(f"source algebra lacks operation {name}")
    thy = catalog("sigma2", m_max=m_max, k_max=k_max)
    meet = alg.ops["meet"].batch
    add = alg.ops["add"].batch
    sub = alg.ops["sub"].batch

    def g_batch(a, b, c, d):
        return meet(c, add(sub(a, b), meet(c, d)))

    ops = {
        "G": Operation(thy.symbol("G"), batch=g_batch),
        "K": Operation(thy.symbol("K"), batch=meet),
    }
    for m in range(m_max + k_max + 1):
        zt = z_term(m)

        def psi_batch(a, b, _zt=zt):
            return eval_term_batch(alg, _zt, [np.asarray(a), np.asarray(b)])

        name = f"psi{m}"
        ops[name] = Operation(thy.symbol(name), batch=psi_batch)
    return Algebra(f"{alg.name}-sigma2", alg.space, ops, seam_coords=alg.seam_coords)


# ---------------------------------------------------------------------------
# triode lattice


def triode_pullback_lattice() -> Construction:
    """Lattice operations on the triode pulled back from a chain.

    A bijection onto [0, 1] (legs to [0, 1/3], (1/3, 2/3], (2/3, 1],
    center to 1/3) transports min and max; both operations return one
    of their inputs bitwise, so every lattice identity holds exactly.
    The bijection is discontinuous where the third leg approaches the
    center, and both operations jump by a full leg length there at
    every scale.
    """
    space = TriodeSpace()
    thy = catalog("lattice")

    def split(arr):
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def meet_batch(a, b):
        l1, t1 = split(a)
        l2, t2 = split(b)
        lo, to = _kernels.kernels().triode_meet(l1, t1, l2, t2)
        return np.stack([lo, to], axis=1)

    def join_batch(a, b):
        l1, t1 = split(a)
        l2, t2 = split(b)
        lo, to = _kernels.kernels().triode_join(l1, t1, l2, t2)
        return np.stack([lo, to], axis=1)

    ops = {
        "meet": Operation(thy.symbol("meet"), batch=meet_batch),
        "join": Operation(thy.symbol("join"), batch=join_batch),
    }
    center = TriodePoint("A", 0.0)
    vb = TriodePoint("B", 1.0)
    vc = TriodePoint("C", 1.0)
    va = TriodePoint("A", 1.0)
    near_center_c = TriodePoint("C", 0.005)
    seam_pairs = (
        (center, vb),
        (vb, center),
        (near_center_c, vb),
        (vb, near_center_c),
        (center, near_center_c),
        (vc, vb),
    )
    seams = {"meet": seam_pairs, "join": seam_pairs}

    def sampler(rng, n):
        pts = space.decode(space.sample_array(rng, 3 * n))
        return [tuple(pts[3 * i : 3 * i + 3]) for i in range(n)]

    alg = Algebra(
        "triode-lattice",
        space,
        ops,
        seams=seams,
        seam_coords=(center, va, vb, vc, near_center_c, TriodePoint("B", 0.5)),
    )
    return Construction(
        name="triode-lattice",
        algebra=alg,
        theory=thy,
        claimed_chi=1.0,
        scale_note=(
            "triode with unit legs, diameter sqrt(3); the pullback seam "
            "jumps by the center-to-vertex distance 1 at every scale"
        ),
        constants={"center_order_parameter": 1.0 / 3.0},
        sampler=sampler,
    )


# ---------------------------------------------------------------------------
# lookup-table export


def _op_input_grids(cons: Construction, op_name: str, arity: int, grid_n: int) -> list:
    """Encoded per-argument input grids for a table export."""
    space = cons.algebra.space
    if cons.name == "peano-pair":
        order = int(cons.constants["depth_m"])
        side = 1 << order
        stride = max(1, side // grid_n)
        axis = np.arange(0, side, stride, dtype=np.int64)
        if axis[-1] != side - 1:
            axis = np.append(axis, side - 1)
        base = axis.astype(np.float64) / side
        if op_name == "G":
            return [base, base]
        # unary projections: domain must cover the squeeze outputs
        g = cons.algebra.ops["G"].batch
        X, Y = np.meshgrid(base, base, indexing="ij")
        vals = np.unique(g(X.ravel(), Y.ravel()))
        return [vals]
    grid = space.grid(grid_n)
    enc = grid.encoded()
    return [enc for _ in range(arity)]


def export_model(cons: Construction, grid_n: int) -> dict:
    """Render a construction as a lookup-table model document.

    Tables are row-major over the per-argument grids; values and grid
    nodes use the carrier's encoded form (floats, or [leg, t] pairs).
    """
    if grid_n < 2:
        raise ValueError("export grid needs n >= 2")
    space = cons.algebra.space
    ops_doc = {}
    for name, op in cons.algebra.ops.items():
        arity = op.symbol.arity
        if arity == 0:
            ops_doc[name] = {
                "arity": 0,
                "value": np.asarray(op.constant).tolist(),
            }
            continue
        grids = _op_input_grids(cons, name, arity, grid_n)
        total = 1
        for g in grids:
            total *= g.shape[0]
        if total > EXPORT_MAX_CELLS:
            raise ValueError(
                f"table for {name} would hold {total} cells; cap is {EXPORT_MAX_CELLS}"
            )
        mesh = np.meshgrid(*[np.arange(g.shape[0]) for g in grids], indexing="ij")
        args = []
        for g, idx in zip(grids, mesh):
            flat = idx.ravel()
            args.append(g[flat] if g.ndim == 1 else g[flat, :])
        table = op.batch(*args)
        ops_doc[name] = {
            "arity": arity,
            "grids": [g.tolist() for g in grids],
            "table": np.asarray(table).tolist(),
        }
    return {
        "format": "jumpgauge-model-v1",
        "name": cons.name,
        "space": space.to_jsonable(),
        "theory": cons.theory.name,
        "theory_params": dict(cons.theory.params),
        "ops": ops_doc,
        "meta": {
            "grid_n": grid_n,
            "scale_note": cons.scale_note,
        },
    }


# ---------------------------------------------------------------------------
# registry


def _peano_default() -> Construction:
    cons, _ = peano_pair(0.05, 8)
    return cons


CONSTRUCTIONS: dict = {
    "s1-zero-one": s1_zero_one,
    "s1-idem-comm": s1_idem_comm,
    "s1-majority": s1_majority,
    "peano-pair": _peano_default,
    "triode-lattice": triode_pullback_lattice,
}


def get_construction(name: str, **params) -> Construction:
    """Build a registered construction by CLI name."""
    if name == "peano-pair" and params:
        cons, _ = peano_pair(
            float(params.get("epsilon", 0.05)), int(params.get("depth_m", 8))
        )
        return cons
    try:
        factory = CONSTRUCTIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown construction {name!r}; known: {sorted(CONSTRUCTIONS)}"
        )
    return factory()
