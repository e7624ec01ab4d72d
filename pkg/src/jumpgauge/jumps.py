"""Numerical jump estimators.

The jump of an operation at a base point is the infimum over radii of
the diameter of the image of the metric ball at that base; the jump of
the operation is the supremum over bases. These are estimated on
finite ladders: descending radii bracket the infimum, and the base
supremum runs over a pool combining a coarse vectorized screen of many
bases (grid samples, seam tuples, anchor products, diagonals) with a
dense-ball refinement of the highest-scoring ones. Discontinuity loci
can be measure-zero, so construction-declared seams are always merged
into the pool and always refined.

Modulus-of-continuity profiles drive the chained estimators: a profile
maps each input closeness to the sampled worst-case output closeness
of the algebra's operations, and iterating it along a chain bounds the
depth-n term jump from above.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .equations import Algebra, Term, enumerate_terms, eval_term_batch, term_vars
from .metric_core import (
    CircleSpace,
    IntervalSpace,
    RealWindow,
    Space,
    TriodeSpace,
)

__all__ = [
    "JumpEstimate",
    "ConstraintProfile",
    "MuBoundReport",
    "default_radii",
    "jump_at",
    "jump_sup",
    "uniform_jump",
    "omega_profile",
    "monotonize_deltas",
    "chi_n",
    "chi_n_star",
    "mu_bound_report",
]

DEFAULT_BUDGET = 20_000
MAX_SCREEN_ROWS = 3_000_000
MAX_DENSE_ENVS = 200_000
SCREEN_FRACTIONS = (-0.9, 0.0, 0.9)
CHAIN_SLACK = 1e-9


# ---------------------------------------------------------------------------
# result types


@dataclass
class JumpEstimate:
    """A ladder of sampled diameters and the headline value."""

    value: float
    ladder: tuple
    argmax_point: tuple | None
    grid_n: int
    seed: int
    note: str = ""

    def to_jsonable(self, space: Space | None = None) -> dict:
        pt = None
        if self.argmax_point is not None:
            if space is not None:
                pt = [space.point_to_jsonable(p) for p in self.argmax_point]
            else:
                pt = [repr(p) for p in self.argmax_point]
        return {
            "value": self.value,
            "ladder": [[float(a), float(b)] for a, b in self.ladder],
            "argmax_point": pt,
            "grid_n": self.grid_n,
            "seed": self.seed,
            "note": self.note,
        }

    def ladder_csv(self) -> str:
        lines = ["radius,diameter"]
        lines += [f"{float(a)!r},{float(b)!r}" for a, b in self.ladder]
        return "\n".join(lines) + "\n"


@dataclass
class ConstraintProfile:
    """Sampled modulus of continuity: delta -> worst output closeness."""

    deltas: tuple
    omega_table: dict

    def omega(self, delta: float) -> float:
        xs = np.asarray(self.deltas, dtype=np.float64)
        ys = np.asarray([self.omega_table[d] for d in self.deltas])
        return float(np.interp(delta, xs, ys))

    def is_constrained(self, delta: float, eps: float) -> bool:
        table = self.omega_table.get(delta)
        value = self.omega(delta) if table is None else table
        return value < eps

    def to_jsonable(self) -> dict:
        return {
            "deltas": [float(d) for d in self.deltas],
            "omega": {repr(float(d)): float(self.omega_table[d]) for d in self.deltas},
        }


@dataclass(frozen=True)
class MuBoundReport:
    """Upper bound on the least achievable jump for a theory on a space,
    witnessed by a concrete construction; exact infima over all algebras
    are out of reach, so lower bounds are recorded as claims only."""

    theory: str
    space: str
    upper_bound: float
    claimed_value: float | None
    note: str

    def __post_init__(self) -> None:
        if self.upper_bound < 0:
            raise ValueError("upper bound must be nonnegative")

    def to_jsonable(self) -> dict:
        return {
            "theory": self.theory,
            "space": self.space,
            "upper_bound": self.upper_bound,
            "claimed_value": self.claimed_value,
            "note": self.note,
        }


# ---------------------------------------------------------------------------
# geometry helpers


def default_radii(space: Space) -> tuple:
    d = space.full_diameter
    return tuple(d * f for f in (0.1, 0.03, 0.01, 0.003, 0.001))


def _canonicalize(space: Space, vals: np.ndarray) -> np.ndarray:
    if isinstance(space, CircleSpace):
        return np.mod(vals, space.L)
    if isinstance(space, (IntervalSpace, RealWindow)):
        return np.clip(vals, space.lo, space.hi)
    raise TypeError(f"no scalar form for {type(space).__name__}")


def _axis_variants(space: Space, cols: np.ndarray, radius: float, fracs) -> np.ndarray:
    """All screened perturbations of one argument column.

    Width-1 carriers get one variant per fraction; the triode branches
    a negative same-leg move onto both other legs so that balls around
    the center see all three legs.
    """
    fr = np.asarray(fracs, dtype=np.float64)
    if isinstance(space, TriodeSpace):
        legs = cols[:, 0]
        ts = cols[:, 1]
        chunks = []
        for f in fr:
            tp = ts + f * radius
            neg = tp < 0.0
            same_t = np.clip(tp, 0.0, 1.0)
            chunks.append(np.stack([legs, same_t], axis=1))
            flip_t = np.where(neg, np.clip(-tp, 0.0, 1.0), same_t)
            for shift in (1.0, 2.0):
                flip_leg = np.where(neg, np.mod(legs + shift, 3.0), legs)
                chunks.append(np.stack([flip_leg, flip_t], axis=1))
        return np.stack(chunks, axis=1)  # (n, 3*len(fr), 2)
    out = cols[:, None] + fr[None, :] * radius
    return _canonicalize(space, out)  # (n, len(fr))


def _dense_ball(
    space: Space, center, radius: float, k: int, rng, limit: float = 0.9
) -> np.ndarray:
    """Encoded sample of the metric ball around one point."""
    fr = np.linspace(-limit, limit, k)
    if isinstance(space, TriodeSpace):
        leg, t = float(center[0]), float(center[1])
        rows = []
        for f in fr:
            tp = t + f * radius
            if tp >= 0.0:
                rows.append((leg, min(tp, 1.0)))
            else:
                tq = min(-tp, 1.0)
                rows.append(((leg + 1.0) % 3.0, tq))
                rows.append(((leg + 2.0) % 3.0, tq))
        return np.unique(np.asarray(rows, dtype=np.float64), axis=0)
    vals = _canonicalize(space, float(center) + fr * radius)
    return np.unique(vals)


def _rows_diameter(space: Space, rows: np.ndarray) -> np.ndarray:
    kern = _kernels.kernels()
    if isinstance(space, CircleSpace):
        return kern.rows_diameter_circle(rows, space.L)
    if isinstance(space, (IntervalSpace, RealWindow)):
        return kern.rows_diameter_interval(rows)
    if isinstance(space, TriodeSpace):
        return kern.rows_diameter_triode(rows[..., 0], rows[..., 1])
    raise TypeError(f"no row-diameter kernel for {type(space).__name__}")


# ---------------------------------------------------------------------------
# bound operation view


@dataclass
class _OpView:
    space: Space
    batch: Callable
    arity: int
    seam_envs: tuple  # encoded rows per seam env: tuple of tuples of arrays
    name: str


def _encode_point(space: Space, p) -> np.ndarray:
    return space.encode([p])[0]


def _op_view(alg: Algebra, op_name: str, seams=None) -> _OpView:
    if op_name not in alg.ops:
        raise KeyError(f"algebra {alg.name} has no operation {op_name}")
    op = alg.ops[op_name]
    if op.symbol.arity == 0:
        raise ValueError(f"operation {op_name} is a constant; its jump is 0")
    raw = alg.seams.get(op_name, ()) if seams is None else tuple(seams)
    encoded = tuple(
        tuple(_encode_point(alg.space, p) for p in env)
        for env in raw
        if len(env) == op.symbol.arity
    )
    return _OpView(alg.space, op.batch, op.symbol.arity, encoded, op_name)


def _term_view(alg: Algebra, term: Term, n_vars: int) -> _OpView:
    def batch(*cols):
        return eval_term_batch(alg, term, list(cols))

    return _OpView(alg.space, batch, n_vars, (), str(term))


# ---------------------------------------------------------------------------
# base pools


def _pool_bases(view: _OpView, grid_enc: np.ndarray, seam_coords, budget: int, rng):
    """Base tuples for the sup scan: seams first (always refined), then
    anchor products, grid diagonals, and random grid tuples."""
    k = view.arity
    space = view.space
    parts = [[] for _ in range(k)]

    def push(rows) -> None:
        for i in range(k):
            parts[i].append(rows[i])

    n_seam = len(view.seam_envs)
    for env in view.seam_envs:
        push([np.asarray(env[i])[None, ...] for i in range(k)])

    anchors = [_encode_point(space, p) for p in seam_coords]
    if anchors:
        n_anchor = len(anchors) ** k
        stack = np.stack(anchors, axis=0)
        if n_anchor <= 4096:
            idx = np.indices((len(anchors),) * k).reshape(k, -1)
        else:
            idx = rng.integers(0, len(anchors), size=(k, 4096))
        push([stack[idx[i]] for i in range(k)])

    g = grid_enc.shape[0]
    stride = max(1, g // 1024)
    diag = grid_enc[::stride]
    push([diag for _ in range(k)])

    ridx = rng.integers(0, g, size=(k, max(0, budget)))
    push([grid_enc[ridx[i]] for i in range(k)])

    cols = [np.concatenate(parts[i], axis=0) for i in range(k)]
    return cols, n_seam


# ---------------------------------------------------------------------------
# screening and refinement


def _screen_scores(
    view: _OpView, base_cols, radius: float, rng, mode: str = "diam"
) -> np.ndarray:
    """Vectorized coarse score per base: image diameter over the screen
    ball (mode 'diam') or worst image distance from the base's own
    output over anchored pairs (mode 'omega')."""
    space = view.space
    k = view.arity
    fracs = SCREEN_FRACTIONS if mode == "diam" else np.linspace(-0.99, 0.99, 5)
    variants = [_axis_variants(space, base_cols[i], radius, fracs) for i in range(k)]
    v = variants[0].shape[1]
    combos = np.indices((v,) * k).reshape(k, -1)
    C = combos.shape[1]
    n = base_cols[0].shape[0]
    out = np.empty(n, dtype=np.float64)
    step = max(1, MAX_SCREEN_ROWS // C)
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        args = []
        for i in range(k):
            block = variants[i][lo:hi]  # (b, v[, w])
            args.append(
                block[:, combos[i], ...].reshape((hi - lo) * C, *block.shape[2:])
            )
        img = np.asarray(view.batch(*args))
        if mode == "diam":
            rows = img.reshape(hi - lo, C, *img.shape[1:])
            out[lo:hi] = _rows_diameter(space, rows)
        else:
            base_img = np.asarray(view.batch(*[c[lo:hi] for c in base_cols]))
            rep = np.repeat(base_img, C, axis=0)
            dist = space.distance_array(rep, img).reshape(hi - lo, C)
            out[lo:hi] = dist.max(axis=1)
    return out


def _dense_value(
    view: _OpView, base_rows, radius: float, k_samples: int, rng, mode: str = "diam"
) -> float:
    """Refined score at one base: full per-axis balls, capped product."""
    space = view.space
    limit = 0.9 if mode == "diam" else 0.99
    balls = [
        _dense_ball(space, base_rows[i], radius, k_samples, rng, limit)
        for i in range(view.arity)
    ]
    sizes = [b.shape[0] for b in balls]
    total = int(np.prod(sizes))
    if total <= MAX_DENSE_ENVS:
        combos = np.indices(tuple(sizes)).reshape(view.arity, -1)
    else:
        combos = np.stack(
            [rng.integers(0, s, size=MAX_DENSE_ENVS) for s in sizes], axis=0
        )
    args = [balls[i][combos[i], ...] for i in range(view.arity)]
    img = np.asarray(view.batch(*args))
    if mode == "diam":
        return float(_rows_diameter(space, img[None, ...])[0])
    base_img = np.asarray(view.batch(*[np.asarray(r)[None, ...] for r in base_rows]))
    rep = np.repeat(base_img, img.shape[0], axis=0)
    return float(space.distance_array(rep, img).max())


def _sup_at_radius(
    view: _OpView,
    base_cols,
    n_seam: int,
    radius: float,
    rng,
    refine_top: int,
    k_samples: int,
    mode: str = "diam",
):
    """Supremum estimate over the base pool at one radius."""
    scores = _screen_scores(view, base_cols, radius, rng, mode)
    order = np.argsort(-scores)
    chosen = list(range(n_seam)) + [int(i) for i in order[:refine_top]]
    seen: set = set()
    best_val = -1.0
    best_idx = -1
    for idx in chosen:
        if idx in seen:
            continue
        seen.add(idx)
        base_rows = [np.asarray(base_cols[i][idx]) for i in range(view.arity)]
        val = _dense_value(view, base_rows, radius, k_samples, rng, mode)
        if val > best_val:
            best_val, best_idx = val, idx
    return best_val, best_idx


def _decode_base(view: _OpView, base_cols, idx: int) -> tuple:
    rows = [np.asarray(base_cols[i][idx])[None, ...] for i in range(view.arity)]
    return tuple(view.space.decode(r)[0] for r in rows)


# ---------------------------------------------------------------------------
# public estimators


def _check_radii(radii) -> tuple:
    radii = tuple(float(r) for r in radii)
    if not radii:
        raise ValueError("radius ladder must be nonempty")
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    return tuple(sorted(radii, reverse=True))


def jump_at(
    alg: Algebra,
    op_name: str,
    base,
    radii=None,
    samples_per_ball: int = 17,
    seed: int = 0,
) -> JumpEstimate:
    """Jump of one operation at one base: the image diameter of the
    metric ball, tracked down a descending radius ladder; the headline
    value is the entry at the smallest radius."""
    view = _op_view(alg, op_name)
    radii = _check_radii(default_radii(alg.space) if radii is None else radii)
    if len(base) != view.arity:
        raise ValueError(f"base has {len(base)} points; arity is {view.arity}")
    rng = np.random.default_rng(seed)
    rows = [_encode_point(alg.space, p) for p in base]
    ladder = tuple(
        (r, _dense_value(view, rows, r, samples_per_ball, rng)) for r in radii
    )
    return JumpEstimate(
        value=ladder[-1][1],
        ladder=ladder,
        argmax_point=tuple(base),
        grid_n=samples_per_ball,
        seed=seed,
    )


def _resolve_grid(space: Space, grid) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        return space.grid(int(grid)).encoded()
    return grid.encoded()


def jump_sup(
    alg: Algebra,
    op_name: str,
    grid=1000,
    seams=None,
    radii=None,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    refine_top: int = 24,
    samples_per_ball: int = 17,
) -> JumpEstimate:
    """Supremum of the pointwise jump over grid bases, seams, anchor
    products, and diagonals; the top screen candidates get the full
    descending-radius treatment and the best base's ladder is kept."""
    view = _op_view(alg, op_name, seams)
    radii = _check_radii(default_radii(alg.space) if radii is None else radii)
    rng = np.random.default_rng(seed)
    grid_enc = _resolve_grid(alg.space, grid)
    base_cols, n_seam = _pool_bases(view, grid_enc, alg.seam_coords, budget, rng)
    scores = _screen_scores(view, base_cols, radii[-1], rng)
    order = np.argsort(-scores)
    chosen = list(range(n_seam)) + [int(i) for i in order[:refine_top]]
    best = None
    seen: set = set()
    for idx in chosen:
        if idx in seen:
            continue
        seen.add(idx)
        rows = [np.asarray(base_cols[i][idx]) for i in range(view.arity)]
        ladder = tuple(
            (r, _dense_value(view, rows, r, samples_per_ball, rng)) for r in radii
        )
        if best is None or ladder[-1][1] > best[0]:
            best = (ladder[-1][1], ladder, idx)
    value, ladder, idx = best
    return JumpEstimate(
        value=value,
        ladder=ladder,
        argmax_point=_decode_base(view, base_cols, idx),
        grid_n=grid_enc.shape[0],
        seed=seed,
    )


def uniform_jump(
    alg: Algebra,
    op_name: str,
    grid=1000,
    delta_ladder=None,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    refine_top: int = 8,
    samples_per_ball: int = 17,
) -> JumpEstimate:
    """Uniform jump: for each closeness level, the sup over bases of the
    ball-image diameter; the headline value is the min over levels."""
    view = _op_view(alg, op_name)
    deltas = _check_radii(
        default_radii(alg.space) if delta_ladder is None else delta_ladder
    )
    rng = np.random.default_rng(seed)
    grid_enc = _resolve_grid(alg.space, grid)
    base_cols, n_seam = _pool_bases(view, grid_enc, alg.seam_coords, budget, rng)
    ladder = []
    best_pt = None
    value = None
    for d in deltas:
        sup, idx = _sup_at_radius(
            view, base_cols, n_seam, d, rng, refine_top, samples_per_ball
        )
        ladder.append((d, sup))
        if value is None or sup < value:
            value = sup
            best_pt = _decode_base(view, base_cols, idx)
    return JumpEstimate(
        value=value,
        ladder=tuple(ladder),
        argmax_point=best_pt,
        grid_n=grid_enc.shape[0],
        seed=seed,
    )


def omega_profile(
    alg: Algebra,
    op_name: str,
    grid=600,
    delta_ladder=None,
    seed: int = 0,
    budget: int = 6000,
    refine_top: int = 6,
    samples_per_ball: int = 13,
) -> ConstraintProfile:
    """Sampled modulus of continuity: for each delta, the sup over
    anchored input pairs within delta of the output distance. The table
    is made exactly nondecreasing by a cumulative max in ascending
    order (pairs at a smaller delta are pairs at every larger one)."""
    view = _op_view(alg, op_name)
    deltas = sorted(
        _check_radii(default_radii(alg.space) if delta_ladder is None else delta_ladder)
    )
    rng = np.random.default_rng(seed)
    grid_enc = _resolve_grid(alg.space, grid)
    base_cols, n_seam = _pool_bases(view, grid_enc, alg.seam_coords, budget, rng)
    table = {}
    running = 0.0
    for d in deltas:
        sup, _ = _sup_at_radius(
            view, base_cols, n_seam, d, rng, refine_top, samples_per_ball, mode="omega"
        )
        running = max(running, sup)
        table[d] = running
    return ConstraintProfile(deltas=tuple(deltas), omega_table=table)


def monotonize_deltas(deltas: Sequence[float]) -> list:
    """Repair a closeness ladder into a nondecreasing one by suffix
    minima; the last entry is preserved and no entry increases, so any
    operation constrained along the input ladder stays constrained."""
    if len(deltas) == 0:
        raise ValueError("delta ladder must be nonempty")
    arr = np.asarray(list(deltas), dtype=np.float64)
    if np.any(arr <= 0):
        raise ValueError("deltas must be positive")
    out = np.minimum.accumulate(arr[::-1])[::-1]
    return [float(x) for x in out]


def _term_seed(seed: int, term: Term) -> int:
    h = hashlib.md5(str(term).encode("utf-8")).hexdigest()
    return (seed ^ int(h[:8], 16)) & 0x7FFFFFFF


def chi_n(
    alg: Algebra,
    n: int,
    n_vars: int = 3,
    grid=400,
    radii=None,
    seed: int = 0,
    budget: int = 1500,
    refine_top: int = 6,
    samples_per_ball: int = 9,
) -> JumpEstimate:
    """Depth-n iterated jump: max of the operation jump over every term
    operation of depth at most n. Variables and constants are
    continuous and contribute zero, so only proper applications with at
    least one variable are scanned."""
    if n > 3:
        raise ValueError("depth cap is 3")
    if n_vars > 3:
        raise ValueError("variable cap is 3")
    symbols = tuple(op.symbol for op in alg.ops.values())
    terms = enumerate_terms(symbols, max_depth=n, n_vars=n_vars)
    radii = _check_radii(default_radii(alg.space) if radii is None else radii)
    rng_pool = np.random.default_rng(seed)
    grid_enc = _resolve_grid(alg.space, grid)
    best = None
    for term in terms:
        if not term_vars(term):
            continue
        view = _term_view(alg, term, n_vars)
        rng = np.random.default_rng(_term_seed(seed, term))
        base_cols, n_seam = _pool_bases(
            view, grid_enc, alg.seam_coords, budget, rng
        )
        scores = _screen_scores(view, base_cols, radii[-1], rng)
        order = np.argsort(-scores)
        for idx in order[:refine_top]:
            rows = [np.asarray(base_cols[i][int(idx)]) for i in range(view.arity)]
            ladder = tuple(
                (r, _dense_value(view, rows, r, samples_per_ball, rng)) for r in radii
            )
            val = ladder[-1][1]
            if best is None or val > best[0]:
                best = (val, ladder, _decode_base(view, base_cols, int(idx)), str(term))
    if best is None:
        return JumpEstimate(0.0, tuple((r, 0.0) for r in radii), None, 0, seed)
    value, ladder, pt, note = best
    return JumpEstimate(
        value=value,
        ladder=ladder,
        argmax_point=pt,
        grid_n=grid_enc.shape[0],
        seed=seed,
        note=note,
    )


def chi_n_star(
    alg: Algebra,
    n: int,
    delta0_ladder=None,
    grid=400,
    seed: int = 0,
    budget: int = 4000,
    profile_nodes: int = 16,
) -> JumpEstimate:
    """Chained uniform jump: build one modulus profile per basic
    operation, then from each starting closeness run the greedy minimal
    chain (next level = worst interpolated modulus over the operations,
    plus slack) for n steps. Any valid chain dominates the greedy one,
    so the min over starts estimates the least reachable endpoint,
    which bounds the depth-n term jump on the sample."""
    if n < 1:
        raise ValueError("chain depth must be at least 1")
    space = alg.space
    diam = space.full_diameter
    if delta0_ladder is None:
        delta0_ladder = tuple(diam * f for f in (0.1, 0.03, 0.01, 0.003, 0.001))
    delta0_ladder = _check_radii(delta0_ladder)
    lo = min(delta0_ladder) * 0.5
    hi = diam * 1.05
    nodes = tuple(np.geomspace(lo, hi, profile_nodes))
    profiles = []
    for name, op in alg.ops.items():
        if op.symbol.arity == 0:
            continue
        profiles.append(
            omega_profile(
                alg, name, grid=grid, delta_ladder=nodes, seed=seed, budget=budget
            )
        )
    if not profiles:
        raise ValueError("algebra has no operations of positive arity")

    def omega_max(x: float) -> float:
        return max(p.omega(x) for p in profiles)

    ladder = []
    best = None
    for d0 in delta0_ladder:
        x = float(d0)
        for _ in range(n):
            x = max(x, omega_max(x) + CHAIN_SLACK)
        ladder.append((d0, x))
        if best is None or x < best[0]:
            best = (x, d0)
    return JumpEstimate(
        value=best[0],
        ladder=tuple(ladder),
        argmax_point=None,
        grid_n=profile_nodes,
        seed=seed,
        note=f"best start {best[1]!r}",
    )


def mu_bound_report(construction, estimate=None) -> MuBoundReport:
    """Record a construction's jump as an upper bound for the least
    achievable jump of its theory on its carrier."""
    value = estimate.value if isinstance(estimate, JumpEstimate) else estimate
    if value is None:
        value = construction.claimed_chi
    if value is None:
        raise ValueError("no upper bound available")
    return MuBoundReport(
        theory=construction.theory.name,
        space=construction.algebra.space.kind,
        upper_bound=float(value),
        claimed_value=construction.claimed_chi,
        note=construction.scale_note,
    )
