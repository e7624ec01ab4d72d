"""Certificate-producing refutation drivers.

A candidate algebra arrives as a finite lookup table (a model document:
per-operation input grids and row-major value tables). Each driver
executes one impossibility argument against a claimed constraint chain
(delta_0 up to delta_N): it walks the model along the argument's path
and extracts concrete violating links — input pairs whose closeness and
output spread contradict every chain between the claimed endpoints —
or, failing that, the forced distance contradiction. The result is a
certificate naming every point and distance it used, checkable by
direct re-evaluation against the model with no trust in the driver.

Two certificate kinds exist. A constraint violation carries one or two
links: a single link with inputs closer than delta_0 and outputs at
least delta_N apart refutes every chain outright; a two-branch
certificate pairs a low link (inputs within delta_0, output spread M)
with a high link whose input gap is at most M/2, so any chain's first
level either is at most M (low link violates it) or exceeds M (the
high link's inputs are within it while its outputs reach delta_N). A
distance contradiction records points whose mutual distance the chain
forces below a bound it provably exceeds; on exact table models the
walk always finds a violating link first, so this kind is defensive.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .equations import (
    Algebra,
    Operation,
    OperationSymbol,
    Theory,
    catalog,
    residual,
)
from .metric_core import (
    IntervalSpace,
    RealWindow,
    Space,
    TriodeSpace,
    space_from_jsonable,
)

__all__ = [
    "ModelFormatError",
    "ModelGateError",
    "ClaimScopeError",
    "GridTooCoarseError",
    "TrivialTheoryError",
    "OffGridError",
    "CertificateError",
    "RefutationNotFound",
    "IvtWitness",
    "StepViolation",
    "FixedPointResult",
    "approx_ivt_witness",
    "approx_fixed_point",
    "TableOp",
    "Model",
    "load_model",
    "Certificate",
    "verify_certificate",
    "refute_interval_injective",
    "refute_triode_lattice",
    "refute_group_fixed_point",
    "refute_exponent_group",
    "build_cyclic_group_model",
    "build_xor_exponent_model",
    "build_toy_injective_model",
    "DRIVERS",
]

RESIDUAL_GATE = 1e-9
VERIFY_TOL = 1e-9
GATE_ENV_CAP = 1500


class ModelFormatError(ValueError):
    """A model document is malformed; the message names the location."""


class ModelGateError(ValueError):
    """A model fails its equational residual gate."""


class ClaimScopeError(ValueError):
    """The claimed chain endpoints fall outside the argument's scope."""


class GridTooCoarseError(ValueError):
    """The model grid cannot support walk steps below delta_0."""


class TrivialTheoryError(ValueError):
    """The theory instance carries no obstruction (e.g. exponent 1)."""


class OffGridError(ValueError):
    """A lookup was attempted off a table's input grid."""


class CertificateError(ValueError):
    """A certificate failed its re-evaluation check."""


class RefutationNotFound(RuntimeError):
    """No violating link was found; diagnostics attached."""


# ---------------------------------------------------------------------------
# approximate one-dimensional lemmas


@dataclass(frozen=True)
class IvtWitness:
    """A walk point whose value lands within half the observed value
    step of the target."""

    point: float
    value: float
    eps_observed: float
    achieved: float


@dataclass(frozen=True)
class StepViolation:
    """An adjacent walk pair whose value step exceeds the claimed bound."""

    index: int
    x_left: float
    x_right: float
    f_left: float
    f_right: float
    step: float


@dataclass(frozen=True)
class FixedPointResult:
    point: object
    gap: float


def _even_walk(a: float, c: float, delta: float) -> np.ndarray:
    cells = max(2, math.ceil((c - a) / (0.9 * delta)))
    if cells % 2:
        cells += 1
    return np.linspace(a, c, cells + 1)


def approx_ivt_witness(
    f: Callable,
    a: float,
    c: float,
    s: float,
    delta: float,
    xs: np.ndarray | None = None,
    eps_bound: float | None = None,
):
    """Walk [a, c] in steps below delta and locate a point whose value
    is within half the observed maximum value step of the target s.

    If an explicit value-step bound is claimed and some step breaks it,
    the offending pair is returned as a StepViolation instead. The
    target must lie between the endpoint values.
    """
    if not a < c:
        raise ValueError("need a < c")
    if xs is None:
        xs = _even_walk(a, c, delta)
    else:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 1 or xs.shape[0] < 2:
            raise ValueError("walk needs at least two points")
    steps = np.diff(xs)
    if np.any(steps <= 0):
        raise ValueError("walk must ascend")
    if steps.max() >= delta:
        raise GridTooCoarseError(
            f"walk step {steps.max()!r} is not below delta {delta!r}"
        )
    vals = np.asarray(f(xs), dtype=np.float64)
    fsteps = np.abs(np.diff(vals))
    eps = float(fsteps.max()) if fsteps.size else 0.0
    if eps_bound is not None and eps >= eps_bound:
        i = int(np.argmax(fsteps))
        return StepViolation(
            index=i,
            x_left=float(xs[i]),
            x_right=float(xs[i + 1]),
            f_left=float(vals[i]),
            f_right=float(vals[i + 1]),
            step=float(fsteps[i]),
        )
    lo, hi = min(vals[0], vals[-1]), max(vals[0], vals[-1])
    if not lo <= s <= hi:
        raise ValueError(f"target {s!r} is not between endpoint values")
    rel = vals - s
    cross = rel[:-1] * rel[1:] <= 0.0
    i = int(np.argmax(cross))
    if not cross[i]:
        raise RefutationNotFound("no crossing found despite bracketing endpoints")
    j = i if abs(rel[i]) <= abs(rel[i + 1]) else i + 1
    return IvtWitness(
        point=float(xs[j]),
        value=float(vals[j]),
        eps_observed=eps,
        achieved=float(abs(rel[j])),
    )


def approx_fixed_point(
    f: Callable,
    delta: float = 0.01,
    n: int = 1,
    xs: np.ndarray | None = None,
    lo: float = 0.0,
    hi: float = 1.0,
) -> FixedPointResult:
    """Approximate fixed point of a self-map of [lo, hi]^n for n in
    {1, 2}: dimension one walks the displacement through zero;
    dimension two scans the grid for the least sup-metric displacement.
    The gap reported is the observed displacement at the returned point.
    """
    if n == 1:
        if xs is None:
            xs = _even_walk(lo, hi, delta)
        else:
            xs = np.asarray(xs, dtype=np.float64)
        vals = np.asarray(f(xs), dtype=np.float64)
        disp = vals - xs
        cross = disp[:-1] * disp[1:] <= 0.0
        if np.any(cross):
            i = int(np.argmax(cross))
            j = i if abs(disp[i]) <= abs(disp[i + 1]) else i + 1
        else:
            j = int(np.argmin(np.abs(disp)))
        return FixedPointResult(point=float(xs[j]), gap=float(abs(disp[j])))
    if n == 2:
        side = _even_walk(lo, hi, delta)
        X, Y = np.meshgrid(side, side, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        out = np.asarray(f(pts), dtype=np.float64)
        disp = np.abs(out - pts).max(axis=1)
        j = int(np.argmin(disp))
        return FixedPointResult(point=(float(pts[j, 0]), float(pts[j, 1])), gap=float(disp[j]))
    raise ValueError("dimension must be 1 or 2")


# ---------------------------------------------------------------------------
# lookup-table models


@dataclass
class TableOp:
    """One finite operation table: per-argument input grids and a
    row-major value table over their product."""

    name: str
    arity: int
    space: Space
    grids: list
    table: np.ndarray
    constant: np.ndarray | None = None
    _maps: list = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if self.arity == 0:
            return
        for g in self.grids:
            if g.ndim == 1:
                self._maps.append(None)
            else:
                self._maps.append({tuple(row): i for i, row in enumerate(g)})

    def _positions(self, i: int, vals: np.ndarray) -> np.ndarray:
        g = self.grids[i]
        if g.ndim == 1:
            pos = np.searchsorted(g, vals)
            pos = np.clip(pos, 0, g.shape[0] - 1)
            bad = g[pos] != vals
            if np.any(bad):
                j = int(np.argmax(bad))
                raise OffGridError(
                    f"operation {self.name}, argument {i}: value "
                    f"{float(vals[j])!r} is not on the table grid"
                )
            return pos
        m = self._maps[i]
        pos = np.empty(vals.shape[0], dtype=np.int64)
        for j, row in enumerate(vals):
            key = tuple(row)
            if key not in m:
                raise OffGridError(
                    f"operation {self.name}, argument {i}: point "
                    f"{key!r} is not on the table grid"
                )
            pos[j] = m[key]
        return pos

    def evaluate(self, *args) -> np.ndarray:
        if self.arity == 0:
            raise ValueError("constants carry a value, not a table")
        args = [np.asarray(a, dtype=np.float64) for a in args]
        n = args[0].shape[0]
        dims = tuple(g.shape[0] for g in self.grids)
        pos = [self._positions(i, args[i]) for i in range(self.arity)]
        flat = np.ravel_multi_index(tuple(pos), dims)
        return self.table[flat]


@dataclass
class Model:
    """A finite lookup-table algebra plus its declared theory."""

    name: str
    space: Space
    ops: dict
    theory_name: str
    theory_params: dict
    meta: dict

    def op(self, name: str) -> TableOp:
        if name not in self.ops:
            raise ModelFormatError(f"model {self.name} has no operation {name}")
        return self.ops[name]

    def theory(self) -> Theory:
        return catalog(self.theory_name, **self.theory_params)

    def algebra(self) -> Algebra:
        try:
            thy = self.theory()
            symbols = {s.name: s for s in thy.symbols}
        except Exception:
            symbols = {}
        ops = {}
        for name, top in self.ops.items():
            sym = symbols.get(name, OperationSymbol(name, top.arity))
            if top.arity == 0:
                ops[name] = Operation(sym, constant=top.constant)
            else:
                ops[name] = Operation(sym, batch=top.evaluate)
        return Algebra(f"model:{self.name}", self.space, ops)

    def var_grid(self) -> np.ndarray:
        """Sampling grid for equation variables: the first-argument grid
        of the operation with the largest arity."""
        best = None
        for top in self.ops.values():
            if top.arity >= 1 and (best is None or top.arity > best.arity):
                best = top
        if best is None:
            raise ModelFormatError(f"model {self.name} has no positive-arity op")
        return best.grids[0]

    def check_residual(self, gate: float = RESIDUAL_GATE) -> float:
        thy = self.theory()
        grid = self.var_grid()
        nv = thy.max_vars()
        g = grid.shape[0]
        rng = np.random.default_rng(0)
        if g**nv <= GATE_ENV_CAP:
            idx = np.indices((g,) * nv).reshape(nv, -1)
        else:
            idx = rng.integers(0, g, size=(nv, GATE_ENV_CAP))
        pts = self.space.decode(grid if grid.ndim > 1 else grid)
        envs = [tuple(pts[idx[v, e]] for v in range(nv)) for e in range(idx.shape[1])]
        value = residual(self.algebra(), thy, envs)
        if value > gate:
            raise ModelGateError(
                f"model {self.name} violates theory {thy.name}: residual "
                f"{value!r} exceeds gate {gate!r}"
            )
        return value


def _fail(path: str, msg: str):
    raise ModelFormatError(f"{path}: {msg}")


def _load_grid(space: Space, raw, path: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] < 1:
            _fail(path, "grid is empty")
        if np.any(np.diff(arr) <= 0):
            _fail(path, "scalar grids must strictly ascend")
    elif arr.ndim == 2 and arr.shape[1] == 2:
        pass
    else:
        _fail(path, f"unsupported grid shape {arr.shape}")
    return arr


def load_model(source) -> Model:
    """Parse a model document (dict, JSON text, or file path)."""
    if isinstance(source, Model):
        return source
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if "\n" not in text and not text.lstrip().startswith("{"):
            with open(text, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            doc = json.loads(text)
    for key in ("format", "name", "space", "ops"):
        if key not in doc:
            _fail(key, "missing required key")
    if doc["format"] != "jumpgauge-model-v1":
        _fail("format", f"unknown format {doc['format']!r}")
    try:
        space = space_from_jsonable(doc["space"])
    except Exception as exc:
        _fail("space", str(exc))
    ops = {}
    for name, spec in doc["ops"].items():
        path = f"ops.{name}"
        if "arity" not in spec:
            _fail(path, "missing arity")
        arity = int(spec["arity"])
        if arity == 0:
            if "value" not in spec:
                _fail(path, "constant needs a value")
            ops[name] = TableOp(
                name=name,
                arity=0,
                space=space,
                grids=[],
                table=np.empty(0),
                constant=np.asarray(spec["value"], dtype=np.float64),
            )
            continue
        if "grids" not in spec or "table" not in spec:
            _fail(path, "needs grids and table")
        grids = [
            _load_grid(space, g, f"{path}.grids[{i}]")
            for i, g in enumerate(spec["grids"])
        ]
        if len(grids) != arity:
            _fail(path, f"expected {arity} grids, got {len(grids)}")
        table = np.asarray(spec["table"], dtype=np.float64)
        total = int(np.prod([g.shape[0] for g in grids]))
        if table.shape[0] != total:
            _fail(path, f"table holds {table.shape[0]} rows; grids need {total}")
        ops[name] = TableOp(name=name, arity=arity, space=space, grids=grids, table=table)
    return Model(
        name=str(doc["name"]),
        space=space,
        ops=ops,
        theory_name=str(doc.get("theory", "")),
        theory_params=dict(doc.get("theory_params", {})),
        meta=dict(doc.get("meta", {})),
    )


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """Self-checkable record of a refutation.

    Links name concrete input pairs with their measured input closeness
    (averaged over coordinates) and output spread; every recorded value
    can be recomputed from the recorded points and the model tables.
    """

    kind: str
    driver: str
    model_name: str
    claim: dict
    case: str
    points: dict
    links: list
    distances: dict
    checks: list
    inequality: str
    context: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        # deep copy: callers may serialize, mutate, or re-ingest the
        # document without aliasing the certificate's own state
        return copy.deepcopy(
            {
                "kind": self.kind,
                "driver": self.driver,
                "model": self.model_name,
                "claim": self.claim,
                "case": self.case,
                "points": self.points,
                "links": self.links,
                "distances": self.distances,
                "checks": self.checks,
                "inequality": self.inequality,
                "context": self.context,
            }
        )

    @staticmethod
    def from_jsonable(doc: dict) -> "Certificate":
        return Certificate(
            kind=doc["kind"],
            driver=doc["driver"],
            model_name=doc["model"],
            claim=copy.deepcopy(doc["claim"]),
            case=doc["case"],
            points=copy.deepcopy(doc["points"]),
            links=copy.deepcopy(doc["links"]),
            distances=copy.deepcopy(doc["distances"]),
            checks=copy.deepcopy(doc["checks"]),
            inequality=doc["inequality"],
            context=copy.deepcopy(doc.get("context", {})),
        )


def _avg_input_distance(space: Space, env_a: list, env_b: list) -> float:
    ds = [
        space.distance(space.point_from_jsonable(a), space.point_from_jsonable(b))
        for a, b in zip(env_a, env_b)
    ]
    return float(sum(ds) / len(ds))


def _resolve(ref, cert: Certificate) -> float:
    if isinstance(ref, (int, float)):
        return float(ref)
    if isinstance(ref, dict):
        return _resolve(ref["ref"], cert) * float(ref.get("scale", 1.0))
    if ref.startswith("claim."):
        return float(cert.claim[ref.split(".", 1)[1]])
    if ref.startswith("links["):
        idx = int(ref[ref.index("[") + 1 : ref.index("]")])
        fieldname = ref.split(".", 1)[1]
        return float(cert.links[idx][fieldname])
    if ref.startswith("dist."):
        return float(cert.distances[ref.split(".", 1)[1]]["value"])
    raise CertificateError(f"unknown reference {ref!r}")


_CHECK_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b + VERIFY_TOL,
    ">=": lambda a, b: a >= b - VERIFY_TOL,
    ">": lambda a, b: a > b,
}


def verify_certificate(cert: Certificate, model: Model, tol: float = VERIFY_TOL) -> None:
    """Re-derive every recorded value from the recorded points.

    Each link's input closeness and output spread are recomputed from
    the model tables; each named distance is recomputed from its point
    pair; each structural check is re-evaluated. Any mismatch raises.
    """
    space = model.space
    for i, link in enumerate(cert.links):
        env_a = link["env_a"]
        env_b = link["env_b"]
        din = _avg_input_distance(space, env_a, env_b)
        if abs(din - link["din"]) > tol:
            raise CertificateError(
                f"link {i}: recorded input closeness {link['din']!r} but "
                f"re-evaluation gives {din!r}"
            )
        top = model.op(link["op"])
        enc_a = [
            space.encode([space.point_from_jsonable(p)]) for p in env_a
        ]
        enc_b = [
            space.encode([space.point_from_jsonable(p)]) for p in env_b
        ]
        out_a = top.evaluate(*enc_a)
        out_b = top.evaluate(*enc_b)
        dout = float(space.distance_array(out_a, out_b)[0])
        if abs(dout - link["dout"]) > tol:
            raise CertificateError(
                f"link {i}: recorded output spread {link['dout']!r} but "
                f"re-evaluation gives {dout!r}"
            )
    for name, spec in cert.distances.items():
        if "between" not in spec:
            continue
        pa, pb = spec["between"]
        a = model.space.point_from_jsonable(cert.points[pa])
        b = model.space.point_from_jsonable(cert.points[pb])
        d = space.distance(a, b)
        if abs(d - spec["value"]) > tol:
            raise CertificateError(
                f"distance {name}: recorded {spec['value']!r} but "
                f"re-evaluation gives {d!r}"
            )
    for chk in cert.checks:
        lhs = _resolve(chk["lhs"], cert)
        rhs = _resolve(chk["rhs"], cert)
        if not _CHECK_OPS[chk["op"]](lhs, rhs):
            raise CertificateError(
                f"check failed: {chk['lhs']} ({lhs!r}) {chk['op']} "
                f"{chk['rhs']} ({rhs!r})"
            )


def _jp(space: Space, encoded_row) -> object:
    """Decoded jsonable form of one encoded point."""
    arr = np.asarray(encoded_row, dtype=np.float64)[None, ...]
    return space.point_to_jsonable(space.decode(arr)[0])


def _dist1(space: Space, a, b) -> float:
    """Scalar distance between two encoded rows of any accepted shape."""
    return float(
        space.distance_array(
            np.asarray(a, dtype=np.float64)[None, ...],
            np.asarray(b, dtype=np.float64)[None, ...],
        ).ravel()[0]
    )


def _link(space: Space, op: str, env_a, env_b, out_a, out_b) -> dict:
    din = float(np.mean([_dist1(space, a, b) for a, b in zip(env_a, env_b)]))
    dout = _dist1(space, out_a, out_b)
    return {
        "op": op,
        "env_a": [_jp(space, p) for p in env_a],
        "env_b": [_jp(space, p) for p in env_b],
        "din": din,
        "dout": dout,
        "metric": "averaged",
    }


def _single_link_cert(driver, model, claim, link, points, distances, context) -> Certificate:
    checks = [
        {"lhs": "links[0].din", "op": "<", "rhs": "claim.delta0"},
        {"lhs": "links[0].dout", "op": ">=", "rhs": "claim.deltaN"},
    ]
    ineq = (
        "inputs of one operation link are closer than delta_0 while its "
        "outputs are at least delta_N apart; no chain from delta_0 to "
        "delta_N admits it"
    )
    return Certificate(
        kind="constraint-violation",
        driver=driver,
        model_name=model.name,
        claim=claim,
        case="single-link",
        points=points,
        links=[link],
        distances=distances,
        checks=checks,
        inequality=ineq,
        context=context,
    )


def _two_branch_cert(driver, model, claim, low, high, points, distances, context) -> Certificate:
    checks = [
        {"lhs": "links[0].din", "op": "<", "rhs": "claim.delta0"},
        {"lhs": "links[1].din", "op": "<=", "rhs": {"ref": "links[0].dout", "scale": 0.5}},
        {"lhs": "links[1].dout", "op": ">=", "rhs": "claim.deltaN"},
    ]
    ineq = (
        "for any chain delta_0 <= delta_1 <= ... <= delta_N: if delta_1 is "
        "at most the low link's output spread M, the low link (inputs "
        "within delta_0) violates the first level; otherwise delta_1 "
        "exceeds M >= 2x the high link's input gap, so the high link's "
        "inputs are within delta_1 while its outputs reach delta_N"
    )
    return Certificate(
        kind="constraint-violation",
        driver=driver,
        model_name=model.name,
        claim=claim,
        case="two-branch",
        points=points,
        links=[low, high],
        distances=distances,
        checks=checks,
        inequality=ineq,
        context=context,
    )


# ---------------------------------------------------------------------------
# drivers


def _require_ops(model: Model, names) -> None:
    for nm in names:
        if nm not in model.ops:
            raise ModelFormatError(f"model {model.name} lacks operation {nm}")


def _check_claim(claim) -> tuple:
    d0, dN = float(claim[0]), float(claim[1])
    if not 0 < d0 <= dN:
        raise ClaimScopeError("need 0 < delta_0 <= delta_N")
    return d0, dN


def refute_interval_injective(model: Model, claimed) -> Certificate:
    """Refute a chain claim for an injective-pairing table on [0, 1].

    Takes the two first-axis extremes, orders the four pairing corner
    values, walks the coordinate the ordering selects in grid steps,
    and links the walk's near-crossing to a projection evaluation whose
    outputs sit the full table diameter apart.
    """
    d0, dN = _check_claim(claimed)
    _require_ops(model, ("G", "F0", "F1"))
    g_op = model.op("G")
    xg, yg = g_op.grids[0], g_op.grids[1]
    diam_x = float(xg[-1] - xg[0])
    diam_y = float(yg[-1] - yg[0])
    if dN >= max(diam_x, diam_y):
        raise ClaimScopeError(
            f"delta_N {dN!r} is not below the table diameter "
            f"{max(diam_x, diam_y)!r}; claim outside theorem scope"
        )
    spacing = max(float(np.diff(xg).max()), float(np.diff(yg).max()))
    if spacing / 2.0 >= d0:
        raise GridTooCoarseError(
            f"grid spacing {spacing!r} gives walk links {spacing / 2.0!r} "
            f">= delta_0 {d0!r}"
        )
    model.check_residual()
    space = model.space
    claim = {"delta0": d0, "deltaN": dN, "n": 2}

    a0, a1 = float(xg[0]), float(xg[-1])
    b0, b1 = float(yg[0]), float(yg[-1])
    corners = {}
    for xa, xn in ((a0, "a0"), (a1, "a1")):
        for yb, yn in ((b0, "b0"), (b1, "b1")):
            corners[(xn, yn)] = float(
                g_op.evaluate(np.array([xa]), np.array([yb]))[0]
            )
    # relabel so the smallest corner value sits at (a0, b0)
    (xn, yn), _ = min(corners.items(), key=lambda kv: kv[1])
    if xn == "a1":
        a0, a1 = a1, a0
    if yn == "b1":
        b0, b1 = b1, b0
    g = lambda x, y: float(g_op.evaluate(np.array([x]), np.array([y]))[0])
    g_ab = g(a1, b0)
    g_ba = g(a0, b1)

    if g_ab <= g_ba:
        # walk the second coordinate; the first projection tears
        walk = yg if b0 <= b1 else yg[::-1]
        fvals = g_op.evaluate(np.full(walk.shape, a0), walk)
        s = g_ab
        s_env = (a1, b0)
        proj = "F0"
        ends = (a0, a1)
        walk_env = lambda y: (a0, y)
    else:
        walk = xg if a0 <= a1 else xg[::-1]
        fvals = g_op.evaluate(walk, np.full(walk.shape, b0))
        s = g_ba
        s_env = (a0, b1)
        proj = "F1"
        ends = (b0, b1)
        walk_env = lambda x: (x, b0)

    fsteps = np.abs(np.diff(fvals))
    i_max = int(np.argmax(fsteps))
    m_val = float(fsteps[i_max])
    low = _link(
        space,
        "G",
        walk_env(float(walk[i_max])),
        walk_env(float(walk[i_max + 1])),
        np.array([fvals[i_max]]),
        np.array([fvals[i_max + 1]]),
    )
    points = {
        "a0": _jp(space, np.array(a0)),
        "a1": _jp(space, np.array(a1)),
        "b0": _jp(space, np.array(b0)),
        "b1": _jp(space, np.array(b1)),
    }
    distances = {
        "table_diameter": {
            "between": ["a0", "a1"] if proj == "F0" else ["b0", "b1"],
            "value": float(abs(ends[1] - ends[0])),
        }
    }
    context = {
        "corner_values": {f"{k[0]},{k[1]}": v for k, v in corners.items()},
        "walk_axis": "second" if proj == "F0" else "first",
        "max_walk_step": m_val,
    }
    if m_val >= dN:
        return _single_link_cert(
            "interval-injective", model, claim, low, points, distances, context
        )

    rel = np.asarray(fvals) - s
    cross = rel[:-1] * rel[1:] <= 0.0
    if not np.any(cross):
        raise RefutationNotFound(
            "no crossing of the target corner value along the walk"
        )
    i = int(np.argmax(cross))
    j = i if abs(rel[i]) <= abs(rel[i + 1]) else i + 1
    u = float(fvals[j])
    v = s
    f_op = model.op(proj)
    out_u = f_op.evaluate(np.array([u]))
    out_v = f_op.evaluate(np.array([v]))
    high = _link(space, proj, (u,), (v,), out_u, out_v)
    points["e"] = _jp(space, np.array(float(walk[j])))
    points["u"] = _jp(space, np.array(u))
    points["v"] = _jp(space, np.array(v))
    context["crossing_gap"] = high["din"]
    context["target_env"] = [float(s_env[0]), float(s_env[1])]
    if high["dout"] < dN:
        raise RefutationNotFound(
            f"projection outputs spread {high['dout']!r} below delta_N; "
            "table does not realize its own diameter"
        )
    if high["din"] < d0:
        return _single_link_cert(
            "interval-injective", model, claim, high, points, distances, context
        )
    return _two_branch_cert(
        "interval-injective", model, claim, low, high, points, distances, context
    )


def refute_triode_lattice(model: Model, claimed) -> Certificate:
    """Refute a depth-3 chain claim for lattice tables on the triode.

    Walks each leg toward the center against each opposite vertex for
    both operations, recording the leg-membership and vertex-proximity
    diagnostics of the underlying argument, and certifies the first
    adjacent link whose outputs spread past delta_N while its inputs
    sit within delta_0.
    """
    d0, dN = _check_claim(claimed)
    if dN >= 0.5:
        raise ClaimScopeError(
            f"delta_N {dN!r} is not below 1/2; claim outside theorem scope"
        )
    _require_ops(model, ("meet", "join"))
    if not isinstance(model.space, TriodeSpace):
        raise ModelFormatError("triode driver needs a triode-carrier model")
    space = model.space
    meet_op = model.op("meet")
    grid = meet_op.grids[0]
    legs_col = grid[:, 0]
    ts_col = grid[:, 1]
    claim = {"delta0": d0, "deltaN": dN, "n": 3}
    model.check_residual()

    def leg_rows(code: float) -> np.ndarray:
        rows = grid[legs_col == code]
        return rows[np.argsort(rows[:, 1])]

    center = grid[ts_col == 0.0][0]
    vertices = {}
    for code in (0.0, 1.0, 2.0):
        rows = leg_rows(code)
        if rows.shape[0] == 0 or rows[-1, 1] != 1.0:
            raise ModelFormatError("model grid must include each leg up to t=1")
        vertices[code] = rows[-1]
    spacing = 0.0
    for code in (0.0, 1.0, 2.0):
        rows = leg_rows(code)
        ts = np.concatenate([[0.0], rows[:, 1]])
        spacing = max(spacing, float(np.diff(np.unique(ts)).max()))
    if spacing / 2.0 >= d0:
        raise GridTooCoarseError(
            f"leg spacing {spacing!r} gives walk links {spacing / 2.0!r} "
            f">= delta_0 {d0!r}"
        )

    diagnostics = {"leg_membership": {}, "vertex_proximity": {}}
    for code, nm in ((0.0, "A"), (1.0, "B"), (2.0, "C")):
        vx = vertices[code]
        both = {}
        for opname in ("meet", "join"):
            out = model.op(opname).evaluate(vx[None, :], center[None, :])[0]
            both[opname] = {
                "in_leg": bool(out[0] == code or out[1] == 0.0),
                "dist_to_vertex": float(
                    space.distance_array(out[None, :], vx[None, :])[0]
                ),
            }
        diagnostics["leg_membership"][nm] = {
            k: v["in_leg"] for k, v in both.items()
        }
        diagnostics["vertex_proximity"][nm] = min(
            v["dist_to_vertex"] for v in both.values()
        )

    for opname in ("join", "meet"):
        top = model.op(opname)
        for code, leg_nm in ((2.0, "C"), (0.0, "A"), (1.0, "B")):
            path = np.concatenate([center[None, :], leg_rows(code)], axis=0)
            for wcode, w_nm in ((1.0, "B"), (2.0, "C"), (0.0, "A")):
                if wcode == code:
                    continue
                w = vertices[wcode]
                for order in ("walk-first", "walk-second"):
                    wcol = np.broadcast_to(w, path.shape)
                    if order == "walk-first":
                        outs = top.evaluate(path, wcol)
                    else:
                        outs = top.evaluate(wcol, path)
                    douts = space.distance_array(outs[:-1], outs[1:])
                    dins = space.distance_array(path[:-1], path[1:]) / 2.0
                    hits = (dins < d0) & (douts >= dN)
                    if not np.any(hits):
                        continue
                    i = int(np.argmax(hits))
                    env_a = (
                        (path[i], w) if order == "walk-first" else (w, path[i])
                    )
                    env_b = (
                        (path[i + 1], w)
                        if order == "walk-first"
                        else (w, path[i + 1])
                    )
                    link = _link(
                        space, opname, env_a, env_b, outs[i], outs[i + 1]
                    )
                    points = {
                        "center": _jp(space, center),
                        "walk_left": _jp(space, path[i]),
                        "walk_right": _jp(space, path[i + 1]),
                        "opposite_vertex": _jp(space, w),
                        "out_left": _jp(space, outs[i]),
                        "out_right": _jp(space, outs[i + 1]),
                    }
                    distances = {
                        "output_spread": {
                            "between": ["out_left", "out_right"],
                            "value": link["dout"],
                        }
                    }
                    context = {
                        "walk_leg": leg_nm,
                        "opposite_vertex": w_nm,
                        "argument_order": order,
                        "diagnostics": diagnostics,
                    }
                    return _single_link_cert(
                        "triode-lattice", model, claim, link, points, distances, context
                    )
    raise RefutationNotFound(
        "no adjacent link violated the claim on any leg walk; "
        f"diagnostics: {diagnostics!r}"
    )


def _diameter_pair(space: Space, grid: np.ndarray) -> tuple:
    """Indices of a grid pair realizing the grid diameter."""
    n = grid.shape[0]
    best = (-1.0, 0, 0)
    step = max(1, (n * n) // 4_000_000 + 1)
    for i in range(0, n, 1):
        row = grid[i]
        rows = np.broadcast_to(row, grid.shape) if grid.ndim > 1 else np.full(n, row)
        d = space.distance_array(rows, grid)
        j = int(np.argmax(d))
        if d[j] > best[0]:
            best = (float(d[j]), i, j)
    return best


def refute_group_fixed_point(model: Model, claimed, n: int = 1) -> Certificate:
    """Refute a chain claim for group tables on an interval grid.

    Translation by the difference of two extreme elements admits an
    approximate fixed point (or a wrap pair); translating back sends
    two near inputs to the extremes, a full-diameter output spread.
    """
    d0, dN = _check_claim(claimed)
    if n not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    _require_ops(model, ("add", "neg", "zero"))
    add, neg = model.op("add"), model.op("neg")
    grid = add.grids[0]
    space = model.space
    diam, i0, i1 = _diameter_pair(space, grid)
    if dN >= diam:
        raise ClaimScopeError(
            f"delta_N {dN!r} is not below the table diameter {diam!r}; "
            "claim outside theorem scope"
        )
    if grid.ndim == 1:
        spacing = float(np.diff(grid).max())
    else:
        spacing = float(
            space.distance_array(grid[:-1], grid[1:]).max()
        )
    if spacing / 2.0 >= d0:
        raise GridTooCoarseError(
            f"grid spacing {spacing!r} gives walk links {spacing / 2.0!r} "
            f">= delta_0 {d0!r}"
        )
    model.check_residual()
    claim = {"delta0": d0, "deltaN": dN, "n": 2}
    a0 = grid[i0] if grid.ndim > 1 else np.array(grid[i0])
    a1 = grid[i1] if grid.ndim > 1 else np.array(grid[i1])

    shift = add.evaluate(a1[None, ...], neg.evaluate(a0[None, ...]))[0]
    f_all = add.evaluate(np.broadcast_to(shift, grid.shape), grid)
    gaps = space.distance_array(grid, f_all)
    e_idx = int(np.argmin(gaps))
    gap = float(gaps[e_idx])
    points = {
        "a0": _jp(space, a0),
        "a1": _jp(space, a1),
        "shift": _jp(space, shift),
    }
    distances = {
        "table_diameter": {"between": ["a0", "a1"], "value": diam}
    }
    context = {"fixed_point_gap": gap}
    if gap / 2.0 < d0:
        e = grid[e_idx] if grid.ndim > 1 else np.array(grid[e_idx])
        fe = f_all[e_idx] if f_all.ndim > 1 else np.array(f_all[e_idx])
        w = add.evaluate(neg.evaluate(e[None, ...]), a0[None, ...])[0]
        out_a = add.evaluate(e[None, ...], w[None, ...])
        out_b = add.evaluate(fe[None, ...], w[None, ...])
        link = _link(space, "add", (e, w), (fe, w), out_a[0], out_b[0])
        if link["dout"] >= dN:
            points["e"] = _jp(space, e)
            points["back_shift"] = _jp(space, w)
            context["path"] = "near-fixed-point"
            return _single_link_cert(
                "group-fixed-point", model, claim, link, points, distances, context
            )
    # wrap pair: adjacent inputs whose translations land far apart
    douts = space.distance_array(f_all[:-1], f_all[1:])
    dins = space.distance_array(grid[:-1], grid[1:]) / 2.0
    hits = (dins < d0) & (douts >= dN)
    if not np.any(hits):
        raise RefutationNotFound(
            f"translation has no violating adjacent pair; max spread "
            f"{float(douts.max())!r}"
        )
    i = int(np.argmax(hits))
    xi = grid[i] if grid.ndim > 1 else np.array(grid[i])
    xj = grid[i + 1] if grid.ndim > 1 else np.array(grid[i + 1])
    link = _link(
        space,
        "add",
        (shift, xi),
        (shift, xj),
        f_all[i],
        f_all[i + 1],
    )
    points["wrap_left"] = _jp(space, xi)
    points["wrap_right"] = _jp(space, xj)
    context["path"] = "wrap-pair"
    return _single_link_cert(
        "group-fixed-point", model, claim, link, points, distances, context
    )


def refute_exponent_group(model: Model, N: int | None = None, claimed=None) -> Certificate:
    """Refute a chain claim for exponent-N group tables on a window.

    Translation by a far-from-identity element cycles N elements; near
    an approximate fixed point (or across a wrap pair) two close inputs
    translate to outputs at least the identity-to-generator distance
    apart, which exceeds any claim below the window radius.
    """
    if claimed is None:
        raise ValueError("claimed chain endpoints required")
    if N is None:
        N = int(model.theory_params.get("N", 0))
    if N < 1:
        raise ModelFormatError("exponent missing from model theory")
    if N == 1:
        raise TrivialTheoryError(
            "exponent 1 forces the one-element theory; nothing to refute"
        )
    d0, dN = _check_claim(claimed)
    _require_ops(model, ("add", "neg", "zero"))
    add = model.op("add")
    grid = add.grids[0]
    space = model.space
    radius = (float(grid[-1]) - float(grid[0])) / 2.0
    if dN >= radius:
        raise ClaimScopeError(
            f"delta_N {dN!r} is not below the sampled radius {radius!r}; "
            "claim outside theorem scope"
        )
    spacing = float(np.diff(grid).max())
    if spacing / 2.0 >= d0:
        raise GridTooCoarseError(
            f"grid spacing {spacing!r} gives walk links {spacing / 2.0!r} "
            f">= delta_0 {d0!r}"
        )
    model.check_residual()
    claim = {"delta0": d0, "deltaN": dN, "n": 2}
    zero_val = model.op("zero").constant
    zrow = np.asarray(zero_val, dtype=np.float64)
    dz = space.distance_array(np.broadcast_to(zrow, grid.shape), grid)
    a_idx = int(np.argmax(dz))
    a = np.array(grid[a_idx])
    points = {"identity": _jp(space, zrow), "generator": _jp(space, a)}
    distances = {
        "generator_distance": {
            "between": ["identity", "generator"],
            "value": float(dz[a_idx]),
        }
    }
    f_all = add.evaluate(grid, np.broadcast_to(a, grid.shape))
    gaps = space.distance_array(grid, f_all)
    e_idx = int(np.argmin(gaps))
    gap = float(gaps[e_idx])
    context = {"exponent": N, "fixed_point_gap": gap}
    if gap / 2.0 < d0:
        e = np.array(grid[e_idx])
        fe = np.array(f_all[e_idx])
        w = e.copy()
        for _ in range(N - 2):
            w = add.evaluate(w[None, ...], e[None, ...])[0]
        out_a = add.evaluate(w[None, ...], e[None, ...])
        out_b = add.evaluate(w[None, ...], fe[None, ...])
        link = _link(space, "add", (w, e), (w, fe), out_a[0], out_b[0])
        if link["dout"] >= dN:
            points["e"] = _jp(space, e)
            context["path"] = "near-fixed-point"
            return _single_link_cert(
                "exponent-group", model, claim, link, points, distances, context
            )
    douts = space.distance_array(f_all[:-1], f_all[1:])
    dins = np.diff(grid) / 2.0
    hits = (dins < d0) & (douts >= dN)
    if not np.any(hits):
        raise RefutationNotFound(
            f"translation has no violating adjacent pair; max spread "
            f"{float(douts.max())!r}"
        )
    i = int(np.argmax(hits))
    link = _link(
        space,
        "add",
        (np.array(grid[i]), a),
        (np.array(grid[i + 1]), a),
        f_all[i],
        f_all[i + 1],
    )
    points["wrap_left"] = _jp(space, np.array(grid[i]))
    points["wrap_right"] = _jp(space, np.array(grid[i + 1]))
    context["path"] = "wrap-pair"
    return _single_link_cert(
        "exponent-group", model, claim, link, points, distances, context
    )


DRIVERS = {
    "interval-injective": refute_interval_injective,
    "triode-lattice": refute_triode_lattice,
    "group": refute_group_fixed_point,
    "exponent": refute_exponent_group,
}


# ---------------------------------------------------------------------------
# canonical table builders


def build_cyclic_group_model(m: int = 512, lo: float = 0.0, hi: float = 1.0) -> dict:
    """Group tables on [lo, hi]: the pullback of cyclic index addition
    through the grid enumeration; exact on the grid, nowhere continuous
    in the limit."""
    if m < 2:
        raise ValueError("need at least two grid points")
    space = IntervalSpace() if (lo, hi) == (0.0, 1.0) else RealWindow(lo, hi)
    xs = np.linspace(lo, hi, m)
    idx = np.arange(m)
    add_table = xs[(idx[:, None] + idx[None, :]) % m].ravel()
    neg_table = xs[(-idx) % m]
    return {
        "format": "jumpgauge-model-v1",
        "name": f"cyclic-group-{m}",
        "space": space.to_jsonable(),
        "theory": "group",
        "theory_params": {},
        "ops": {
            "add": {
                "arity": 2,
                "grids": [xs.tolist(), xs.tolist()],
                "table": add_table.tolist(),
            },
            "neg": {"arity": 1, "grids": [xs.tolist()], "table": neg_table.tolist()},
            "zero": {"arity": 0, "value": float(xs[0])},
        },
        "meta": {"grid_n": m},
    }


def build_xor_exponent_model(m: int = 256, lo: float = 0.0, hi: float = 1.0) -> dict:
    """Exponent-2 group tables on a window: the pullback of bitwise
    XOR through the grid enumeration; requires a power-of-two grid."""
    if m < 2 or (m & (m - 1)) != 0:
        raise ValueError("grid count must be a power of two, at least 2")
    space = RealWindow(lo, hi)
    xs = np.linspace(lo, hi, m)
    idx = np.arange(m)
    add_table = xs[idx[:, None] ^ idx[None, :]].ravel()
    return {
        "format": "jumpgauge-model-v1",
        "name": f"xor-exponent-{m}",
        "space": space.to_jsonable(),
        "theory": "group-exponent-N",
        "theory_params": {"N": 2},
        "ops": {
            "add": {
                "arity": 2,
                "grids": [xs.tolist(), xs.tolist()],
                "table": add_table.tolist(),
            },
            "neg": {"arity": 1, "grids": [xs.tolist()], "table": xs.tolist()},
            "zero": {"arity": 0, "value": float(xs[0])},
        },
        "meta": {"grid_n": m},
    }


def build_toy_injective_model() -> dict:
    """Four-point injective-pairing table on [0, 1], exact by
    construction: the pairing enumerates the 16 argument pairs."""
    xs = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
    us = [k / 15.0 for k in range(16)]
    g_table = [us[4 * i + j] for i in range(4) for j in range(4)]
    f0_table = [xs[k // 4] for k in range(16)]
    f1_table = [xs[k % 4] for k in range(16)]
    return {
        "format": "jumpgauge-model-v1",
        "name": "toy-injective-4",
        "space": IntervalSpace().to_jsonable(),
        "theory": "injective-binary",
        "theory_params": {},
        "ops": {
            "G": {"arity": 2, "grids": [xs, xs], "table": g_table},
            "F0": {"arity": 1, "grids": [us], "table": f0_table},
            "F1": {"arity": 1, "grids": [us], "table": f1_table},
        },
        "meta": {"grid_n": 4},
    }
