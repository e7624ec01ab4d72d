"""Formal terms, equation systems, and evaluation over carrier algebras.

Terms are variables and symbol applications; equations pair two terms;
a theory bundles symbols, equations, and any schema parameters used to
instantiate it. Algebras interpret each symbol as a total batch
operation over a carrier space's encoded point arrays, and residuals
measure how far an algebra is from satisfying a theory on a sample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .metric_core import Space

__all__ = [
    "OperationSymbol",
    "Term",
    "Var",
    "App",
    "Equation",
    "Theory",
    "Operation",
    "Algebra",
    "EvaluationError",
    "depth",
    "term_vars",
    "substitute",
    "is_simple",
    "eval_term",
    "eval_term_batch",
    "residual",
    "residual_report",
    "enumerate_terms",
    "z_term",
    "catalog",
    "term_to_jsonable",
    "term_from_jsonable",
    "theory_to_jsonable",
    "theory_from_jsonable",
]

ENUM_MAX_DEPTH = 3
ENUM_MAX_VARS = 3
ENUM_MAX_TERMS = 200_000


class EvaluationError(ValueError):
    """Raised for unbound variables or missing interpretations."""


@dataclass(frozen=True)
class OperationSymbol:
    name: str
    arity: int

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise ValueError("arity must be nonnegative")


class Term:
    """Base class; see Var and App."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("variable index must be nonnegative")

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class App(Term):
    symbol: OperationSymbol
    args: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"{self.symbol.name} expects {self.symbol.arity} arguments, "
                f"got {len(self.args)}"
            )
        for a in self.args:
            if not isinstance(a, Term):
                raise TypeError(f"term argument expected, got {a!r}")

    def __str__(self) -> str:
        if not self.args:
            return self.symbol.name
        return f"{self.symbol.name}({', '.join(str(a) for a in self.args)})"


def depth(t: Term) -> int:
    """Term depth: variables are 0, applications 1 + max child depth."""
    if isinstance(t, Var):
        return 0
    if not t.args:
        return 1
    return 1 + max(depth(a) for a in t.args)


def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.index}
    out: set = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def term_symbols(t: Term) -> set:
    if isinstance(t, Var):
        return set()
    out = {t.symbol}
    for a in t.args:
        out |= term_symbols(a)
    return out


def substitute(t: Term, index: int, replacement: Term) -> Term:
    """Replace every occurrence of variable ``index`` in ``t``."""
    if isinstance(t, Var):
        return replacement if t.index == index else t
    return App(t.symbol, tuple(substitute(a, index, replacement) for a in t.args))


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term
    name: str = ""

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


def is_simple(eq: Equation) -> bool:
    """True when both sides are variables or one application of a
    symbol to variables only."""

    def side_ok(t: Term) -> bool:
        if isinstance(t, Var):
            return True
        return all(isinstance(a, Var) for a in t.args)

    return side_ok(eq.lhs) and side_ok(eq.rhs)


@dataclass(frozen=True)
class Theory:
    name: str
    symbols: tuple
    equations: tuple
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "equations", tuple(self.equations))
        declared = {s.name: s for s in self.symbols}
        if len(declared) != len(self.symbols):
            raise ValueError("duplicate symbol names in theory")
        for eq in self.equations:
            for side in (eq.lhs, eq.rhs):
                for sym in term_symbols(side):
                    if declared.get(sym.name) != sym:
                        raise ValueError(
                            f"equation {eq} uses undeclared symbol {sym.name}/{sym.arity}"
                        )

    def symbol(self, name: str) -> OperationSymbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    def max_vars(self) -> int:
        top = -1
        for eq in self.equations:
            for side in (eq.lhs, eq.rhs):
                vs = term_vars(side)
                if vs:
                    top = max(top, max(vs))
        return top + 1


# ---------------------------------------------------------------------------
# algebras


@dataclass
class Operation:
    """Interpretation of one symbol as a total batch operation.

    ``batch`` maps encoded input arrays (one per argument, equal row
    counts) to an encoded output array. Constants carry their encoded
    value instead.
    """

    symbol: OperationSymbol
    batch: Callable | None = None
    constant: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.symbol.arity == 0:
            if self.constant is None:
                raise ValueError(f"constant {self.symbol.name} needs a value")
        elif self.batch is None:
            raise ValueError(f"operation {self.symbol.name} needs a batch function")


@dataclass
class Algebra:
    """A carrier space with an interpretation of each theory symbol.

    ``seams`` maps operation names to input tuples suspected of lying
    on discontinuity loci; ``seam_coords`` lists scalar parameters
    worth probing when building environments for composite terms.
    """

    name: str
    space: Space
    ops: dict
    seams: dict = field(default_factory=dict)
    seam_coords: tuple = ()

    def op(self, name: str) -> Operation:
        try:
            return self.ops[name]
        except KeyError:
            raise EvaluationError(f"algebra {self.name} does not interpret {name}")


def eval_term_batch(
    alg: Algebra, t: Term, env: Sequence[np.ndarray], n: int | None = None
) -> np.ndarray:
    """Evaluate ``t`` over encoded variable columns.

    ``env[i]`` is the encoded array for variable i. ``n`` supplies the
    row count when the term has no variables at all.
    """
    if n is None:
        if env:
            first = np.asarray(env[0])
            n = first.shape[0]
        else:
            n = 1
    if isinstance(t, Var):
        if t.index >= len(env):
            raise EvaluationError(f"unbound variable x{t.index}")
        return np.asarray(env[t.index])
    op = alg.op(t.symbol.name)
    if op.symbol.arity != t.symbol.arity:
        raise EvaluationError(
            f"arity mismatch for {t.symbol.name}: "
            f"term {t.symbol.arity}, algebra {op.symbol.arity}"
        )
    if t.symbol.arity == 0:
        base = np.asarray(op.constant)
        reps = (n,) + (1,) * (base.ndim)
        return np.tile(base[None, ...], reps) if base.ndim else np.full(n, float(base))
    args = [eval_term_batch(alg, a, env, n=n) for a in t.args]
    return op.batch(*args)


def eval_term(alg: Algebra, t: Term, env: Sequence):
    """Pointwise term evaluation; ``env`` lists carrier points."""
    space = alg.space
    cols = [space.encode([p]) for p in env]
    out = eval_term_batch(alg, t, cols, n=1)
    return space.decode(out)[0]


@dataclass(frozen=True)
class ResidualReport:
    value: float
    per_equation: dict
    argmax_equation: str
    argmax_env: tuple


def residual_report(alg: Algebra, thy: Theory, envs: Sequence) -> ResidualReport:
    """Max distance between equation sides over sample environments.

    ``envs`` is a list of point tuples covering the theory's variables.
    """
    need = thy.max_vars()
    per: dict = {}
    worst = 0.0
    worst_eq = ""
    worst_env: tuple = ()
    space = alg.space
    if not envs:
        raise ValueError("residual needs at least one environment")
    env_list = [tuple(e) for e in envs]
    for e in env_list:
        if len(e) < need:
            raise EvaluationError(
                f"environment of length {len(e)} does not cover {need} variables"
            )
    cols = []
    n = len(env_list)
    for i in range(max(need, max(len(e) for e in env_list))):
        pts = [e[i] for e in env_list]
        cols.append(space.encode(pts))
    for eq in thy.equations:
        lhs = eval_term_batch(alg, eq.lhs, cols, n=n)
        rhs = eval_term_batch(alg, eq.rhs, cols, n=n)
        d = space.distance_array(lhs, rhs)
        j = int(np.argmax(d))
        val = float(d[j])
        label = eq.name or str(eq)
        per[label] = val
        if val > worst or not worst_eq:
            worst = val
            worst_eq = label
            worst_env = env_list[j]
    return ResidualReport(worst, per, worst_eq, worst_env)


def residual(alg: Algebra, thy: Theory, envs: Sequence) -> float:
    """Max over equations and environments of d(lhs, rhs); 0 when the
    sample satisfies the theory exactly."""
    if not thy.equations:
        return 0.0
    return residual_report(alg, thy, envs).value


# ---------------------------------------------------------------------------
# term enumeration


def enumerate_terms(symbols: Sequence[OperationSymbol], max_depth: int, n_vars: int) -> list:
    """All terms over ``n_vars`` variables with depth at most
    ``max_depth``, duplicate-free, in deterministic (depth, text) order.
    """
    if max_depth > ENUM_MAX_DEPTH:
        raise ValueError(f"enumeration capped at depth {ENUM_MAX_DEPTH}, asked {max_depth}")
    if n_vars > ENUM_MAX_VARS:
        raise ValueError(f"enumeration capped at {ENUM_MAX_VARS} variables, asked {n_vars}")
    if max_depth < 0 or n_vars < 0:
        raise ValueError("enumeration bounds must be nonnegative")
    levels: list[set] = [set(Var(i) for i in range(n_vars))]
    seen: set = set(levels[0])
    for d in range(1, max_depth + 1):
        new: set = set()
        pool = list(itertools.chain.from_iterable(levels))
        for sym in symbols:
            if sym.arity == 0:
                if d == 1:
                    new.add(App(sym, ()))
                continue
            for combo in itertools.product(pool, repeat=sym.arity):
                if max((depth(a) for a in combo), default=0) != d - 1:
                    continue
                t = App(sym, combo)
                if t not in seen:
                    new.add(t)
                if len(seen) + len(new) > ENUM_MAX_TERMS:
                    raise ValueError(
                        f"enumeration exceeds {ENUM_MAX_TERMS} terms; tighten bounds"
                    )
        seen |= new
        levels.append(new)
    return sorted(seen, key=lambda t: (depth(t), str(t)))


# ---------------------------------------------------------------------------
# theory catalog

_MEET = OperationSymbol("meet", 2)
_JOIN = OperationSymbol("join", 2)
_ADD = OperationSymbol("add", 2)
_SUB = OperationSymbol("sub", 2)
_ZERO_CONST = OperationSymbol("zero", 0)


def z_term(n: int) -> Term:
    """The n-th difference-stack term over variables x0, x1.

    z_0 is the constant zero; z_{n+1} = z_n + (x0 - (x0 meet x1)).
    """
    if n < 0:
        raise ValueError("z_term index must be nonnegative")
    x, y = Var(0), Var(1)
    t: Term = App(_ZERO_CONST, ())
    step = App(_SUB, (x, App(_MEET, (x, y))))
    for _ in range(n):
        t = App(_ADD, (t, step))
    return t


def _majority_equations(F: OperationSymbol) -> list:
    x, z = Var(0), Var(1)
    return [
        Equation(App(F, (x, x, z)), x, "major-xxz"),
        Equation(App(F, (x, z, x)), x, "major-xzx"),
        Equation(App(F, (z, x, x)), x, "major-zxx"),
    ]


def catalog(name: str, **params) -> Theory:
    """Named equation systems used throughout the package.

    Schema families take ``m_max``/``k_max`` bounds (default 3);
    the exponent family takes ``N``.
    """
    if name == "zero-one":
        F = OperationSymbol("F", 2)
        one = OperationSymbol("one", 0)
        zero = OperationSymbol("zero", 0)
        x = Var(0)
        eqs = [
            Equation(App(F, (App(zero, ()), x)), App(zero, ()), "left-zero"),
            Equation(App(F, (App(one, ()), x)), x, "left-one"),
        ]
        return Theory(name, (F, one, zero), eqs)

    if name == "idem-comm":
        F = OperationSymbol("F", 2)
        x, y = Var(0), Var(1)
        eqs = [
            Equation(App(F, (x, y)), App(F, (y, x)), "commutative"),
            Equation(App(F, (x, x)), x, "idempotent"),
        ]
        return Theory(name, (F,), eqs)

    if name == "majority":
        F = OperationSymbol("F", 3)
        return Theory(name, (F,), _majority_equations(F))

    if name == "majority-symmetric":
        F = OperationSymbol("F", 3)
        x, y, z = Var(0), Var(1), Var(2)
        eqs = _majority_equations(F) + [
            Equation(App(F, (x, y, z)), App(F, (x, z, y)), "symm-swap-23"),
            Equation(App(F, (x, y, z)), App(F, (y, z, x)), "symm-cycle"),
        ]
        return Theory(name, (F,), eqs)

    if name == "injective-binary":
        G = OperationSymbol("G", 2)
        F0 = OperationSymbol("F0", 1)
        F1 = OperationSymbol("F1", 1)
        x0, x1 = Var(0), Var(1)
        eqs = [
            Equation(App(F0, (App(G, (x0, x1)),)), x0, "project-0"),
            Equation(App(F1, (App(G, (x0, x1)),)), x1, "project-1"),
        ]
        return Theory(name, (G, F0, F1), eqs)

    if name == "sigma1":
        k_max = int(params.get("k_max", 3))
        F = OperationSymbol("F", 3)
        phi = OperationSymbol("phi", 1)
        x, y = Var(0), Var(1)
        eqs = [Equation(App(F, (x, x, y)), y, "collapse")]
        for k in range(1, k_max + 1):
            iterated: Term = x
            for _ in range(k):
                iterated = App(phi, (iterated,))
            eqs.append(Equation(App(F, (iterated, x, y)), x, f"fix-k{k}"))
        return Theory(name, (F, phi), tuple(eqs), {"k_max": k_max})

    if name == "sigma2":
        m_max = int(params.get("m_max", 3))
        k_max = int(params.get("k_max", 3))
        G = OperationSymbol("G", 4)
        K = OperationSymbol("K", 2)
        psis = {m: OperationSymbol(f"psi{m}", 2) for m in range(m_max + k_max + 1)}
        x, y, u = Var(0), Var(1), Var(2)
        eqs = []
        for m in range(m_max + 1):
            for k in range(1, k_max + 1):
                lhs = App(
                    G,
                    (App(psis[m + k], (x, y)), App(psis[m], (x, y)), x, y),
                )
                eqs.append(Equation(lhs, x, f"descend-m{m}-k{k}"))
        guu = App(G, (u, u, x, y))
        eqs.append(Equation(App(K, (x, y)), guu, "collapse-left"))
        eqs.append(Equation(guu, App(K, (y, x)), "collapse-right"))
        return Theory(
            name,
            (G, K) + tuple(psis[m] for m in sorted(psis)),
            tuple(eqs),
            {"m_max": m_max, "k_max": k_max},
        )

    if name == "lambda-gamma":
        m_max = int(params.get("m_max", 3))
        k_max = int(params.get("k_max", 3))
        x, y, u = Var(0), Var(1), Var(2)
        xy = App(_MEET, (x, y))
        eqs = []
        for m in range(m_max + 1):
            for k in range(1, k_max + 1):
                inner = App(_ADD, (App(_SUB, (z_term(m + k), z_term(m))), xy))
                eqs.append(
                    Equation(x, App(_MEET, (x, inner)), f"stack-m{m}-k{k}")
                )
        mid = App(_MEET, (x, App(_ADD, (App(_SUB, (u, u)), xy))))
        eqs.append(Equation(xy, mid, "zero-shift"))
        eqs.append(Equation(xy, App(_MEET, (y, x)), "meet-comm"))
        return Theory(
            name,
            (_MEET, _JOIN, _ADD, _SUB, _ZERO_CONST),
            tuple(eqs),
            {"m_max": m_max, "k_max": k_max},
        )

    if name == "lattice":
        x, y, z = Var(0), Var(1), Var(2)
        def m(a, b):
            return App(_MEET, (a, b))
        def j(a, b):
            return App(_JOIN, (a, b))
        eqs = [
            Equation(m(x, x), x, "meet-idem"),
            Equation(j(x, x), x, "join-idem"),
            Equation(m(x, y), m(y, x), "meet-comm"),
            Equation(j(x, y), j(y, x), "join-comm"),
            Equation(m(m(x, y), z), m(x, m(y, z)), "meet-assoc"),
            Equation(j(j(x, y), z), j(x, j(y, z)), "join-assoc"),
            Equation(m(x, j(x, y)), x, "absorb-meet"),
            Equation(j(x, m(x, y)), x, "absorb-join"),
        ]
        return Theory(name, (_MEET, _JOIN), tuple(eqs))

    if name == "group":
        op = OperationSymbol("add", 2)
        inv = OperationSymbol("neg", 1)
        unit = OperationSymbol("zero", 0)
        x, y, z = Var(0), Var(1), Var(2)
        e = App(unit, ())
        eqs = [
            Equation(App(op, (App(op, (x, y)), z)), App(op, (x, App(op, (y, z)))), "assoc"),
            Equation(App(op, (e, x)), x, "left-unit"),
            Equation(App(op, (x, e)), x, "right-unit"),
            Equation(App(op, (x, App(inv, (x,)))), e, "right-inverse"),
            Equation(App(op, (App(inv, (x,)), x)), e, "left-inverse"),
        ]
        return Theory(name, (op, inv, unit), tuple(eqs))

    if name == "group-exponent-N":
        N = int(params.get("N", 2))
        if N < 1:
            raise ValueError("exponent must be at least 1")
        base = catalog("group")
        op = base.symbol("add")
        unit = base.symbol("zero")
        x = Var(0)
        power: Term = x
        for _ in range(N - 1):
            power = App(op, (power, x))
        eqs = base.equations + (Equation(power, App(unit, ()), f"exponent-{N}"),)
        return Theory(name, base.symbols, eqs, {"N": N})

    raise ValueError(f"unknown theory {name!r}")


# ---------------------------------------------------------------------------
# JSON forms


def term_to_jsonable(t: Term):
    if isinstance(t, Var):
        return ["var", t.index]
    return ["app", t.symbol.name, [term_to_jsonable(a) for a in t.args]]


def term_from_jsonable(obj, symbols: dict) -> Term:
    kind = obj[0]
    if kind == "var":
        return Var(int(obj[1]))
    if kind == "app":
        sym = symbols[obj[1]]
        return App(sym, tuple(term_from_jsonable(a, symbols) for a in obj[2]))
    raise ValueError(f"unknown term node {obj!r}")


def theory_to_jsonable(thy: Theory) -> dict:
    return {
        "name": thy.name,
        "symbols": [[s.name, s.arity] for s in thy.symbols],
        "equations": [
            {
                "name": eq.name,
                "lhs": term_to_jsonable(eq.lhs),
                "rhs": term_to_jsonable(eq.rhs),
            }
            for eq in thy.equations
        ],
        "params": dict(thy.params),
    }


def theory_from_jsonable(obj: dict) -> Theory:
    symbols = {n: OperationSymbol(n, int(a)) for n, a in obj["symbols"]}
    eqs = tuple(
        Equation(
            term_from_jsonable(e["lhs"], symbols),
            term_from_jsonable(e["rhs"], symbols),
            e.get("name", ""),
        )
        for e in obj["equations"]
    )
    return Theory(obj["name"], tuple(symbols.values()), eqs, dict(obj.get("params", {})))
