"""Command-line front end.

Subcommands reproduce the headline discontinuity values, estimate a
single jump measure with its radius ladder, run arc-cover trials,
execute refutation drivers against lookup-table models, export models,
and benchmark the compute backends. Reports are JSON with sorted keys
and are byte-identical for identical flags; wall-clock timings are
included only on request. Exit codes: 0 all checks passed, 1 a check
or run failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import _kernels
from .circle_topology import arc_cover, loops_from_binary_op, winding_family_check
from .constructions import (
    CONSTRUCTIONS,
    export_model,
    get_construction,
    interpret_lgroup_to_sigma2,
    reals_lgroup_model,
)
from .equations import catalog, residual
from .jumps import chi_n, chi_n_star, jump_sup, uniform_jump
from .metric_core import CircleSpace
from .refutation import (
    DRIVERS,
    Certificate,
    build_cyclic_group_model,
    build_toy_injective_model,
    build_xor_exponent_model,
    load_model,
    refute_exponent_group,
    verify_certificate,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
MIN_GRID = 50

PRIMARY_OPS = {
    "s1-zero-one": "F",
    "s1-idem-comm": "F",
    "s1-majority": "F",
    "peano-pair": "G",
    "triode-lattice": "join",
}

BUILDERS = {
    "cyclic-group": build_cyclic_group_model,
    "xor-exponent": build_xor_exponent_model,
    "toy-injective": build_toy_injective_model,
}

IDEM_COMM_CORNERS = [[0.0, 1.0, 0.0], [1.0, 1.0, 2.0], [0.0, 2.0, 2.0]]


class UsageError(ValueError):
    pass


def _tolerance(grid: int) -> float:
    """Desk tolerance profile on the diameter-1 scale."""
    if grid >= 2000:
        return 0.02
    if grid >= 1000:
        return 0.03
    if grid >= 500:
        return 0.05
    return 0.08


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    return obj


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _item(name, kind, claimed, estimate, tolerance, passed, note=""):
    return {
        "name": name,
        "kind": kind,
        "claimed_value": claimed,
        "estimate": estimate,
        "tolerance": tolerance,
        "pass": bool(passed),
        "note": note,
    }


# ---------------------------------------------------------------------------
# reproduce


def _residual_item(cons, n_samples: int, seed: int):
    rng = np.random.default_rng(seed)
    envs = cons.sample_envs(rng, n_samples)
    value = residual(cons.algebra, cons.theory, envs)
    return _item(
        f"{cons.name}:residual",
        "residual",
        0.0,
        float(value),
        cons.residual_tol,
        value <= cons.residual_tol,
        f"theory {cons.theory.name} on {n_samples} seeded samples",
    )


def _jump_item(cons, op: str, grid: int, seed: int, tol: float):
    est = jump_sup(cons.algebra, op, grid=grid, seed=seed)
    diam = cons.algebra.space.full_diameter
    ok = abs(est.value - cons.claimed_chi) <= tol * diam
    return est, _item(
        f"{cons.name}:jump_sup({op})",
        "jump",
        cons.claimed_chi,
        est.value,
        tol * diam,
        ok,
        f"grid {grid}, carrier diameter {diam}",
    )


def _cmd_reproduce(args) -> int:
    if args.grid < MIN_GRID:
        raise UsageError(f"grid below minimum ({MIN_GRID})")
    t0 = time.perf_counter()
    grid, seed = args.grid, args.seed
    tol = _tolerance(grid)
    items = []

    for name in ("s1-zero-one", "s1-idem-comm", "s1-majority"):
        cons = get_construction(name)
        items.append(_residual_item(cons, 10_000, seed))
        _, it = _jump_item(cons, PRIMARY_OPS[name], grid, seed, tol)
        items.append(it)

    ic = get_construction("s1-idem-comm")
    corner = [
        [
            float(
                ic.algebra.ops["F"].batch(
                    np.array([float(s)]), np.array([float(t)])
                )[0]
            )
            for t in range(3)
        ]
        for s in range(3)
    ]
    items.append(
        _item(
            "s1-idem-comm:corner-table",
            "exact-table",
            IDEM_COMM_CORNERS,
            corner,
            0.0,
            corner == IDEM_COMM_CORNERS,
            "operation values at the nine integer corners on the L=3 circle",
        )
    )

    pe = get_construction("peano-pair", epsilon=args.epsilon, depth_m=args.depth)
    items.append(_residual_item(pe, 10_000, seed))
    est = jump_sup(pe.algebra, "G", grid=grid, seed=seed)
    items.append(
        _item(
            "peano-pair:jump_sup(G)",
            "upper-bound",
            args.epsilon,
            est.value,
            0.01,
            est.value <= args.epsilon + 0.01,
            "squeeze jump must stay at or below its scale factor",
        )
    )

    lg = reals_lgroup_model()
    thy_lg = catalog("lambda-gamma", m_max=3, k_max=3)
    rng = np.random.default_rng(seed)
    envs = [tuple(rng.uniform(-8, 8, size=3)) for _ in range(1000)]
    r_lg = residual(lg, thy_lg, envs)
    items.append(
        _item(
            "reals-lgroup:residual",
            "residual",
            0.0,
            float(r_lg),
            1e-9,
            r_lg <= 1e-9,
            "lattice-ordered group equation family, m,k <= 3",
        )
    )
    der = interpret_lgroup_to_sigma2(lg)
    thy_s2 = catalog("sigma2", m_max=3, k_max=3)
    envs2 = [tuple(rng.uniform(-8, 8, size=3)) for _ in range(1000)]
    r_s2 = residual(der, thy_s2, envs2)
    items.append(
        _item(
            "derived-sigma2:residual",
            "residual",
            0.0,
            float(r_s2),
            1e-9,
            r_s2 <= 1e-9,
            "interpretation produces the two-sorted projection family",
        )
    )

    tri = get_construction("triode-lattice")
    items.append(_residual_item(tri, 3_000, seed))
    _, it = _jump_item(tri, "join", grid, seed, tol)
    items.append(it)
    star = chi_n_star(tri.algebra, 3, grid=200, seed=seed)
    items.append(
        _item(
            "triode-lattice:chi_3_star",
            "lower-bound",
            0.45,
            star.value,
            0.0,
            star.value >= 0.45,
            "chained uniform jump at depth 3, leg grid 200",
        )
    )

    rng = np.random.default_rng(seed + 1)
    sp = CircleSpace(2.0)
    failures = 0
    for _ in range(1000):
        k = int(rng.integers(1, 9))
        base = float(rng.uniform(0, 2))
        span = float(rng.uniform(0, 0.66))
        pts = [(base + float(o)) % 2.0 for o in rng.uniform(0, span, size=k)]
        arc = arc_cover(pts, sp)
        if arc is None:
            failures += 1
            continue
        diam = max(sp.distance(p, q) for p in pts for q in pts)
        if abs(arc.length - diam) > 1e-12 or not all(arc.contains(p) for p in pts):
            failures += 1
    sharp = arc_cover([0.0, 2.0 / 3.0, 4.0 / 3.0], sp)
    items.append(
        _item(
            "arc-cover:trials",
            "cover",
            0,
            failures,
            0.0,
            failures == 0 and sharp is None,
            "1000 seeded sets below diameter 2/3; equally-spaced triple has no arc",
        )
    )

    zo = get_construction("s1-zero-one")
    fam = loops_from_binary_op(zo.algebra, "F", np.linspace(1.0, 0.0, 21), 200)
    rep = winding_family_check(fam, bound=0.6)
    obstructed = (
        not rep.passed
        and rep.windings[0] == 0
        and rep.windings[-1] == 1
    )
    items.append(
        _item(
            "zero-one:winding-obstruction",
            "obstruction",
            True,
            obstructed,
            0.0,
            obstructed,
            "slice loops move from winding 0 to winding 1, so some slice "
            "must break the step bound",
        )
    )

    pe_model = load_model(export_model(pe, grid_n=256))
    cert = DRIVERS["interval-injective"](pe_model, (0.01, 0.9))
    verify_certificate(cert, pe_model)
    items.append(
        _item(
            "refute:interval-injective",
            "refuter",
            "certificate",
            f"{cert.kind}/{cert.case}",
            0.0,
            True,
            "claim (0.01, 0.9) on the exported pairing model; self-check passed",
        )
    )
    tri_model = load_model(export_model(tri, grid_n=200))
    cert = DRIVERS["triode-lattice"](tri_model, (0.005, 0.4))
    verify_certificate(cert, tri_model)
    items.append(
        _item(
            "refute:triode-lattice",
            "refuter",
            "certificate",
            f"{cert.kind}/{cert.case}",
            0.0,
            True,
            "claim (0.005, 0.4) on the exported lattice model; self-check passed",
        )
    )

    passed = all(it["pass"] for it in items)
    doc = {
        "command": "reproduce",
        "grid": grid,
        "seed": seed,
        "tolerance_profile": tol,
        "items": items,
        "passed": passed,
    }
    if args.timings:
        doc["timings"] = {"total_s": time.perf_counter() - t0}
    _emit(doc, args.out)
    return EXIT_PASS if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# chi


def _cmd_chi(args) -> int:
    if args.grid < MIN_GRID:
        raise UsageError(f"grid below minimum ({MIN_GRID})")
    if args.construction not in CONSTRUCTIONS:
        raise UsageError(
            f"unknown construction {args.construction!r}; "
            f"known: {sorted(CONSTRUCTIONS)}"
        )
    kwargs = {}
    if args.construction == "peano-pair":
        kwargs = {"epsilon": args.epsilon, "depth_m": args.depth}
    cons = get_construction(args.construction, **kwargs)
    op = args.op or PRIMARY_OPS[args.construction]
    if op not in cons.algebra.ops and args.measure != "chi-n-star":
        raise UsageError(f"construction has no operation {op!r}")
    t0 = time.perf_counter()
    if args.measure == "chi":
        est = jump_sup(cons.algebra, op, grid=args.grid, seed=args.seed)
    elif args.measure == "chi-u":
        est = uniform_jump(cons.algebra, op, grid=args.grid, seed=args.seed)
    elif args.measure == "chi-n":
        est = chi_n(cons.algebra, args.n, grid=args.grid, seed=args.seed)
    elif args.measure == "chi-n-star":
        est = chi_n_star(cons.algebra, args.n, grid=args.grid, seed=args.seed)
    else:
        raise UsageError(f"unknown measure {args.measure!r}")
    doc = {
        "command": "chi",
        "construction": cons.name,
        "measure": args.measure,
        "op": op if args.measure in ("chi", "chi-u") else None,
        "n": args.n if args.measure in ("chi-n", "chi-n-star") else None,
        "grid": args.grid,
        "seed": args.seed,
        "claimed_value": cons.claimed_chi,
        "estimate": est.to_jsonable(cons.algebra.space),
    }
    if args.timings:
        doc["timings"] = {"total_s": time.perf_counter() - t0}
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(est.ladder_csv())
    _emit(doc, args.out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# lemma23


def _cmd_lemma23(args) -> int:
    rng = np.random.default_rng(args.seed)
    sp = CircleSpace(2.0)
    failures = []
    for trial in range(args.trials):
        k = int(rng.integers(1, args.max_points + 1))
        base = float(rng.uniform(0, 2))
        span = float(rng.uniform(0, 0.6666))
        pts = [(base + float(o)) % 2.0 for o in rng.uniform(0, span, size=k)]
        diam = max(sp.distance(p, q) for p in pts for q in pts)
        arc = arc_cover(pts, sp)
        if arc is None:
            failures.append({"trial": trial, "reason": "no arc", "points": pts})
        elif abs(arc.length - diam) > 1e-12:
            failures.append(
                {"trial": trial, "reason": "arc length != diameter", "points": pts}
            )
        elif not all(arc.contains(p) for p in pts):
            failures.append({"trial": trial, "reason": "membership", "points": pts})
        if len(failures) >= 10:
            break
    sharp = arc_cover([0.0, 2.0 / 3.0, 4.0 / 3.0], sp)
    doc = {
        "command": "lemma23",
        "trials": args.trials,
        "max_points": args.max_points,
        "seed": args.seed,
        "failures": len(failures),
        "first_failures": failures[:3],
        "sharpness_triple": "none" if sharp is None else "covered",
        "passed": not failures and sharp is None,
    }
    _emit(doc, args.out)
    return EXIT_PASS if doc["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# refute


def _cmd_refute(args) -> int:
    if args.driver not in DRIVERS:
        raise UsageError(
            f"unknown driver {args.driver!r}; known: {sorted(DRIVERS)}"
        )
    model = load_model(args.model)
    claim = (args.delta0, args.deltaN)
    if args.driver == "exponent":
        cert = refute_exponent_group(model, N=args.exponent, claimed=claim)
    else:
        cert = DRIVERS[args.driver](model, claim)
    verify_certificate(cert, model)
    doc = {
        "command": "refute",
        "driver": args.driver,
        "model": model.name,
        "claim": {"delta0": args.delta0, "deltaN": args.deltaN},
        "certificate": cert.to_jsonable(),
        "self_check": "pass",
    }
    if args.cert:
        with open(args.cert, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_clean(cert.to_jsonable()), indent=2, sort_keys=True) + "\n")
    _emit(doc, args.out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# export / bench


def _cmd_export(args) -> int:
    if bool(args.construction) == bool(args.builder):
        raise UsageError("choose exactly one of --construction / --builder")
    if args.construction:
        if args.construction not in CONSTRUCTIONS:
            raise UsageError(f"unknown construction {args.construction!r}")
        kwargs = {}
        if args.construction == "peano-pair":
            kwargs = {"epsilon": args.epsilon, "depth_m": args.depth}
        cons = get_construction(args.construction, **kwargs)
        doc = export_model(cons, grid_n=args.grid)
    else:
        if args.builder not in BUILDERS:
            raise UsageError(
                f"unknown builder {args.builder!r}; known: {sorted(BUILDERS)}"
            )
        if args.builder == "toy-injective":
            doc = BUILDERS[args.builder]()
        else:
            doc = BUILDERS[args.builder](args.grid)
    _emit(doc, args.out)
    return EXIT_PASS


def _time_call(fn, *fargs, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*fargs)
        best = min(best, time.perf_counter() - t0)
    return best


def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    size = args.size
    rows_c = rng.uniform(0, 2, size=(max(1, size // 16), 16))
    s = rng.uniform(0, 3, size=size)
    t = rng.uniform(0, 3, size=size)
    legs = rng.integers(0, 3, size=size).astype(np.float64)
    ts = rng.uniform(0, 1, size=size)
    cases = [
        ("rows_diameter_circle", lambda m: m.rows_diameter_circle(rows_c, 2.0)),
        ("idem_comm_op", lambda m: m.idem_comm_op(s, t)),
        ("triode_meet", lambda m: m.triode_meet(legs, ts, legs[::-1].copy(), ts[::-1].copy())),
    ]
    np_mod = _kernels.backend_module("numpy")
    rows = []
    have_numba = _kernels.has_numba()
    if have_numba:
        nb_mod = _kernels.backend_module("numba")
        for name, call in cases:
            call(nb_mod)  # warm the compile cache before timing
    for name, call in cases:
        entry = {
            "kernel": name,
            "size": size,
            "numpy_s": _time_call(call, np_mod, repeat=args.repeat),
        }
        if have_numba:
            entry["numba_s"] = _time_call(call, nb_mod, repeat=args.repeat)
            entry["speedup"] = entry["numpy_s"] / max(entry["numba_s"], 1e-12)
        rows.append(entry)
    doc = {
        "command": "bench",
        "size": size,
        "repeat": args.repeat,
        "active_backend": _kernels.active_name(),
        "numba_available": have_numba,
        "cases": rows,
    }
    _emit(doc, args.out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jumpgauge",
        description=(
            "Estimate jump discontinuity measures of algebras on metric "
            "carriers, reproduce the library's discontinuous constructions, "
            "and run certificate-producing refutation drivers."
        ),
        epilog=(
            "JUMPGAUGE_BACKEND selects the compute backend (numba/numpy); "
            "JUMPGAUGE_THREADS caps backend parallelism."
        ),
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("reproduce", help="run the full claimed-value table")
    r.add_argument("--grid", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--epsilon", type=float, default=0.05)
    r.add_argument("--depth", type=int, default=8)
    r.add_argument("--out", default=None)
    r.add_argument("--timings", action="store_true")
    r.set_defaults(fn=_cmd_reproduce)

    c = sub.add_parser("chi", help="estimate one jump measure")
    c.add_argument("--construction", required=True)
    c.add_argument(
        "--measure",
        default="chi",
        choices=["chi", "chi-u", "chi-n", "chi-n-star"],
    )
    c.add_argument("--op", default=None)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--grid", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epsilon", type=float, default=0.05)
    c.add_argument("--depth", type=int, default=8)
    c.add_argument("--out", default=None)
    c.add_argument("--csv", default=None)
    c.add_argument("--timings", action="store_true")
    c.set_defaults(fn=_cmd_chi)

    l = sub.add_parser("lemma23", help="arc-cover trials for small sets")
    l.add_argument("--trials", type=int, default=10_000)
    l.add_argument("--max-points", type=int, default=8)
    l.add_argument("--seed", type=int, default=1)
    l.add_argument("--out", default=None)
    l.set_defaults(fn=_cmd_lemma23)

    f = sub.add_parser("refute", help="run a refutation driver on a model file")
    f.add_argument("--driver", required=True)
    f.add_argument("--model", required=True)
    f.add_argument("--delta0", type=float, required=True)
    f.add_argument("--deltaN", type=float, required=True)
    f.add_argument("--exponent", type=int, default=None)
    f.add_argument("--cert", default=None, help="write the certificate here")
    f.add_argument("--out", default=None)
    f.set_defaults(fn=_cmd_refute)

    e = sub.add_parser("export", help="write a lookup-table model document")
    e.add_argument("--construction", default=None)
    e.add_argument("--builder", default=None)
    e.add_argument("--grid", type=int, default=256)
    e.add_argument("--epsilon", type=float, default=0.05)
    e.add_argument("--depth", type=int, default=8)
    e.add_argument("--out", default=None)
    e.set_defaults(fn=_cmd_export)

    b = sub.add_parser("bench", help="compare compute backends")
    b.add_argument("--size", type=int, default=200_000)
    b.add_argument("--repeat", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.set_defaults(fn=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
