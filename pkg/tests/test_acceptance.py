"""End-to-end checks of the library's headline claims.

Each test pins one advertised behavior of the shipped constructions,
estimators, and refuters at fixed grids, seeds, and tolerances: the
equational residuals, the claimed jump values with their bands, the
arc-cover and winding mechanisms, the interpretation bridge, and the
certificate drivers. The whole module is budgeted to run in well under
five minutes on a desktop machine.
"""

import time

import numpy as np
import pytest

from jumpgauge.circle_topology import (
    Loop,
    arc_cover,
    loops_from_binary_op,
    winding_family_check,
    winding_number,
)
from jumpgauge.constructions import (
    get_construction,
    interpret_lgroup_to_sigma2,
    reals_lgroup_model,
)
from jumpgauge.equations import catalog, residual
from jumpgauge.jumps import chi_n_star, jump_sup, monotonize_deltas, uniform_jump
from jumpgauge.metric_core import CircleSpace
from jumpgauge.refutation import (
    refute_interval_injective,
    refute_triode_lattice,
    verify_certificate,
)

JUMP_BAND = (0.647, 0.687)  # claimed 2/3, desk tolerance 0.02


def test_zero_one_identities_and_jump(zero_one):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    envs = zero_one.sample_envs(rng, 10_000)
    assert residual(zero_one.algebra, zero_one.theory, envs) <= 1e-12
    est = jump_sup(zero_one.algebra, "F", grid=2000, seed=0)
    assert JUMP_BAND[0] <= est.value <= JUMP_BAND[1]
    assert time.perf_counter() - t0 < 60.0


def test_idempotent_commutative_jump_and_corners(idem_comm):
    rng = np.random.default_rng(102)
    envs = idem_comm.sample_envs(rng, 10_000)
    assert residual(idem_comm.algebra, idem_comm.theory, envs) == 0.0
    est = jump_sup(idem_comm.algebra, "F", grid=1000, seed=0)
    assert abs(est.value - 1.0) <= 0.03  # carrier circumference 3
    diam = idem_comm.algebra.space.full_diameter  # 3/2
    assert abs(est.value / diam - 2.0 / 3.0) <= 0.02  # diameter-1 scale
    f = idem_comm.algebra.ops["F"].batch
    corners = [
        [float(f(np.array([float(s)]), np.array([float(t)]))[0]) for t in range(3)]
        for s in range(3)
    ]
    assert corners == [[0.0, 1.0, 0.0], [1.0, 1.0, 2.0], [0.0, 2.0, 2.0]]


def test_majority_identities_membership_and_jump(majority):
    rng = np.random.default_rng(103)
    envs = majority.sample_envs(rng, 10_000)
    assert residual(majority.algebra, catalog("majority"), envs) == 0.0
    assert residual(majority.algebra, catalog("majority-symmetric"), envs) == 0.0
    a, b, c = (np.array([e[i] for e in envs]) for i in range(3))
    out = majority.algebra.ops["F"].batch(a, b, c)
    assert np.all((out == a) | (out == b) | (out == c))
    est = jump_sup(majority.algebra, "F", grid=1000, seed=0)
    assert JUMP_BAND[0] <= est.value <= JUMP_BAND[1]


def test_pairing_family_drives_the_bound_down(peano):
    # exact inversion on the depth-aligned lattice
    rng = np.random.default_rng(104)
    envs = peano.sample_envs(rng, 10_000)
    x = np.array([e[0] for e in envs])
    y = np.array([e[1] for e in envs])
    ops = peano.algebra.ops
    h = ops["G"].batch(x, y)
    assert np.array_equal(ops["F0"].batch(h), x)
    assert np.array_equal(ops["F1"].batch(h), y)

    # the squeeze jump is capped by its scale factor, uniformly in it
    for eps in (0.1, 0.05):
        cons = get_construction("peano-pair", epsilon=eps, depth_m=8)
        est = jump_sup(cons.algebra, "G", grid=1000, seed=0)
        assert est.value <= eps + 1e-12

    # the projections are continuous: their measured jump collapses once
    # the radius ladder reaches the scale on which the curve is linear
    fine = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 3e-7)
    for op in ("F0", "F1"):
        est = jump_sup(peano.algebra, op, grid=2000, radii=fine, seed=0)
        assert est.value <= 0.02


def test_arc_cover_on_small_sets():
    sp = CircleSpace(2.0)
    rng = np.random.default_rng(105)
    for _ in range(10_000):
        k = int(rng.integers(1, 9))
        base = float(rng.uniform(0.0, 2.0))
        span = float(rng.uniform(0.0, 0.6660))
        pts = [(base + float(o)) % 2.0 for o in rng.uniform(0.0, span, size=k)]
        arc = arc_cover(pts, sp)
        assert arc is not None
        diam = sp.encoded_diameter(np.asarray(pts))
        assert abs(arc.length - diam) <= 1e-12
        assert all(arc.contains(p) for p in pts)
    assert arc_cover([0.0, 2.0 / 3.0, 4.0 / 3.0], sp) is None


def test_pointwise_jump_never_exceeds_uniform_jump(
    zero_one, idem_comm, majority, triode
):
    cases = [
        (zero_one, "F"),
        (idem_comm, "F"),
        (majority, "F"),
        (triode, "join"),
    ]
    for cons, op in cases:
        sup = jump_sup(cons.algebra, op, grid=1000, seed=0)
        uni = uniform_jump(cons.algebra, op, grid=1000, seed=0)
        assert uni.value >= sup.value - 1e-9, cons.name
        assert abs(uni.value - sup.value) <= 0.03, cons.name


def test_interpretation_bridge():
    lg = reals_lgroup_model()
    rng = np.random.default_rng(106)
    envs = [tuple(rng.uniform(-8.0, 8.0, size=3)) for _ in range(1000)]
    assert residual(lg, catalog("lambda-gamma", m_max=3, k_max=3), envs) <= 1e-9
    derived = interpret_lgroup_to_sigma2(lg)
    envs2 = [tuple(rng.uniform(-8.0, 8.0, size=3)) for _ in range(1000)]
    assert residual(derived, catalog("sigma2", m_max=3, k_max=3), envs2) <= 1e-9


def test_triode_lattice_laws_and_chained_jump(triode):
    rng = np.random.default_rng(107)
    envs = triode.sample_envs(rng, 3000)
    assert residual(triode.algebra, triode.theory, envs) == 0.0
    est = chi_n_star(triode.algebra, 3, grid=200, seed=0)
    assert est.value >= 0.45


def test_winding_obstruction(zero_one):
    sp = CircleSpace(2.0)
    nodes = sp.grid(200).encoded()
    assert winding_number(Loop(sp, tuple(nodes))) == 1
    assert winding_number(Loop(sp, (0.7,) * 200)) == 0
    fam = loops_from_binary_op(
        zero_one.algebra, "F", np.linspace(1.0, 0.0, 21), 200
    )
    report = winding_family_check(fam, bound=0.6)
    assert not report.passed
    assert report.windings[0] == 0 and report.windings[-1] == 1
    assert {0, 1} <= set(report.windings)


def test_refuters_and_ladder_repair(peano_model, triode_model):
    cert = refute_interval_injective(peano_model, (0.01, 0.9))
    verify_certificate(cert, peano_model)  # re-evaluates within 1e-9
    cert = refute_triode_lattice(triode_model, (0.005, 0.4))
    verify_certificate(cert, triode_model)

    rng = np.random.default_rng(108)
    for _ in range(1000):
        n = int(rng.integers(1, 41))
        deltas = list(rng.uniform(1e-6, 2.0, size=n))
        out = monotonize_deltas(deltas)
        arr = np.asarray(out)
        assert np.all(np.diff(arr) >= 0.0)
        assert np.all(arr <= np.asarray(deltas) + 0.0)
        assert out[-1] == deltas[-1]
        assert monotonize_deltas(out) == out
