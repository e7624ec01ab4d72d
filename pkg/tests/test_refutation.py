"""Approximation lemmas, table models, certificates, and refutation drivers."""

import json
import math

import numpy as np
import pytest

from jumpgauge.refutation import (
    Certificate,
    CertificateError,
    ClaimScopeError,
    FixedPointResult,
    GridTooCoarseError,
    IvtWitness,
    Model,
    ModelFormatError,
    ModelGateError,
    OffGridError,
    RefutationNotFound,
    StepViolation,
    TrivialTheoryError,
    approx_fixed_point,
    approx_ivt_witness,
    build_cyclic_group_model,
    build_toy_injective_model,
    build_xor_exponent_model,
    load_model,
    refute_exponent_group,
    refute_group_fixed_point,
    refute_interval_injective,
    refute_triode_lattice,
    verify_certificate,
    DRIVERS,
)


class TestIvtWitness:
    def test_square_root_witness(self):
        w = approx_ivt_witness(lambda x: x * x, 0.0, 2.0, 2.0, 0.01)
        assert isinstance(w, IvtWitness)
        assert abs(w.point - math.sqrt(2.0)) < 0.01
        assert w.achieved <= w.eps_observed / 2.0 + 1e-15
        assert abs(w.value - 2.0) == w.achieved

    def test_identity_midpoint_exact(self):
        # the walk always has an even cell count, so the midpoint of the
        # bracket is an exact node and the identity hits 0.5 exactly
        w = approx_ivt_witness(lambda x: x, 0.0, 1.0, 0.5, 0.07)
        assert w.point == 0.5 and w.achieved == 0.0

    def test_step_violation_reported_not_raised(self):
        f = lambda x: np.where(x < 0.5, 0.0, 1.0)
        out = approx_ivt_witness(f, 0.0, 1.0, 0.5, 0.05, eps_bound=0.5)
        assert isinstance(out, StepViolation)
        assert out.step == 1.0
        assert out.x_left < 0.5 <= out.x_right
        assert (out.f_left, out.f_right) == (0.0, 1.0)

    def test_target_between_endpoints_required(self):
        with pytest.raises(ValueError, match="not between"):
            approx_ivt_witness(lambda x: x, 0.0, 1.0, 2.0, 0.05)

    def test_interval_orientation_required(self):
        with pytest.raises(ValueError, match="a < c"):
            approx_ivt_witness(lambda x: x, 1.0, 0.0, 0.5, 0.05)

    def test_explicit_walk_gates(self):
        with pytest.raises(GridTooCoarseError, match="not below delta"):
            approx_ivt_witness(
                lambda x: x, 0.0, 1.0, 0.5, 0.05, xs=np.linspace(0, 1, 5)
            )
        with pytest.raises(ValueError, match="ascend"):
            approx_ivt_witness(
                lambda x: x, 0.0, 1.0, 0.5, 0.5, xs=np.array([0.0, 0.4, 0.2, 1.0])
            )
        with pytest.raises(ValueError, match="two points"):
            approx_ivt_witness(lambda x: x, 0.0, 1.0, 0.5, 0.5, xs=np.array([0.0]))


class TestFixedPoint:
    def test_reflection(self):
        r = approx_fixed_point(lambda x: 1.0 - x, delta=0.01)
        assert r.point == pytest.approx(0.5, abs=1e-12)
        assert r.gap == pytest.approx(0.0, abs=1e-12)

    def test_quadratic_oracle(self):
        root = 0.11270166537925831  # lesser solution of x^2 - x + 0.1
        r = approx_fixed_point(lambda x: x * x + 0.1, delta=0.0005)
        assert abs(r.point - root) <= 0.001
        assert r.gap <= 0.0005

    def test_two_dimensional_contraction(self):
        f = lambda pts: 0.5 * pts + 0.25
        r = approx_fixed_point(f, delta=0.05, n=2)
        assert r.point == (0.5, 0.5)
        assert r.gap == 0.0

    def test_dimension_gate(self):
        with pytest.raises(ValueError, match="dimension"):
            approx_fixed_point(lambda x: x, n=3)


class TestLoadModel:
    def test_builder_documents_load(self):
        for doc in (
            build_toy_injective_model(),
            build_cyclic_group_model(64),
            build_xor_exponent_model(64),
        ):
            m = load_model(doc)
            assert isinstance(m, Model)
            assert m.check_residual() <= 1e-9

    def test_accepts_json_text_and_path(self, tmp_path):
        doc = build_toy_injective_model()
        text = json.dumps(doc)
        assert load_model(text).name == "toy-injective-4"
        p = tmp_path / "toy.json"
        p.write_text(text)
        assert load_model(str(p)).name == "toy-injective-4"
        m = load_model(doc)
        assert load_model(m) is m  # idempotent on parsed models

    @pytest.mark.parametrize(
        "mutate,message",
        [
            (lambda d: d.pop("format"), "missing required key"),
            (lambda d: d.update(format="v0"), "unknown format"),
            (lambda d: d.update(space={"space": "torus"}), "unknown space"),
            (lambda d: d["ops"]["G"].pop("arity"), "missing arity"),
            (lambda d: d["ops"]["G"].pop("table"), "grids and table"),
            (lambda d: d["ops"]["G"]["grids"].pop(), "expected 2 grids"),
            (lambda d: d["ops"]["G"]["table"].pop(), "table holds 15"),
            (
                lambda d: d["ops"]["G"]["grids"][0].reverse(),
                "strictly ascend",
            ),
        ],
    )
    def test_malformed_documents_name_location(self, mutate, message):
        doc = build_toy_injective_model()
        mutate(doc)
        with pytest.raises(ModelFormatError, match=message):
            load_model(doc)

    def test_constant_needs_value(self):
        doc = build_cyclic_group_model(8)
        del doc["ops"]["zero"]["value"]
        doc["ops"]["zero"].pop("grids", None)
        with pytest.raises(ModelFormatError, match="needs a value"):
            load_model(doc)

    def test_gate_rejects_law_breaking_table(self):
        doc = build_cyclic_group_model(16)
        doc["ops"]["neg"]["table"][1] = doc["ops"]["neg"]["table"][2]
        with pytest.raises(ModelGateError, match="residual"):
            load_model(doc).check_residual()


class TestTableOps:
    def test_exact_lookup(self):
        m = load_model(build_toy_injective_model())
        g = m.op("G")
        out = g.evaluate(np.array([1.0 / 3.0]), np.array([1.0]))
        assert out[0] == pytest.approx(7.0 / 15.0)

    def test_off_grid_lookup_named(self):
        m = load_model(build_toy_injective_model())
        with pytest.raises(OffGridError, match="operation G, argument 1"):
            m.op("G").evaluate(np.array([0.0]), np.array([0.5]))

    def test_off_grid_triode_point(self, triode_model):
        meet = triode_model.op("meet")
        bad = np.array([[0.0, 0.123456789]])
        with pytest.raises(OffGridError, match="argument 0"):
            meet.evaluate(bad, bad)

    def test_missing_op_named(self):
        m = load_model(build_toy_injective_model())
        with pytest.raises(ModelFormatError, match="no operation"):
            m.op("H")

    def test_var_grid_uses_widest_op(self):
        m = load_model(build_toy_injective_model())
        np.testing.assert_array_equal(
            m.var_grid(), np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        )


TOY_CLAIM = (0.2, 0.9)


@pytest.fixture(scope="module")
def toy_cert():
    model = load_model(build_toy_injective_model())
    return model, refute_interval_injective(model, TOY_CLAIM)


class TestInjectiveDriver:
    def test_toy_refutation(self, toy_cert):
        model, cert = toy_cert
        assert cert.kind == "constraint-violation"
        assert cert.driver == "interval-injective"
        assert cert.claim == {"delta0": 0.2, "deltaN": 0.9, "n": 2}
        # the pairing grid is so fine relative to the claim that one
        # projection link already breaks the first chain level
        assert cert.case == "single-link"
        [link] = cert.links
        assert link["din"] == pytest.approx(1.0 / 15.0)
        assert link["dout"] == pytest.approx(1.0)
        verify_certificate(cert, model)

    def test_peano_refutation_two_branch(self, peano_model):
        cert = refute_interval_injective(peano_model, (0.01, 0.9))
        assert cert.case == "two-branch"
        low, high = cert.links
        assert low["op"] == "G"
        assert high["op"] in ("F0", "F1")
        assert low["din"] < 0.01
        assert high["din"] <= low["dout"] / 2.0 + 1e-12
        assert high["dout"] >= 0.9
        verify_certificate(cert, peano_model)

    def test_claim_scope(self, peano_model):
        with pytest.raises(ClaimScopeError, match="table diameter"):
            refute_interval_injective(peano_model, (0.01, 1.5))
        with pytest.raises(ClaimScopeError, match="0 < delta_0"):
            refute_interval_injective(peano_model, (0.0, 0.5))
        with pytest.raises(ClaimScopeError, match="0 < delta_0"):
            refute_interval_injective(peano_model, (0.6, 0.5))

    def test_grid_too_coarse(self):
        model = load_model(build_toy_injective_model())
        # pairing grid spacing 1/3: walk links of 1/6 cannot sit below
        # a delta_0 of 0.05
        with pytest.raises(GridTooCoarseError, match="delta_0"):
            refute_interval_injective(model, (0.05, 0.9))

    def test_missing_operation(self):
        doc = build_toy_injective_model()
        del doc["ops"]["F1"]
        with pytest.raises(ModelFormatError, match="lacks operation F1"):
            refute_interval_injective(load_model(doc), TOY_CLAIM)


class TestTriodeDriver:
    def test_pullback_refutation(self, triode_model):
        cert = refute_triode_lattice(triode_model, (0.005, 0.4))
        assert cert.case == "single-link"
        [link] = cert.links
        assert link["op"] in ("meet", "join")
        assert link["din"] < 0.005
        assert link["dout"] >= 0.4
        assert cert.context["walk_leg"] in ("A", "B", "C")
        diag = cert.context["diagnostics"]
        assert set(diag["leg_membership"]) == {"A", "B", "C"}
        verify_certificate(cert, triode_model)

    def test_claim_scope_half(self, triode_model):
        with pytest.raises(ClaimScopeError, match="below 1/2"):
            refute_triode_lattice(triode_model, (0.005, 0.6))

    def test_wrong_model_shape(self, peano_model):
        with pytest.raises(ModelFormatError, match="lacks operation"):
            refute_triode_lattice(peano_model, (0.005, 0.4))

    def test_grid_too_coarse(self, triode_model):
        with pytest.raises(GridTooCoarseError):
            refute_triode_lattice(triode_model, (0.001, 0.4))


class TestGroupDriver:
    def test_cyclic_refutation(self):
        model = load_model(build_cyclic_group_model(512))
        cert = refute_group_fixed_point(model, (0.002, 0.9))
        assert cert.case == "single-link"
        assert cert.context["path"] == "near-fixed-point"
        [link] = cert.links
        assert link["din"] < 0.002
        assert link["dout"] >= 0.9
        verify_certificate(cert, model)

    def test_scope_and_dimension(self):
        model = load_model(build_cyclic_group_model(64))
        with pytest.raises(ClaimScopeError, match="table diameter"):
            refute_group_fixed_point(model, (0.02, 1.5))
        with pytest.raises(ValueError, match="dimension"):
            refute_group_fixed_point(model, (0.02, 0.9), n=3)

    def test_builder_validation(self):
        with pytest.raises(ValueError, match="two grid points"):
            build_cyclic_group_model(1)


class TestExponentDriver:
    def test_xor_refutation(self):
        model = load_model(build_xor_exponent_model(256))
        cert = refute_exponent_group(model, claimed=(0.002, 0.4))
        assert cert.case == "single-link"
        assert cert.context["exponent"] == 2
        [link] = cert.links
        assert link["din"] < 0.002
        assert link["dout"] >= 0.4
        verify_certificate(cert, model)

    def test_exponent_from_theory_params(self):
        model = load_model(build_xor_exponent_model(64))
        cert = refute_exponent_group(model, claimed=(0.02, 0.4))
        assert cert.context["exponent"] == 2

    def test_trivial_theory(self):
        doc = build_xor_exponent_model(64)
        doc["theory_params"]["N"] = 1
        with pytest.raises(TrivialTheoryError, match="one-element"):
            refute_exponent_group(load_model(doc), claimed=(0.02, 0.4))

    def test_missing_exponent(self):
        doc = build_xor_exponent_model(64)
        doc["theory_params"] = {}
        doc["theory"] = "group"
        with pytest.raises(ModelFormatError, match="exponent missing"):
            refute_exponent_group(load_model(doc), claimed=(0.02, 0.4))

    def test_claim_required_and_scoped(self):
        model = load_model(build_xor_exponent_model(64))
        with pytest.raises(ValueError, match="required"):
            refute_exponent_group(model)
        with pytest.raises(ClaimScopeError, match="radius"):
            refute_exponent_group(model, claimed=(0.02, 0.7))

    def test_builder_validation(self):
        with pytest.raises(ValueError, match="power of two"):
            build_xor_exponent_model(100)


class TestCertificateIntegrity:
    def test_json_roundtrip_still_verifies(self, toy_cert):
        model, cert = toy_cert
        wire = json.dumps(cert.to_jsonable(), sort_keys=True)
        back = Certificate.from_jsonable(json.loads(wire))
        verify_certificate(back, model)
        assert back.to_jsonable() == cert.to_jsonable()

    def test_tampered_output_spread(self, toy_cert):
        model, cert = toy_cert
        doc = cert.to_jsonable()
        doc["links"][0]["dout"] += 0.25
        with pytest.raises(CertificateError, match="output spread"):
            verify_certificate(Certificate.from_jsonable(doc), model)

    def test_tampered_input_closeness(self, toy_cert):
        model, cert = toy_cert
        doc = cert.to_jsonable()
        doc["links"][0]["din"] = 0.5
        with pytest.raises(CertificateError, match="input closeness"):
            verify_certificate(Certificate.from_jsonable(doc), model)

    def test_tampered_named_distance(self, toy_cert):
        model, cert = toy_cert
        doc = cert.to_jsonable()
        key = next(iter(doc["distances"]))
        doc["distances"][key]["value"] += 0.125
        with pytest.raises(CertificateError, match="re-evaluation"):
            verify_certificate(Certificate.from_jsonable(doc), model)

    def test_tampered_claim_breaks_checks(self, toy_cert):
        model, cert = toy_cert
        doc = cert.to_jsonable()
        doc["claim"]["delta0"] = 1e-9
        with pytest.raises(CertificateError, match="check failed"):
            verify_certificate(Certificate.from_jsonable(doc), model)

    def test_unknown_reference(self, toy_cert):
        model, cert = toy_cert
        doc = cert.to_jsonable()
        doc["checks"] = list(doc["checks"]) + [
            {"lhs": "oracle.value", "op": "<", "rhs": 1.0}
        ]
        with pytest.raises(CertificateError, match="unknown reference"):
            verify_certificate(Certificate.from_jsonable(doc), model)


class TestDriverTotality:
    """Gated inputs either certify or raise a typed error; verified
    certificates come back for every member of a spread of table sizes."""

    @pytest.mark.parametrize("m", [64, 100, 256])
    def test_cyclic_sizes(self, m):
        model = load_model(build_cyclic_group_model(m))
        cert = refute_group_fixed_point(model, (0.02, 0.9))
        verify_certificate(cert, model)

    @pytest.mark.parametrize("m", [64, 128])
    def test_xor_sizes(self, m):
        model = load_model(build_xor_exponent_model(m))
        cert = refute_exponent_group(model, claimed=(0.02, 0.4))
        verify_certificate(cert, model)

    def test_driver_registry(self):
        assert set(DRIVERS) == {
            "interval-injective",
            "triode-lattice",
            "group",
            "exponent",
        }
