"""Command-line interface: exit codes, report shape, determinism, schemas."""

import json
import pathlib

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from jumpgauge.cli import main

DOCS = pathlib.Path(__file__).resolve().parents[1] / "docs"


def _schemas():
    loaded = {}
    registry = Registry()
    for name in ("model", "certificate", "report"):
        schema = json.loads((DOCS / f"{name}.schema.json").read_text())
        loaded[name] = schema
        registry = registry.with_resource(
            schema["$id"], Resource.from_contents(schema)
        )
    return loaded, registry


SCHEMAS, REGISTRY = _schemas()


def _validate(kind: str, doc: dict) -> None:
    Draft202012Validator(SCHEMAS[kind], registry=REGISTRY).validate(doc)


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestUsageErrors:
    def test_no_subcommand(self, capsys):
        code, _, err = _run(capsys, [])
        assert code == 2

    def test_grid_below_minimum(self, capsys):
        code, _, err = _run(capsys, ["reproduce", "--grid", "2"])
        assert code == 2
        assert "usage error" in err

    def test_unknown_construction(self, capsys):
        code, _, err = _run(
            capsys, ["chi", "--construction", "s2-sphere", "--grid", "100"]
        )
        assert code == 2
        assert "unknown construction" in err

    def test_unknown_op(self, capsys):
        code, _, err = _run(
            capsys,
            ["chi", "--construction", "s1-zero-one", "--op", "Q", "--grid", "100"],
        )
        assert code == 2
        assert "no operation" in err

    def test_unknown_driver(self, capsys, tmp_path):
        p = tmp_path / "m.json"
        p.write_text("{}")
        code, _, err = _run(
            capsys,
            [
                "refute", "--driver", "warp", "--model", str(p),
                "--delta0", "0.1", "--deltaN", "0.5",
            ],
        )
        assert code == 2
        assert "unknown driver" in err

    def test_export_needs_exactly_one_source(self, capsys):
        code, _, err = _run(capsys, ["export"])
        assert code == 2
        code, _, err = _run(
            capsys,
            ["export", "--construction", "s1-zero-one", "--builder", "toy-injective"],
        )
        assert code == 2

    def test_malformed_model_fails_not_crashes(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"format": "bogus"}))
        code, _, err = _run(
            capsys,
            [
                "refute", "--driver", "interval-injective", "--model", str(p),
                "--delta0", "0.2", "--deltaN", "0.9",
            ],
        )
        assert code == 1
        assert "error" in err


class TestChiCommand:
    def test_report_shape_and_schema(self, capsys):
        code, out, _ = _run(
            capsys,
            ["chi", "--construction", "s1-zero-one", "--grid", "120", "--seed", "3"],
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        assert doc["command"] == "chi"
        assert doc["construction"] == "s1-zero-one"
        assert doc["op"] == "F"
        assert doc["claimed_value"] == pytest.approx(2.0 / 3.0)
        assert 0.0 < doc["estimate"]["value"] <= 1.0
        assert doc["estimate"]["ladder"]

    def test_byte_identical_reruns(self, capsys, tmp_path):
        argv = ["chi", "--construction", "s1-idem-comm", "--grid", "100"]
        _, out1, _ = _run(capsys, argv)
        _, out2, _ = _run(capsys, argv)
        assert out1 == out2
        out_file = tmp_path / "report.json"
        code, _, _ = _run(capsys, argv + ["--out", str(out_file)])
        assert code == 0
        assert out_file.read_text() == out1

    def test_csv_ladder(self, capsys, tmp_path):
        csv_file = tmp_path / "ladder.csv"
        code, _, _ = _run(
            capsys,
            [
                "chi", "--construction", "s1-zero-one", "--grid", "100",
                "--csv", str(csv_file),
            ],
        )
        assert code == 0
        lines = csv_file.read_text().strip().splitlines()
        assert lines[0] == "radius,diameter"
        assert len(lines) >= 3
        radii = [float(line.split(",")[0]) for line in lines[1:]]
        assert radii == sorted(radii, reverse=True)

    def test_chained_measure(self, capsys):
        code, out, _ = _run(
            capsys,
            [
                "chi", "--construction", "triode-lattice",
                "--measure", "chi-n-star", "--n", "2", "--grid", "80",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        assert doc["measure"] == "chi-n-star"
        assert doc["n"] == 2
        assert doc["op"] is None

    def test_timings_only_on_request(self, capsys):
        argv = ["chi", "--construction", "s1-majority", "--grid", "100"]
        _, out, _ = _run(capsys, argv)
        assert "timings" not in json.loads(out)
        _, out, _ = _run(capsys, argv + ["--timings"])
        assert "timings" in json.loads(out)


class TestLemma23Command:
    def test_small_run_passes(self, capsys):
        code, out, _ = _run(
            capsys, ["lemma23", "--trials", "300", "--max-points", "6"]
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        assert doc["passed"] is True
        assert doc["failures"] == 0
        assert doc["sharpness_triple"] == "none"


class TestExportCommand:
    def test_construction_export_matches_schema(self, capsys, tmp_path):
        out_file = tmp_path / "model.json"
        code, _, _ = _run(
            capsys,
            [
                "export", "--construction", "s1-zero-one", "--grid", "64",
                "--out", str(out_file),
            ],
        )
        assert code == 0
        doc = json.loads(out_file.read_text())
        _validate("model", doc)
        assert doc["space"]["space"] == "circle"

    def test_builder_export_matches_schema(self, capsys):
        code, out, _ = _run(capsys, ["export", "--builder", "toy-injective"])
        assert code == 0
        _validate("model", json.loads(out))

    def test_unknown_builder(self, capsys):
        code, _, err = _run(capsys, ["export", "--builder", "mystery"])
        assert code == 2
        assert "unknown builder" in err


class TestRefuteCommand:
    def test_toy_end_to_end(self, capsys, tmp_path):
        model_file = tmp_path / "toy.json"
        code, _, _ = _run(
            capsys,
            ["export", "--builder", "toy-injective", "--out", str(model_file)],
        )
        assert code == 0
        cert_file = tmp_path / "cert.json"
        code, out, _ = _run(
            capsys,
            [
                "refute", "--driver", "interval-injective",
                "--model", str(model_file),
                "--delta0", "0.2", "--deltaN", "0.9",
                "--cert", str(cert_file),
            ],
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        assert doc["self_check"] == "pass"
        cert = json.loads(cert_file.read_text())
        _validate("certificate", cert)
        assert cert == doc["certificate"]
        assert cert["kind"] == "constraint-violation"

    def test_exponent_driver_via_files(self, capsys, tmp_path):
        model_file = tmp_path / "xor.json"
        code, _, _ = _run(
            capsys,
            [
                "export", "--builder", "xor-exponent", "--grid", "64",
                "--out", str(model_file),
            ],
        )
        assert code == 0
        code, out, _ = _run(
            capsys,
            [
                "refute", "--driver", "exponent", "--model", str(model_file),
                "--delta0", "0.02", "--deltaN", "0.4",
            ],
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        _validate("certificate", doc["certificate"])

    def test_out_of_scope_claim_fails(self, capsys, tmp_path):
        model_file = tmp_path / "toy.json"
        _run(capsys, ["export", "--builder", "toy-injective", "--out", str(model_file)])
        code, _, err = _run(
            capsys,
            [
                "refute", "--driver", "interval-injective",
                "--model", str(model_file),
                "--delta0", "0.2", "--deltaN", "1.5",
            ],
        )
        assert code == 1
        assert "error" in err


class TestBenchCommand:
    def test_small_benchmark(self, capsys):
        code, out, _ = _run(
            capsys, ["bench", "--size", "4096", "--repeat", "1"]
        )
        assert code == 0
        doc = json.loads(out)
        _validate("report", doc)
        assert doc["active_backend"] in ("numpy", "numba")
        names = {c["kernel"] for c in doc["cases"]}
        assert names == {"rows_diameter_circle", "idem_comm_op", "triode_meet"}
        for case in doc["cases"]:
            assert case["numpy_s"] > 0.0
            if doc["numba_available"]:
                assert case["numba_s"] > 0.0
                assert case["speedup"] == pytest.approx(
                    case["numpy_s"] / case["numba_s"], rel=1e-6
                )


class TestReproduceCommand:
    def test_full_table_small_grid(self, capsys):
        code, out, _ = _run(capsys, ["reproduce", "--grid", "200", "--timings"])
        doc = json.loads(out)
        _validate("report", doc)
        assert code == 0
        assert doc["passed"] is True
        names = [it["name"] for it in doc["items"]]
        assert len(names) == 18 and len(set(names)) == 18
        for prefix in (
            "s1-zero-one:", "s1-idem-comm:", "s1-majority:", "peano-pair:",
            "reals-lgroup:", "derived-sigma2:", "triode-lattice:",
            "arc-cover:", "zero-one:", "refute:",
        ):
            assert any(n.startswith(prefix) for n in names), prefix
        assert all(it["pass"] for it in doc["items"])
        assert doc["timings"]["total_s"] > 0.0
