"""End-to-end tests of the command line front end.

Every test drives main() with real files in a temp directory, checking the
artifact wire formats, the error object contract and byte determinism.
The curve fixtures and their expected equations match the library tests.
"""

import json

import pytest

from tropimpl.cli import JobSpec, _trial_seed, main
from tropimpl.errors import InputFormatError
from tropimpl.tropical import TropicalCycle

CURVE = {"d": 1, "n": 2, "components": [
    {"terms": [{"coeff": 11, "exp": [2]}, {"coeff": 5, "exp": [3]},
               {"coeff": -1, "exp": [4]}]},
    {"terms": [{"coeff": 11, "exp": [0]}, {"coeff": 11, "exp": [1]},
               {"coeff": 7, "exp": [8]}]}]}

# x = t^4 + t, y = t^2 + 2t; its equation has a lattice point of the
# Newton polytope with coefficient zero
SPARSE_CURVE = {"d": 1, "n": 2, "components": [
    {"terms": [{"coeff": 1, "exp": [4]}, {"coeff": 1, "exp": [1]}]},
    {"terms": [{"coeff": 1, "exp": [2]}, {"coeff": 2, "exp": [1]}]}]}

CUSP_JOB = {"parametrization": {"d": 1, "n": 2, "components": [
    {"terms": [{"coeff": 1, "exp": [2]}]},
    {"terms": [{"coeff": 1, "exp": [3]}]}]}}

TRIANGLES = [
    [[898, -614], [-570, 817], [892, -594]],
    [[-603, -481], [-623, -127], [-36, 732]],
    [[-548, -864], [-151, 873], [800, -861]]]


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys=None):
    rc = main(argv)
    if capsys is None:
        return rc, None
    return rc, capsys.readouterr().out


class TestJobSpec:
    def test_defaults_validate(self):
        JobSpec("implicitize", "a.json", "b.json").validate()

    def test_bad_field_rejected(self):
        with pytest.raises(InputFormatError):
            JobSpec("implicitize", "a", "b", field="gf:10").validate()

    def test_bad_height_rejected(self):
        with pytest.raises(InputFormatError):
            JobSpec("implicitize", "a", "b", height=1).validate()

    def test_bad_threads_rejected(self):
        with pytest.raises(InputFormatError):
            JobSpec("implicitize", "a", "b", threads=0).validate()


class TestTrialSeed:
    def test_deterministic_and_spread(self):
        seeds = [_trial_seed(0, k) for k in range(50)]
        assert seeds == [_trial_seed(0, k) for k in range(50)]
        assert len(set(seeds)) == 50
        assert set(seeds).isdisjoint(_trial_seed(1, k) for k in range(50))


class TestTropCycle:
    def test_curve_cycle_artifact(self, tmp_path):
        out = tmp_path / "cycle.json"
        rc, _ = run(["trop-cycle", "--in", write(tmp_path / "p.json", CURVE),
                     "--out", str(out)])
        assert rc == 0
        art = json.loads(out.read_text())
        C = TropicalCycle.from_json(art["cycle"])
        assert C.ambient_dim == 2 and C.pure_dim == 1
        got = sorted((cone.rays[0], w) for cone, w in C)
        assert got == [((-1, -2), 4), ((0, 1), 8), ((1, 0), 2), ((1, 0), 2)]

    def test_chains_into_newton(self, tmp_path):
        cycle_file = tmp_path / "cycle.json"
        run(["trop-cycle", "--in", write(tmp_path / "p.json", CURVE),
             "--out", str(cycle_file)])
        out = tmp_path / "polytope.json"
        rc, _ = run(["newton", "--in", str(cycle_file), "--out", str(out)])
        assert rc == 0
        art = json.loads(out.read_text())["polytope"]
        assert sorted(map(tuple, art["vertices"])) == [(0, 0), (0, 4), (8, 0)]
        assert art["f_vector"] == [3, 3]
        assert art["lattice_point_count"] == 25


class TestImplicitize:
    def test_zero_coefficient_is_kept(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["implicitize",
                     "--in", write(tmp_path / "p.json", SPARSE_CURVE),
                     "--out", str(out)])
        assert rc == 0
        art = json.loads(out.read_text())
        assert sorted(art) == ["cycle", "polynomial", "polytope"]
        terms = {tuple(t["exp"]): t["coeff"]
                 for t in art["polynomial"]["terms"]}
        assert terms == {
            (0, 1): 7, (0, 2): 6, (0, 3): "0/1", (0, 4): 1,
            (1, 0): -14, (1, 1): -16, (1, 2): -2, (2, 0): 1}

    def test_polytope_only_drops_polynomial(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["implicitize",
                     "--in", write(tmp_path / "p.json", CURVE),
                     "--out", str(out), "--polytope-only"])
        assert rc == 0
        assert sorted(json.loads(out.read_text())) == ["cycle", "polytope"]

    def test_byte_identical_reruns(self, tmp_path):
        src = write(tmp_path / "p.json", CURVE)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["implicitize", "--in", src, "--out", str(a),
                    "--seed", "7"])[0] == 0
        assert run(["implicitize", "--in", src, "--out", str(b),
                    "--seed", "7"])[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_artifact_overwritten_in_place(self, tmp_path):
        out = tmp_path / "out.json"
        out.write_text("stale")
        rc, _ = run(["implicitize",
                     "--in", write(tmp_path / "p.json", SPARSE_CURVE),
                     "--out", str(out)])
        assert rc == 0
        json.loads(out.read_text())


class TestADisc:
    def test_quadratic_discriminant(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["adisc",
                     "--in", write(tmp_path / "a.json",
                                   {"rows": [[1, 1, 1], [0, 1, 2]]}),
                     "--out", str(out)])
        assert rc == 0
        art = json.loads(out.read_text())
        assert art["polytope"]["f_vector"] == [2]
        assert art["polytope"]["lattice_point_count"] == 2
        terms = {tuple(t["exp"]): t["coeff"]
                 for t in art["polynomial"]["terms"]}
        assert terms == {(0, 2, 0): 1, (1, 0, 1): -4}

    def test_finite_field_artifact_records_modulus(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["adisc",
                     "--in", write(tmp_path / "a.json",
                                   {"rows": [[1, 1, 1], [0, 1, 2]]}),
                     "--out", str(out), "--field", "gf:101"])
        assert rc == 0
        art = json.loads(out.read_text())
        assert art["polynomial"]["modulus"] == 101
        terms = {tuple(t["exp"]): t["coeff"]
                 for t in art["polynomial"]["terms"]}
        assert terms == {(0, 2, 0): 1, (1, 0, 1): 97}


class TestChow:
    def test_cusp_artifact(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["chow", "--in", write(tmp_path / "c.json", CUSP_JOB),
                     "--out", str(out)])
        assert rc == 0
        art = json.loads(out.read_text())
        assert sorted(art) == ["chow_form", "fan", "polytope", "shift",
                               "translated_polytope"]
        assert sorted(map(tuple, art["translated_polytope"]["vertices"])) \
            == [(0, 3, 0), (1, 0, 2)]
        assert art["shift"] == [2, 0, 1]
        assert sorted(map(tuple, art["polytope"]["vertices"])) \
            == [(2, 3, 1), (3, 0, 3)]

    def test_polytope_only_stops_at_fan(self, tmp_path):
        out = tmp_path / "out.json"
        rc, _ = run(["chow", "--in", write(tmp_path / "c.json", CUSP_JOB),
                     "--out", str(out), "--polytope-only"])
        assert rc == 0
        assert sorted(json.loads(out.read_text())) \
            == ["fan", "translated_polytope"]

    def test_finite_field_rejected(self, tmp_path, capsys):
        rc, out = run(["chow", "--in", write(tmp_path / "c.json", CUSP_JOB),
                       "--out", str(tmp_path / "o.json"),
                       "--field", "gf:101"], capsys)
        assert rc == 2
        assert json.loads(out)["error"] == "parse"


class TestMfpSearch:
    def test_fixed_triangles_record(self, tmp_path, capsys):
        cfg = {"vertex_counts": [3, 3, 3], "trials": 0,
               "fixed": [TRIANGLES]}
        out = tmp_path / "lead.jsonl"
        rc, printed = run(["mfp-search",
                           "--in", write(tmp_path / "cfg.json", cfg),
                           "--out", str(out)], capsys)
        assert rc == 0
        assert json.loads(printed) == {
            "trials": 1, "records": 1, "best_vertices": 25}
        recs = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(recs) == 1
        assert recs[0]["kind"] == "fixed"
        assert recs[0]["f_vector"] == [25, 49, 26]
        assert recs[0]["points"] == TRIANGLES

    def test_random_search_is_deterministic(self, tmp_path):
        cfg = {"vertex_counts": [3, 3], "height": 9, "trials": 5}
        src = write(tmp_path / "cfg.json", cfg)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run(["mfp-search", "--in", src, "--out", str(a),
                    "--seed", "3"])[0] == 0
        assert run(["mfp-search", "--in", src, "--out", str(b),
                    "--seed", "3"])[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes()

    def test_record_file_appends(self, tmp_path):
        cfg = {"vertex_counts": [3, 3], "height": 9, "trials": 2}
        src = write(tmp_path / "cfg.json", cfg)
        out = tmp_path / "lead.jsonl"
        run(["mfp-search", "--in", src, "--out", str(out)])
        once = len(out.read_text().splitlines())
        run(["mfp-search", "--in", src, "--out", str(out)])
        assert len(out.read_text().splitlines()) == 2 * once

    def test_monomial_inputs_stay_low_dimensional(self, tmp_path):
        # single-point supports give a monomial image whose polytope is a
        # point or a segment, so records never exceed two vertices
        cfg = {"vertex_counts": [1, 1], "height": 4, "trials": 6}
        out = tmp_path / "lead.jsonl"
        rc, _ = run(["mfp-search",
                     "--in", write(tmp_path / "cfg.json", cfg),
                     "--out", str(out)])
        assert rc == 0
        for line in out.read_text().splitlines():
            rec = json.loads(line)
            if "vertices" in rec:
                assert rec["vertices"] <= 2

    def test_bad_config_rejected(self, tmp_path, capsys):
        cfg = {"vertex_counts": [3]}
        rc, out = run(["mfp-search",
                       "--in", write(tmp_path / "cfg.json", cfg),
                       "--out", str(tmp_path / "lead.jsonl")], capsys)
        assert rc == 2
        assert json.loads(out)["error"] == "parse"


class TestErrorContract:
    def test_malformed_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        rc, out = run(["implicitize", "--in", str(bad),
                       "--out", str(tmp_path / "o.json")], capsys)
        assert rc == 2
        err = json.loads(out)
        assert err["error"] == "parse"
        assert "message" in err

    def test_missing_input_exits_2(self, tmp_path, capsys):
        rc, out = run(["implicitize", "--in", str(tmp_path / "absent.json"),
                       "--out", str(tmp_path / "o.json")], capsys)
        assert rc == 2
        assert json.loads(out)["error"] == "parse"

    def test_precondition_exits_3(self, tmp_path, capsys):
        rc, out = run(["adisc",
                       "--in", write(tmp_path / "a.json",
                                     {"rows": [[1, 2]]}),
                       "--out", str(tmp_path / "o.json")], capsys)
        assert rc == 3
        err = json.loads(out)
        assert err["error"] == "precondition"
        assert err["type"] == "RowSpanMissingOnes"

    def test_computation_exits_4(self, tmp_path, capsys):
        rc, out = run(["trop-cycle",
                       "--in", write(tmp_path / "p.json", CURVE),
                       "--out", str(tmp_path / "o.json"),
                       "--delta", "3"], capsys)
        assert rc == 4
        err = json.loads(out)
        assert err["error"] == "computation"
        assert err["type"] == "NonDivisibleDegree"

    def test_bad_flag_value_exits_2(self, tmp_path, capsys):
        rc, out = run(["implicitize",
                       "--in", write(tmp_path / "p.json", CURVE),
                       "--out", str(tmp_path / "o.json"),
                       "--height", "1"], capsys)
        assert rc == 2
        assert json.loads(out)["error"] == "parse"

    def test_no_artifact_written_on_failure(self, tmp_path, capsys):
        target = tmp_path / "o.json"
        rc, _ = run(["adisc",
                     "--in", write(tmp_path / "a.json", {"rows": [[1, 2]]}),
                     "--out", str(target)], capsys)
        assert rc == 3
        assert not target.exists()
