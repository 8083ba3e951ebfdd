import json

import pytest
from click.testing import CliRunner

from qgroupoid.cli import dumps, load_structure, main, mqg_doc
from qgroupoid.factory import structure_gap


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MQG_TOL", raising=False)
    runner = CliRunner()

    def go(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)
    return go


def _report(result):
    return json.loads(result.output)


def test_construct_pair_groupoid_writes_the_full_table(run):
    r = run("construct", "groupoid", "pair", 3)
    assert r.exit_code == 0
    doc = json.loads(r.output)
    assert doc["kind"] == "groupoid"
    assert len(doc["gamma_table"]) == 81


@pytest.mark.parametrize("args", [("groupoid", "pair", 2, "--mu", "1/3,2/3"),
                                  ("pairs", "2", "--density", "2/3,1/3"), ("trivial",)])
def test_files_round_trip_byte_for_byte(run, tmp_path, args):
    run("construct", "mqg", *args, "-o", "a.json")
    raw = (tmp_path / "a.json").read_text()
    _, s = load_structure("a.json")
    assert dumps(mqg_doc(s)) == raw


def test_written_files_reload_to_the_same_structure(run):
    run("construct", "mqg", "groupoid", "pair", 2, "--mu", "1/3,2/3", "-o", "a.json")
    run("compose", "sum", "a.json", "-o", "b.json")
    _, a = load_structure("a.json")
    _, b = load_structure("b.json")
    assert max(structure_gap(a, b).values()) < 1e-10


def test_construct_is_deterministic(run, tmp_path):
    run("construct", "mqg", "pairs", "2", "--density", "2/3,1/3", "-o", "x.json")
    run("construct", "mqg", "pairs", "2", "--density", "2/3,1/3", "-o", "y.json")
    assert (tmp_path / "x.json").read_bytes() == (tmp_path / "y.json").read_bytes()


def test_trivial_structure_verifies_exactly(run):
    run("construct", "mqg", "trivial", "-o", "t.json")
    r = run("verify", "t.json")
    assert r.exit_code == 0
    rep = _report(r)
    assert rep["summary"]["passed"] and rep["summary"]["failures"] == []
    assert max(c["residual"] for c in rep["checks"]) < 1e-12


@pytest.mark.parametrize("kind", [("groupoid", "symmetric", 3), ("wha", "convolution", "pair", 2)])
def test_verify_groupoid_and_wha_files(run, kind):
    run("construct", *kind, "-o", "g.json")
    r = run("verify", "g.json")
    assert r.exit_code == 0, r.output


def test_corrupted_coproduct_fails_verification(run, tmp_path):
    run("construct", "mqg", "groupoid", "pair", 2, "-o", "p.json")
    doc = json.loads((tmp_path / "p.json").read_text())
    coeff = doc["coproduct"]
    coeff[0], coeff[1] = coeff[1], coeff[0]
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    r = run("verify", "bad.json")
    assert r.exit_code == 1
    rep = _report(r)
    assert not rep["summary"]["passed"]
    assert rep["summary"]["failures"]


def test_wrong_groupoid_table_fails(run, tmp_path):
    run("construct", "groupoid", "cyclic", 3, "-o", "g.json")
    doc = json.loads((tmp_path / "g.json").read_text())
    entry = next(e for e in doc["gamma_table"] if e[2] is not None)
    entry[2] = (entry[2] + 1) % 3
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert run("verify", "bad.json").exit_code == 1


@pytest.mark.parametrize("text", ["not json", "{}", '{"kind": "mqg"}', '{"kind": "banana"}'])
def test_bad_input_exits_with_two(run, tmp_path, text):
    (tmp_path / "junk.json").write_text(text)
    r = run("verify", "junk.json")
    assert r.exit_code == 2


def test_bad_construct_arguments_exit_with_two(run):
    assert run("construct", "mqg", "groupoid", "pair", 2, "--mu", "1,-1").exit_code == 2
    assert run("construct", "mqg", "pairs", "2", "--density", "1").exit_code == 2
    assert run("construct", "mqg", "nope").exit_code == 2


def test_tolerance_from_the_environment(run):
    run("construct", "mqg", "groupoid", "symmetric", 3, "-o", "s.json")
    r = run("verify", "s.json", env={"MQG_TOL": "1e-30"})
    rep = _report(r)
    assert rep["environment"]["tolerance"] == 1e-30
    assert r.exit_code == 1
    r = run("verify", "s.json", "--tol", "1e-6", env={"MQG_TOL": "1e-30"})
    assert r.exit_code == 0 and _report(r)["environment"]["tolerance"] == 1e-6


def test_report_file_matches_stdout(run, tmp_path):
    run("construct", "mqg", "groupoid", "cyclic", 2, "-o", "z.json")
    r = run("verify", "z.json", "--report", "rep.json")
    assert json.loads((tmp_path / "rep.json").read_text()) == _report(r)


def test_dualize_twice_and_bidual(run):
    run("construct", "mqg", "groupoid", "pair", 2, "--mu", "1/3,2/3", "-o", "p.json")
    assert run("dualize", "p.json", "-o", "d.json").exit_code == 0
    assert run("verify", "d.json").exit_code == 0
    assert run("dualize", "d.json", "-o", "dd.json").exit_code == 0
    assert run("verify", "dd.json").exit_code == 0
    r = run("bidual", "p.json")
    assert r.exit_code == 0 and _report(r)["summary"]["passed"]


def test_invariants_of_a_group(run):
    run("construct", "mqg", "groupoid", "symmetric", 3, "-o", "s.json")
    r = run("invariants", "s.json")
    assert r.exit_code == 0
    inv = _report(r)["invariants"]
    assert inv["delta_is_one"] and inv["lambda_is_one"]
    assert inv["classification"]["quantum_group"]


def test_invariants_of_a_weighted_pair_groupoid(run):
    run("construct", "mqg", "groupoid", "pair", 2, "--mu", "1/3,2/3", "-o", "p.json")
    inv = _report(run("invariants", "p.json"))["invariants"]
    assert not inv["delta_is_one"]
    assert inv["delta_spectrum"] == pytest.approx([0.5, 1, 1, 2])


def test_compose_products_verify(run):
    run("construct", "mqg", "groupoid", "cyclic", 2, "-o", "a.json")
    run("construct", "mqg", "quantum-space", "1,1", "-o", "b.json")
    assert run("compose", "tensor", "a.json", "b.json", "-o", "t.json").exit_code == 0
    assert run("compose", "sum", "a.json", "b.json", "-o", "s.json").exit_code == 0
    assert run("compose", "commutant", "b.json", "-o", "c.json").exit_code == 0
    for f in ("t.json", "s.json", "c.json"):
        assert run("verify", f).exit_code == 0, f


def test_oversized_requests_are_refused(run):
    r = run("construct", "mqg", "groupoid", "pair", 5)
    assert r.exit_code == 2
    run("construct", "mqg", "groupoid", "pair", 2, "-o", "p.json")
    run("construct", "mqg", "groupoid", "symmetric", 3, "-o", "s.json")
    assert run("compose", "tensor", "p.json", "s.json").exit_code == 2


def test_composite_recipe_matches_compose(run, tmp_path):
    run("construct", "mqg", "groupoid", "cyclic", 2, "-o", "a.json")
    run("construct", "mqg", "pairs", "1,1", "--density", "1/4,3/4", "-o", "b.json")
    doc = {"kind": "composite", "inputs": {"a": {"file": "a.json"}, "b": {"file": "b.json"}},
           "recipe": {"op": "tensor", "args": ["a", {"op": "op", "args": ["b"]}]}}
    (tmp_path / "c.json").write_text(json.dumps(doc))
    assert run("verify", "c.json").exit_code == 0
    run("compose", "op", "b.json", "-o", "bop.json")
    run("compose", "tensor", "a.json", "bop.json", "-o", "direct.json")
    _, x = load_structure("c.json")
    _, y = load_structure("direct.json")
    assert max(structure_gap(x, y).values()) < 1e-10


def test_composite_with_unknown_name_is_an_input_error(run, tmp_path):
    doc = {"kind": "composite", "inputs": {}, "recipe": {"op": "sum", "args": ["missing"]}}
    (tmp_path / "c.json").write_text(json.dumps(doc))
    assert run("verify", "c.json").exit_code == 2
