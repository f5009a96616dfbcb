"""Command-line front end: verbs, exit codes, JSON round trips."""

import json
import subprocess
import sys

import pytest

from logchow.cli import main, parse_moduli_class
from logchow.logstrata import LogElem
from logchow.stablegraphs import StableGraph, delta, enumerate_graphs
from logchow.stratalgebra import StrataElem


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0, out
    return json.loads(out)


D12 = json.dumps({"g": 0, "n": 5, "terms": [{"graph": {"genera": [0, 0], "legs": [0, 0, 1, 1, 1], "edges": [[0, 1]]}}]})
D34 = json.dumps({"g": 0, "n": 5, "terms": [{"graph": {"genera": [0, 0], "legs": [1, 1, 0, 0, 1], "edges": [[0, 1]]},
                                             "f": "l0"}]})


def test_graph_counts(capsys):
    assert run(capsys, "graphs", "0", "5", "--count")[1].strip() == "26"
    assert run_json(capsys, "graphs", "1", "2", "--count")["count"] == 5
    listing = run_json(capsys, "graphs", "1", "2")
    assert [StableGraph.from_json(r["graph"]) for r in listing] == list(enumerate_graphs(1, 2))


def test_global_flags_before_the_verb(capsys):
    code, out, _ = run(capsys, "--json", "graphs", "0", "4", "--count")
    assert code == 0 and json.loads(out)["count"] == 4


def test_stack(capsys):
    data = run_json(capsys, "stack", "0", "5")
    assert data["valid"] and len(data["objects"]) == 26


def test_star(capsys):
    data = run_json(capsys, "star", "--graph", json.dumps(delta(5, {1, 2}).to_json()))
    assert sorted(map(tuple, data["vertex_types"])) == [(0, 3), (0, 4)]


def test_rank(capsys):
    assert run(capsys, "rank", "--n", "5", "--deg", "1")[1].strip() == "5"
    assert run(capsys, "rank", "--n", "6")[1].strip() == "1 16 16 1"


def test_subdivide_then_rank(capsys, tmp_path):
    data = run_json(capsys, "subdivide", "0", "5", "11")
    hist = tmp_path / "h.json"
    hist.write_text(json.dumps(data["history"]))
    assert run(capsys, "rank", "--n", "5", "--deg", "1", "--subdivide", str(hist))[1].strip() == "6"
    again = run_json(capsys, "subdivide", "0", "5", "12", "--subdivide", str(hist))
    assert len(again["history"]) == 2 and again["history"][0] == data["history"][0]


def test_product_round_trip(capsys):
    data = run_json(capsys, "product", D12, D12)
    x = StrataElem.from_json(data)
    assert x == StrataElem.stratum(delta(5, {1, 2})) * StrataElem.stratum(delta(5, {1, 2}))
    assert StrataElem.from_json(run_json(capsys, "product", json.dumps(data), json.dumps(StrataElem.one(0, 5).to_json()))) == x


def test_log_product_and_normalize_round_trip(capsys, tmp_path):
    data = run_json(capsys, "log-product", D12, D34)
    x = LogElem.from_json(data)
    assert x == LogElem.stratum(delta(5, {1, 2})) * LogElem.stratum(delta(5, {3, 4}))
    path = tmp_path / "x.json"
    path.write_text(json.dumps(data))
    assert LogElem.from_json(run_json(capsys, "normalize", str(path))) == x


def test_push_output_is_a_valid_class_input(capsys, tmp_path):
    data = run_json(capsys, "push", D12)
    f = parse_moduli_class(data)
    assert f.value.is_compatible()
    path = tmp_path / "f.json"
    path.write_text(json.dumps(data))
    other = json.dumps({"g": 0, "n": 5, "terms": [{"divisors": [[1, 2]]}]})
    assert run(capsys, "wdvv-check", str(path), "--against", other)[1].strip() == "equal"


def test_pull(capsys):
    cls = json.dumps({"g": 0, "n": 5, "terms": [{"divisors": [[1, 2]]}]})
    data = run_json(capsys, "pull", cls, "--graph", json.dumps(delta(5, {3, 4}).to_json()))
    assert data["f"]["history"] == [] and any(v != "0" for v in data["f"]["values"].values())


def test_wdvv_check(capsys):
    rel = json.dumps({"g": 0, "n": 4, "terms": [{"divisors": [[1, 2]]}, {"divisors": [[1, 3]], "coeff": "-1"}]})
    assert run(capsys, "wdvv-check", rel)[1].strip() == "in WDVV ideal"
    single = json.dumps({"g": 0, "n": 5, "terms": [{"divisors": [[1, 2]]}]})
    assert run_json(capsys, "wdvv-check", single) == {"in_wdvv_ideal": False}


def test_paper_examples(capsys, monkeypatch):
    monkeypatch.setenv("LOGCHOW_THREADS", "1")
    code, out, _ = run(capsys, "paper-examples")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("passed")
    data = run_json(capsys, "paper-examples", "--only", "brion-swap,kernel-witness")
    assert data["passed"] and [r["anchor"] for r in data["results"]] == ["brion-swap", "kernel-witness"]


def test_paper_examples_in_parallel(capsys, monkeypatch):
    monkeypatch.setenv("LOGCHOW_THREADS", "2")
    data = run_json(capsys, "paper-examples", "--only", "brion-swap,barycentric,triple-axis")
    assert data["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["graphs", "0"],
    ["graphs", "zero", "5"],
    ["rank", "--deg", "1"],
    ["normalize", "/nonexistent/file.json"],
    ["subdivide", "0", "5", "11", "--point", "a,b"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_thread_cap_is_a_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("LOGCHOW_THREADS", "many")
    assert run(capsys, "paper-examples", "--only", "brion-swap")[0] == 2


@pytest.mark.parametrize("argv,code", [
    (["graphs", "0", "2"], "Unstable"),
    (["normalize", "{\"g\": 0}"], "ParseError"),
    (["normalize", "{not json"], "ParseError"),
    (["product", D12, json.dumps({"g": 0, "n": 4, "terms": []})], "TypeMismatch"),
    (["log-product", D12, json.dumps({"g": 0, "n": 5, "terms": [{"graph": delta(5, {1, 2}).to_json(), "f": "1"}]})],
     "NotDivisible"),
    (["subdivide", "0", "5", "99"], "UnknownObject"),
    (["paper-examples", "--only", "nope"], "ValueError"),
    (["push", json.dumps({"g": 0, "n": 5, "terms": [{"graph": delta(5, {1, 2}).to_json(),
                                                     "decoration": [{"psi": 2}]}]})], "DecorationNotTrivial"),
])
def test_domain_errors_exit_1_with_json(capsys, argv, code):
    rc, out, _ = run(capsys, *argv)
    assert rc == 1
    assert json.loads(out)["error"] == code


def test_output_is_deterministic(capsys):
    a = run(capsys, "log-product", D12, D34, "--json")[1]
    b = run(capsys, "log-product", D12, D34, "--json")[1]
    assert a == b


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "logchow", "graphs", "1", "1", "--count"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.strip() == "2"
    res = subprocess.run([sys.executable, "-m", "logchow", "graphs"], capture_output=True, text=True, check=False)
    assert res.returncode == 2
