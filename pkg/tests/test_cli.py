import json

import numpy as np
import pytest

from indefinite_neumann import cli, io
from indefinite_neumann.errors import ValidationError


def _validate_all(out):
    names = sorted(p.name for p in out.iterdir())
    for n in names:
        io.validate_artifact(out / n)
    return names


@pytest.fixture(scope="module")
def example_json(tmp_path_factory):
    path = tmp_path_factory.mktemp("input") / "example.json"
    path.write_text(json.dumps(cli._fixture("example.json")))
    return path


def test_solve(example_json, tmp_path, capsys):
    assert cli.main(["solve", "--input", str(example_json), "--out", str(tmp_path)]) == 0
    assert _validate_all(tmp_path) == ["continua.csv", "intersections.json", "solutions.csv"]
    data = io.read_json(tmp_path / "intersections.json")
    assert len(data["solutions"]) == 4 and data["rejected"] == []
    assert "4 solution(s)" in capsys.readouterr().out


def test_solve_parameter_override(example_json, tmp_path):
    assert cli.main(["solve", "--input", str(example_json), "--out", str(tmp_path),
                     "--lambda", "1", "--mu", "500"]) == 0
    data = io.read_json(tmp_path / "intersections.json")
    assert (data["lambda"], data["mu"], data["solutions"]) == (1.0, 500.0, [])


def test_sweep(example_json, tmp_path):
    assert cli.main(["sweep", "--input", str(example_json), "--out", str(tmp_path),
                     "--grid-lambda", "1:25:2", "--grid-mu", "500:500:1", "--jobs", "2"]) == 0
    _validate_all(tmp_path)
    _, rows = io.read_csv(tmp_path / "sweep.csv")
    assert [(float(a), float(b), int(c)) for a, b, c in rows] == [(1, 500, 0), (25, 500, 4)]


def test_thresholds(tmp_path):
    assert cli.main(["thresholds", "--out", str(tmp_path)]) == 0
    _validate_all(tmp_path)
    rep = io.read_json(tmp_path / "thresholds.json")
    assert rep["feasible"] and rep["lam"] == pytest.approx(1.01 * rep["lambda_star"])


def test_check_lemmas(tmp_path):
    assert cli.main(["check-lemmas", "--out", str(tmp_path), "--trials", "6",
                     "--jobs", "3"]) == 0
    assert _validate_all(tmp_path) == ["lemma_verdicts.csv", "lemma_verdicts.json"]
    suites = io.read_json(tmp_path / "lemma_verdicts.json")["testsuites"]
    assert [s["tests"] for s in suites] == [6] * 7


def test_radial(tmp_path):
    assert cli.main(["radial", "--out", str(tmp_path), "--radial-grid", "200"]) == 0
    names = _validate_all(tmp_path)
    assert {"radial.json", "radial_profile.csv"} <= set(names)
    rep = io.read_json(tmp_path / "radial.json")
    assert rep["T"] == pytest.approx(1.0) and rep["solutions"]


def test_extend_periodic(tmp_path):
    assert cli.main(["extend-periodic", "--out", str(tmp_path), "--periods", "2"]) == 0
    assert _validate_all(tmp_path) == ["periodic.csv", "periodic.json"]
    rep = io.read_json(tmp_path / "periodic.json")
    assert rep["period"] == 4.0 and max(s["residual"] for s in rep["solutions"]) <= 1e-6


def test_reproduce_example_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["reproduce-example", "--out", str(a)]) == 0
    assert cli.main(["reproduce-example", "--out", str(b)]) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["solve"],
    ["solve", "--lambda", "abc"],
    ["sweep", "--grid-lambda", "1:2"],
])
def test_invalid_invocations(argv, tmp_path, example_json):
    if argv[0] == "sweep":
        argv = argv + ["--input", str(example_json)]
    assert cli.main(argv + ["--out", str(tmp_path)]) == 2


def test_bad_input_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"weight": {"horizon": 1.0, "pieces": []}}))
    assert cli.main(["solve", "--input", str(bad), "--out", str(tmp_path)]) == 2
    assert "schema" in capsys.readouterr().err


def test_positive_weight_is_rejected(tmp_path, capsys):
    d = {"weight": {"horizon": 1.0, "pieces": [
        {"from": 0.0, "to": 1.0, "kind": "constant", "data": 1.0}]}}
    path = tmp_path / "pos.json"
    path.write_text(json.dumps(d))
    assert cli.main(["solve", "--input", str(path), "--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_failed_lemmas_exit_numeric(tmp_path, monkeypatch):
    from indefinite_neumann import lemma_checks

    real = lemma_checks.check

    def failing(*args, **kwargs):
        cases = real(*args, **kwargs)
        cases[0].passed = False
        return cases

    monkeypatch.setattr(lemma_checks, "check", failing)
    assert cli.main(["check-lemmas", "--out", str(tmp_path), "--trials", "2"]) == 3


def test_numerical_failure_exit(monkeypatch, tmp_path):
    from indefinite_neumann import shooting
    from indefinite_neumann.errors import NumericalBlowUpError

    def boom(*a, **k):
        raise NumericalBlowUpError("overflow")

    monkeypatch.setattr(shooting, "solve", boom)
    assert cli.main(["reproduce-example", "--out", str(tmp_path)]) == 3


@pytest.mark.parametrize("spec, expected", [("0:1:3", [0, 0.5, 1]), ("2:2:1", [2.0])])
def test_grid_parser(spec, expected):
    assert np.allclose(cli._grid(spec), expected)


@pytest.mark.parametrize("spec", ["0:1", "a:b:3", "0:1:0", "0:1:2.5"])
def test_grid_parser_rejects(spec):
    with pytest.raises(ValidationError):
        cli._grid(spec)


def test_log_level_env(monkeypatch, tmp_path):
    monkeypatch.setenv("SHOOTING_LOG", "debug")
    assert cli.main(["thresholds", "--out", str(tmp_path)]) == 0
