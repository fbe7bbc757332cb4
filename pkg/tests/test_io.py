import json
import math

import numpy as np
import pytest

from indefinite_neumann import io
from indefinite_neumann.errors import ValidationError

EXAMPLE = {
    "weight": {"horizon": 2.0, "pieces": [
        {"from": 0.0, "to": 0.5, "kind": "constant", "data": 1.75},
        {"from": 0.5, "to": 1.0, "kind": "constant", "data": -1.0},
        {"from": 1.0, "to": 2.0, "kind": "constant", "data": 1.0}]},
    "g": {"kind": "logistic2"},
    "lambda": 25.0,
    "mu": 500.0,
}


def test_problem_round_trip():
    p = io.problem_from_dict(EXAMPLE)
    assert (p.lam, p.mu, p.T) == (25.0, 500.0, 2.0)
    q = io.problem_from_dict(json.loads(io.dumps(io.problem_to_dict(p))))
    t = np.linspace(0, 2, 41)
    assert np.array_equal(q.a(t), p.a(t))
    assert q.g.eval_ext(0.3) == p.g.eval_ext(0.3)


def test_parameter_overrides():
    p = io.problem_from_dict(EXAMPLE, lam=3.0, mu=4.0)
    assert (p.lam, p.mu) == (3.0, 4.0)


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.pop("weight"), "<root>"),
    (lambda d: d.__setitem__("lambda", -1.0), "lambda"),
    (lambda d: d["weight"]["pieces"][0].__setitem__("kind", "spline"), "weight/pieces/0/kind"),
    (lambda d: d["weight"].__setitem__("horizon", 0.0), "weight/horizon"),
    (lambda d: d.__setitem__("g", {"kind": "tanh"}), "g/kind"),
])
def test_schema_errors_name_the_path(mutate, where):
    d = json.loads(json.dumps(EXAMPLE))
    mutate(d)
    with pytest.raises(ValidationError, match=f"at {where}"):
        io.problem_from_dict(d)


def test_dumps_is_deterministic_and_finite():
    obj = {"b": np.float64(0.1), "a": [np.int64(3), (1.0, float("nan"))], "c": np.arange(2.0),
           "d": np.bool_(True)}
    s = io.dumps(obj)
    assert s == io.dumps(dict(reversed(list(obj.items()))))
    back = json.loads(s)
    assert back == {"a": [3, [1.0, None]], "b": 0.1, "c": [0.0, 1.0], "d": True}
    assert s.endswith("\n") and list(back) == ["a", "b", "c", "d"]


def test_fmt_round_trips_floats():
    for v in (0.1, 1 / 3, math.pi * 1e-300, 2.0 ** 60):
        assert float(io.fmt(v)) == v


def test_csv_round_trip_and_validation(tmp_path):
    path = tmp_path / "sweep.csv"
    io.write_csv(path, io.CSV_COLUMNS["sweep.csv"], [(1.0, 2.0, 3), (0.1, 0.2, 0)])
    io.validate_artifact(path)
    header, rows = io.read_csv(path)
    assert header == ["lambda", "mu", "count"]
    assert rows == [["1", "2", "3"], ["0.10000000000000001", "0.20000000000000001", "0"]]
    assert b"\r" not in path.read_bytes()


def test_validate_artifact_rejects(tmp_path):
    bad = tmp_path / "sweep.csv"
    bad.write_text("lambda,mu\n1,2\n")
    with pytest.raises(ValidationError, match="header"):
        io.validate_artifact(bad)
    ragged = tmp_path / "periodic.csv"
    ragged.write_text("solution,t,u,du\n0,1,2\n")
    with pytest.raises(ValidationError, match="row 1"):
        io.validate_artifact(ragged)
    js = tmp_path / "thresholds.json"
    js.write_text("{}")
    with pytest.raises(ValidationError):
        io.validate_artifact(js)
    with pytest.raises(ValidationError, match="no schema"):
        io.validate_artifact(tmp_path / "other.txt")


def test_read_json_errors(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        io.read_json(p)
    with pytest.raises(ValidationError):
        io.read_json(tmp_path / "missing.json")


def test_write_json_validates_before_writing(tmp_path):
    path = tmp_path / "thresholds.json"
    with pytest.raises(ValidationError):
        io.write_json(path, {"mode": "auto"}, io.THRESHOLDS_SCHEMA)
    assert not path.exists()


def test_every_artifact_has_a_schema():
    assert set(io.JSON_SCHEMAS) == {"intersections.json", "thresholds.json",
                                    "lemma_verdicts.json", "radial.json", "periodic.json"}
    assert all(cols for cols in io.CSV_COLUMNS.values())
