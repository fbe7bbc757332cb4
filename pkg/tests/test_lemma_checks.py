import json

import pytest

from indefinite_neumann import io, lemma_checks
from indefinite_neumann.errors import PreconditionError, ValidationError
from indefinite_neumann.lemma_checks import LEMMAS, check


@pytest.fixture(scope="module")
def suite(certified_problem, report):
    return lemma_checks.run_suite(certified_problem, report, trials=20, seed=3)


def test_lemma_21_fixed_constants(problem):
    cases = check("2.1", problem, {"kappa1": 0.3, "t1": 0.2, "gamma1": 1.0}, trials=100)
    assert len(cases) == 100 and all(c.passed for c in cases)
    assert {c.params["gamma1"] for c in cases} == {1.0}
    assert all(c.t_from == 0.2 and c.t_to == 0.5 for c in cases)


def test_precondition_names_the_inequality(problem):
    with pytest.raises(PreconditionError, match=r"gamma1 >= kappa1 / \(sigma - t1\)"):
        check("2.1", problem, {"kappa1": 0.3, "t1": 0.2, "gamma1": 0.5}, trials=1)
    with pytest.raises(PreconditionError, match="lambda_star_left"):
        check("2.2", problem, {"kappa0": 0.8, "kappa1": 0.4, "t1": 0.25}, trials=1)


def test_unknown_lemma(problem):
    with pytest.raises(ValidationError):
        check("9.9", problem)


@pytest.mark.parametrize("lemma_id", LEMMAS)
def test_free_constants_pass(certified_problem, lemma_id):
    cases = check(lemma_id, certified_problem, trials=10, seed=11)
    assert all(c.passed for c in cases), [c.detail for c in cases if not c.passed]


@pytest.mark.parametrize("lemma_id", LEMMAS)
def test_trials_are_reproducible(certified_problem, lemma_id):
    a = check(lemma_id, certified_problem, trials=3, seed=5)
    b = check(lemma_id, certified_problem, trials=3, seed=5)
    assert [c.to_dict() for c in a] == [c.to_dict() for c in b]
    c = check(lemma_id, certified_problem, trials=3, seed=6)
    assert [x.start for x in a] != [x.start for x in c]


def test_lemma_26_boundary_state(certified_problem):
    prm = {"kappa2": 0.6, "t2": 0.9, "omega": 4.0, "boundary": True}
    cases = check("2.6", certified_problem, prm, trials=3)
    assert all(c.start == (0.6, 4.0) for c in cases)
    assert all(c.passed for c in cases)


def test_angle_lemma_records_witness(certified_problem, report):
    prm = lemma_checks.suite_params(report)["ang"]
    cases = check("ang", certified_problem, prm, trials=25, seed=2)
    assert all(c.passed for c in cases)
    for c in cases:
        assert -prm["nu"] <= c.witness["min_angle"] <= 0.0
        assert 0.0 < c.start[0] <= c.params["delta_eps"]
        assert c.params["eps"] <= c.params["eps_hat"]


def test_suite_structure(suite):
    assert tuple(suite) == LEMMAS
    summary = lemma_checks.summarize(suite)
    assert all(s == {"trials": 20, "failures": 0} for s in summary.values())
    # both middle-hump branches: second half reseeded
    assert {c.seed for c in suite["2.7"]} == {3, 4}


def test_export_json_and_csv(suite, tmp_path):
    payload = lemma_checks.export_json(suite)
    io.validate(payload, io.LEMMA_VERDICTS_SCHEMA)
    json.dumps(io._plain(payload), allow_nan=False)
    assert [s["name"] for s in payload["testsuites"]] == [f"lemma-{k}" for k in LEMMAS]
    path = tmp_path / "lemma_verdicts.csv"
    lemma_checks.export_csv(suite, path)
    io.validate_artifact(path)
    header, rows = io.read_csv(path)
    assert len(rows) == 7 * 20
    assert {r[3] for r in rows} == {"1"}
