import numpy as np
import pytest

from indefinite_neumann import Nonlinearity, ProblemDef, certify, example_weight, solve

# u(0) of the four positive solutions at lambda=25, mu=500, and their states at
# tau, from an independent scipy DOP853 shooting (rtol 1e-13) plus brentq.
EXAMPLE_ROOTS = [0.014734106364093195, 0.07660861039934722,
                 0.09278410821698338, 0.8956357794156371]
EXAMPLE_P = [(0.02519084, 0.06647323), (0.24473252, 1.98929528),
             (0.24485722, 1.98922592), (0.2486106, 1.98710833)]


@pytest.fixture(scope="session")
def g():
    return Nonlinearity.logistic2()


@pytest.fixture(scope="session")
def weight():
    return example_weight()


@pytest.fixture(scope="session")
def problem(weight, g):
    return ProblemDef(weight, g, 25.0, 500.0)


@pytest.fixture(scope="session")
def example_result(problem):
    return solve(problem)


@pytest.fixture(scope="session")
def report(problem):
    return certify(problem)


@pytest.fixture(scope="session")
def certified_problem(problem, report):
    return problem.with_params(report.lam, 1.01 * report.mu_star)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config._criteria = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_criteria", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def report(n: int, passed: bool, detail: str) -> None:
        line = f"CRITERION {n}: {'PASS' if passed else 'FAIL'} ({detail})"
        print(line)
        request.config._criteria.append(line)

    return report
