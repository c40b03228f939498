import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from critgen.graphkit import CliqueInstance, Graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def k3():
    return CliqueInstance(Graph.complete(3), 3)


@pytest.fixture
def p3():
    return CliqueInstance(Graph.path(3), 3)


@pytest.fixture
def petersen_triangle():
    return CliqueInstance(Graph.petersen(), 3)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance verdicts at the end of the run, one line each."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
