import os

import pytest
from hypothesis import HealthCheck, settings

from metric_repair import check_consistency, instance_from_dict, nurse_instance, pid_instance

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def consistent(inst, assignment, points=None) -> bool:
    pts = inst.metric.points if points is None else points
    return not check_consistency(inst.db.apply(assignment), inst.constraint, pts)


@pytest.fixture
def pid_discrete():
    return instance_from_dict(pid_instance("discrete"))


@pytest.fixture
def pid_hamming():
    return instance_from_dict(pid_instance("hamming"))


@pytest.fixture(params=["discrete", "hamming"])
def nurse(request):
    return instance_from_dict(nurse_instance(request.param))
