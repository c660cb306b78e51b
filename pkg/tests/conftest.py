import logging
import os
import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_wake_logs(caplog):
    caplog.set_level(logging.ERROR, logger="wake")
    yield


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; printed in the terminal summary."""

    def _report(tag, ok, detail):
        status = "SKIP" if ok is None else ("PASS" if bool(ok) else "FAIL")
        ACCEPTANCE_LINES.append(f"[{tag}] {status}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(re.search(r"\d+", l).group())):
            terminalreporter.write_line(line)
