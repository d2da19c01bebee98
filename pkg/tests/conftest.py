import contextlib
import random

import pytest
from hypothesis import HealthCheck, settings

from zeroext.corpus import named_metrics

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Context manager recording a numbered acceptance criterion as PASS/FAIL."""
    table = request.config.stash[_CRITERIA]

    @contextlib.contextmanager
    def record(number, title):
        try:
            yield
        except BaseException:
            table[number] = (title, "FAIL")
            print(f"criterion {number}: FAIL - {title}")
            raise
        table[number] = (title, "PASS")
        print(f"criterion {number}: PASS - {title}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_CRITERIA, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        title, verdict = table[number]
        terminalreporter.write_line(f"criterion {number}: {verdict} - {title}")


@pytest.fixture(scope="session")
def metrics():
    return named_metrics()


@pytest.fixture
def rng():
    return random.Random(20240917)
