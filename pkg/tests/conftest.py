import pytest

from perjam.catalog import get_packing
from perjam.packing import detect_contacts

NAMES = ("one_disk_square", "one_disk_triangular", "dodecagon_16")


@pytest.fixture(scope="session")
def frameworks():
    return {name: detect_contacts(get_packing(name)) for name in NAMES}


@pytest.fixture(scope="session")
def square(frameworks):
    return frameworks["one_disk_square"]


@pytest.fixture(scope="session")
def triangular(frameworks):
    return frameworks["one_disk_triangular"]


@pytest.fixture(scope="session")
def dodecagon(frameworks):
    return frameworks["dodecagon_16"]


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def record_criterion(request):
    """Log one acceptance line: ``record_criterion(n, ok, detail)``."""
    log = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        log[number] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE_KEY, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        ok, detail = log[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
