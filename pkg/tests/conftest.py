from pathlib import Path

import pytest

from scmci import fixtures, kernels
from scmci.protocol import Deployment

DATA = Path(__file__).parent / "data"


def load_vectors() -> dict[str, str]:
    out = {}
    for line in (DATA / "golden_vectors.txt").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


@pytest.fixture(scope="session", autouse=True)
def _compiled():
    kernels.warmup()


@pytest.fixture(scope="session")
def vectors():
    return load_vectors()


@pytest.fixture(scope="session")
def deployment():
    """Seed-42 deployment. Tests that abort handshakes must build their own."""
    return Deployment(42)


@pytest.fixture
def order():
    return fixtures.purchase(0)


@pytest.fixture
def session(deployment):
    s = deployment.session()
    s.run_setup()
    return s


# acceptance summary: one PASS/FAIL line per criterion at the end of the run

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.failed and rep.when == "call":
        detail = (detail + "; " if detail else "") + str(call.excinfo.value).splitlines()[0][:160]
    _CRITERIA[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        terminalreporter.write_line(f"AC{number} {status}: {title}" + (f" ({detail})" if detail else ""))
