import pytest

from henon.nonlinearity import NonlinearitySpec
from henon.radial_ode import ProblemSpec, shoot_ground_state

# one line per acceptance criterion, filled by test_acceptance.py
CRITERIA: dict[int, str] = {}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path_factory, monkeypatch):
    monkeypatch.setenv("HENON_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "cache"))


@pytest.fixture(scope="session")
def cubic():
    return NonlinearitySpec.parse("pow:p=3")


@pytest.fixture(scope="session")
def profile_3_0(cubic):
    return shoot_ground_state(ProblemSpec(3, 0.0, cubic))


@pytest.fixture(scope="session")
def profile_3_1(cubic):
    return shoot_ground_state(ProblemSpec(3, 1.0, cubic))


@pytest.fixture(scope="session")
def profile_3_2(cubic):
    return shoot_ground_state(ProblemSpec(3, 2.0, cubic))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
