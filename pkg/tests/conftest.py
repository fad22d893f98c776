import pytest
from hypothesis import HealthCheck, settings

from delasp import textio

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

FLUENTS = ("d", "l", "r", "s", "v")


@pytest.fixture(scope="session")
def pink():
    return textio.load_program("pink.elp")


@pytest.fixture(scope="session")
def pink_try():
    return textio.load_program("pink-try.elp")


@pytest.fixture(scope="session")
def models():
    names = ["m0", "m0prime", "m1", "m2", "m2prime", "m3", "m4"]
    return {n: textio.load_model(f"{n}.em") for n in names}


@pytest.fixture(scope="session")
def events():
    names = ["flick", "flick2", "move", "take_left", "take_right"]
    return {n: textio.load_event_model(f"{n}.ev") for n in names}


# acceptance lines are collected here and printed once at the end of the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
