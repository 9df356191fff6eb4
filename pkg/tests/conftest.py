import sys
import pytest
from hypothesis import settings

from dgkit.instances import make_point, make_sphere_algebra
from dgkit.sphere import ObjectFunctor
from dgkit.twist import embed

settings.register_profile("dgkit", max_examples=40, deadline=None)
settings.load_profile("dgkit")


@pytest.fixture(scope="session")
def point():
    return make_point()


@pytest.fixture(scope="session")
def sphere2():
    return make_sphere_algebra(2)


@pytest.fixture(scope="session")
def S2(point, sphere2):
    return ObjectFunctor(point, embed(sphere2, "S"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
