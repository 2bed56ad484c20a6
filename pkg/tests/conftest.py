import pytest

from pfcorr.measures import ASYMMETRIC, HERMITIAN, build_measure
from pfcorr.skeworth import construct_family, invert_w

CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record():
    def _record(k, ok, detail):
        CRITERIA[k] = (bool(ok), detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    return _record


@pytest.fixture(scope="session")
def gauss():
    return build_measure(HERMITIAN)


@pytest.fixture(scope="session")
def ginibre():
    return build_measure(ASYMMETRIC)


@pytest.fixture(scope="session")
def gauss3(gauss):
    f = construct_family(gauss, 3)
    return gauss, f, invert_w(f)


@pytest.fixture(scope="session")
def ginibre3(ginibre):
    f = construct_family(ginibre, 3)
    return ginibre, f, invert_w(f)
