import pytest

from schottky_zeta.cycle import build_orbit_table
from schottky_zeta.surfaces import SymmetricFunnels, ThreeFunnel, build_bowen_series, build_flow_adapted


@pytest.fixture(scope="session")
def x3_7():
    return build_flow_adapted(SymmetricFunnels(3, 0.5930))


@pytest.fixture(scope="session")
def x3_12():
    return build_flow_adapted(SymmetricFunnels(3, 0.1723))


@pytest.fixture(scope="session")
def x3_9():
    return build_flow_adapted(SymmetricFunnels(3, 0.3631))


@pytest.fixture(scope="session")
def x4():
    return build_flow_adapted(SymmetricFunnels(4, 0.1010))


@pytest.fixture(scope="session")
def bs777():
    return build_bowen_series(ThreeFunnel(7, 7, 7.01))


@pytest.fixture(scope="session")
def table_7(x3_7):
    return build_orbit_table(x3_7, "full", 8)


@pytest.fixture(scope="session")
def table_7_trivial(x3_7):
    return build_orbit_table(x3_7, "trivial", 12)


@pytest.fixture(scope="session")
def table_12(x3_12):
    return build_orbit_table(x3_12, "full", 8)


@pytest.fixture(scope="session")
def table_9(x3_9):
    return build_orbit_table(x3_9, "full", 6)


@pytest.fixture
def record(request):
    """Acceptance bookkeeping: record("A1", ok, detail); lines printed at session end."""
    store = request.config.__dict__.setdefault("_acceptance", {})

    def _record(key, ok, detail=""):
        prev = store.get(key)
        if prev is None:
            store[key] = [bool(ok), [detail] if detail else []]
        else:
            prev[0] = prev[0] and bool(ok)
            if detail:
                prev[1].append(detail)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = getattr(config, "_acceptance", None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(store, key=lambda k: int(k[1:])):
        ok, details = store[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {'; '.join(details)}")
