import pytest

from mdimshift.construction import Construction, ConstructionConfig

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def con_z():
    """The default run on Z at the deepest plannable depth."""
    return Construction.plan(ConstructionConfig(group="Z", depth=3))


@pytest.fixture(scope="session")
def con_z2():
    return Construction.plan(ConstructionConfig(group="Z2", depth=2))


@pytest.fixture(scope="session")
def con_small():
    """Non-conforming profile (3-point net) whose x_{2,1} fits in memory."""
    return Construction.plan(ConstructionConfig(group="Z", depth=2, net_profile="restricted"))


@pytest.fixture
def record():
    def add(criterion, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
