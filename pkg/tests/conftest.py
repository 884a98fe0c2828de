import pytest

from egg_cascade.channel import CascadeChannel, EggLayer

# Illustrative layers; none are fitted values for a particular water body.
L1 = EggLayer(0.2130, 0.3291, 1.4299, 1.1817, 17.1984)
L2 = EggLayer(0.1953, 0.1587, 0.3010, 1.2178, 22.8348)
L3 = EggLayer(0.3, 0.5, 1.2, 0.8, 2.0)
LA = EggLayer(0.25, 0.6, 0.5, 1.1, 1.2)
LB = EggLayer(0.0, 1.0, 2.0, 0.7, 1.4)
LC = EggLayer(0.4, 0.4, 0.8, 1.3, 1.0)


@pytest.fixture
def two_layer():
    return CascadeChannel([L1, L3], r=1, mu_r=10.0)


@pytest.fixture
def three_layer():
    return CascadeChannel([L3, LA, LC], r=2, mu_r=100.0)


# -- acceptance report --------------------------------------------------

_ACCEPTANCE = {}


def record(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    _ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
