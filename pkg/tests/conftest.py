from pathlib import Path

import pytest

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "relprop" / "scenarios"
GOLD = Path(__file__).resolve().parent / "gold"


@pytest.fixture
def scenario_text():
    def load(name):
        return (SCENARIOS / name).read_text(encoding="utf-8")

    return load


CRITERIA = {
    1: "boundedness fuzz",
    2: "temperature case 2, agree and disagree",
    3: "temperature cases 3.1 and 3.2, decomposition",
    4: "cycles a and b, quiescence",
    5: "makinson triple",
    6: "chain decomposition invariant",
    7: "dominance weights",
    8: "threshold monotonicity and polarity independence",
    9: "determinism and size query",
    10: "alpha-min oracle",
}
_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    failed = call.excinfo is not None and call.when in ("setup", "call")
    if call.when == "call" or failed:
        _outcomes[n] = _outcomes.get(n, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {status}  {CRITERIA.get(n, '')}")
