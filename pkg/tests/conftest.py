import json
import os

import pytest

try:
    from hypothesis import settings

    settings.register_profile("suite", max_examples=50, deadline=None,
                              derandomize=True)
    settings.load_profile("suite")
except ImportError:  # pragma: no cover - hypothesis is a test dependency
    pass

FIXTURE_PATH = os.path.join(os.path.dirname(__file__), "fixtures",
                            "dense_oracle.json")

# one pass/fail line per acceptance criterion, shown in the terminal summary
_criterion_lines = []


def record_criterion(number: int, description: str, passed: bool,
                     detail: str = "") -> bool:
    word = "PASS" if passed else "FAIL"
    line = f"[{word}] criterion {number:2d}: {description}"
    if detail:
        line += f" -- {detail}"
    _criterion_lines.append((number, line))
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_criterion_lines):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def oracle_fixtures():
    with open(FIXTURE_PATH) as fh:
        data = json.load(fh)
    return data["entries"]
