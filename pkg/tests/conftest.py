import re

import pytest

# criterion number -> (title, passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}
COLLECTED: set = set()


@pytest.fixture
def record():
    def _record(number: int, title: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (title, bool(passed), detail)
        print(format_line(number, title, passed, detail))
        return bool(passed)
    return _record


def format_line(number, title, passed, detail):
    return f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"


def pytest_collection_finish(session):
    # runs after -k / -m deselection
    for item in session.items:
        m = re.match(r"test_criterion_(\d+)", item.name)
        if m:
            COLLECTED.add(int(m.group(1)))


def pytest_terminal_summary(terminalreporter):
    if not COLLECTED:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(COLLECTED):
        if n in ACCEPTANCE:
            tr.write_line(format_line(n, *ACCEPTANCE[n]))
        else:
            tr.write_line(f"criterion {n:2d} FAIL  (no result recorded: the test errored)")
