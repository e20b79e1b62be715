import pytest

# criterion number -> (passed, detail); filled by the acceptance tests
CRITERIA = {}


@pytest.fixture
def record():
    def _record(number, passed, detail):
        CRITERIA[number] = (bool(passed), detail)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
