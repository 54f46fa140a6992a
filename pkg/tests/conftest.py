import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def record(request):
    """Attach a one-line detail to the acceptance summary for this test."""

    def _record(detail: str) -> None:
        request.node.user_properties.append(("detail", detail))

    return _record


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    detail = "; ".join(v for k, v in report.user_properties if k == "detail")
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE.append((name, "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
