import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def acceptance_report():
    """Call ``report(criterion_id, passed, detail)`` once per acceptance criterion."""

    def report(key: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE[key] = (bool(passed), detail)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        head = key.split()[0]
        return (int(head) if head.isdigit() else 99, key)

    for key in sorted(_ACCEPTANCE, key=order):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
