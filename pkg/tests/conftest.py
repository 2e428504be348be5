import pytest

# criterion number -> list of (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def record(n: int, passed: bool, detail: str):
    ACCEPTANCE.setdefault(n, []).append((bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        status = "PASS" if all(p for p, _ in parts) else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {n:2d}: " + "; ".join(d for _, d in parts))
