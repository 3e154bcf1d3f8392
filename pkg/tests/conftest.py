import numpy as np
import pytest

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def report(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{name}={'ok' if passed else 'FAIL'}" for name, passed in checks)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
