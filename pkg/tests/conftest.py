import time

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

_REPORT: list[str] = []


class Criterion:
    """Collects the checks of one acceptance criterion and reports one line."""

    def __init__(self, label: str, budget_s: float):
        self.label, self.budget_s = label, budget_s
        self.checks: list[tuple[str, bool]] = []
        self.start = time.perf_counter()

    def check(self, what: str, ok) -> bool:
        self.checks.append((what, bool(ok)))
        return bool(ok)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def finish(self) -> bool:
        self.check(f"runtime {self.elapsed:.1f}s < {self.budget_s:g}s", self.elapsed < self.budget_s)
        ok = all(passed for _, passed in self.checks)
        details = "; ".join(f"{w}{'' if p else ' [FAILED]'}" for w, p in self.checks)
        line = f"{'PASS' if ok else 'FAIL'}  {self.label}: {details}"
        _REPORT.append(line)
        print(line)
        return ok


@pytest.fixture
def criterion():
    made = []

    def make(label, budget_s):
        c = Criterion(label, budget_s)
        made.append(c)
        return c

    return make


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
