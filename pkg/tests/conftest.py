import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LINES: dict[int, str] = {}


class _Record:
    def __init__(self):
        self.ok = False
        self.detail = ""
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start


@pytest.fixture
def criterion():
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    @contextmanager
    def run(number: int, budget: float):
        rec = _Record()
        try:
            yield rec
        except Exception as exc:
            rec.ok, rec.detail = False, f"{type(exc).__name__}: {exc}"
            raise
        finally:
            within = rec.elapsed <= budget
            ok = rec.ok and within
            line = (f"criterion {number}: {'PASS' if ok else 'FAIL'} "
                    f"[{rec.elapsed:.1f}s of {budget:.0f}s] {rec.detail}")
            _LINES[number] = line
            print(line)
        assert within, f"criterion {number} exceeded its {budget}s budget ({rec.elapsed:.1f}s)"
        assert rec.ok, rec.detail
    return run


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
