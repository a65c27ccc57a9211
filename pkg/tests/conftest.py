import time
from contextlib import contextmanager
from pathlib import Path

import mstream

PROGRAMS = Path(mstream.__file__).parent / "programs"

CRITERIA: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str, limit: float):
    """Time a block, record a one-line verdict and fail if it is too slow."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as e:
        elapsed = time.perf_counter() - start
        CRITERIA[number] = f"criterion {number}: FAIL  {title} ({elapsed:.2f} s) {type(e).__name__}: {e}"
        print(CRITERIA[number])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < limit
    verdict = "PASS" if ok else "FAIL"
    CRITERIA[number] = f"criterion {number}: {verdict}  {title} ({elapsed:.2f} s, limit {limit:g} s)"
    print(CRITERIA[number])
    assert ok, f"took {elapsed:.2f} s, limit {limit} s"


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
