import contextlib
import time

import pytest

_ACCEPTANCE: dict[str, tuple[str, str, float]] = {}


@contextlib.contextmanager
def _record(key, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        _ACCEPTANCE[key] = ("FAIL", title, time.perf_counter() - t0)
        print(f"ACCEPTANCE {key}: FAIL {title}")
        raise
    _ACCEPTANCE[key] = ("PASS", title, time.perf_counter() - t0)
    print(f"ACCEPTANCE {key}: PASS {title}")


@pytest.fixture
def criterion():
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        verdict, title, seconds = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{verdict} criterion {key}: {title} ({seconds:.1f} s)")
