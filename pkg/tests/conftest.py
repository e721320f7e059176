import functools

import pytest

from structree.fixtures import get_fixture
from structree.graph_core import build_window
from structree.verify import _structure

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def window_of(name: str, radius: int):
    return build_window(get_fixture(name).make_source(), radius)


@functools.lru_cache(maxsize=None)
def structure_of(name: str, radius: int, k: int | None = None):
    """(window, universe, optimal cuts, tree, kappa report, blocks); tree is None without optimal cuts."""
    k = get_fixture(name).k if k is None else k
    w = window_of(name, radius)
    return (w,) + _structure(w, k)


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{status}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
