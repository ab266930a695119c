import numpy as np
import pytest

from navspace.mask_geometry import SegMask

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((name, passed, detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def piecewise_linear_mask(rng: np.random.Generator, size: int = 128, k: int = 16,
                          rounding: str = "round") -> SegMask:
    """Bottom-navigable mask under a random piecewise-linear boundary.

    Breakpoints sit on the columns that ``k`` evenly spread samples land on,
    at integer rows, so the boundary has at most ``k - 1`` segments.
    """
    cols = np.round(np.linspace(0, size - 1, k)).astype(int)
    n_inner = int(rng.integers(1, k - 1))
    inner = np.sort(rng.choice(cols[1:-1], n_inner, replace=False))
    bp = np.r_[0, inner, size - 1]
    rows = rng.integers(size // 16, size - size // 16 + 1, len(bp))
    b = np.interp(np.arange(size), bp, rows)
    b = np.round(b) if rounding == "round" else np.ceil(b)
    return SegMask(np.arange(size)[:, None] >= b[None, :])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
