import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def full_operator(matrix, targets, d, m):
    """Brute-force d**m x d**m matrix of ``matrix`` on ``targets`` (identity elsewhere)."""
    dim = d**m
    out = np.zeros((dim, dim), dtype=complex)
    for x, digits in enumerate(itertools.product(range(d), repeat=m)):
        col = 0
        for t in targets:
            col = col * d + digits[t]
        for row in range(d ** len(targets)):
            new = list(digits)
            r = row
            for t in reversed(targets):
                new[t] = r % d
                r //= d
            y = 0
            for j in new:
                y = y * d + j
            out[y, x] += matrix[row, col]
    return out


def phase_aligned_distance(a, b):
    """Max-abs distance after removing the global phase between two arrays."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    i = int(np.argmax(np.abs(b)))
    phase = a[i] / b[i]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
