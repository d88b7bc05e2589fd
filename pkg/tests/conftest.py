import numpy as np
import pytest

from avpoly import EmpiricalPointSet
from avpoly.monomials import parse_term

THREE_PTS = [[1, 1], [3, 2], [5.1, 3]]
FIVE_PTS = [[1, 6], [2, 3], [2.449, 2.449], [3, 2], [6, 1]]
SQUARE_PTS = [[1.1, 1.1], [0.9, -1.1], [-0.9, 0.9], [-1.1, -0.9]]


def T(text, n=2):
    return parse_term(text, n)


def terms(*texts, n=2):
    return [parse_term(t, n) for t in texts]


def as_dict(g):
    """``{"x^2": 1.0, ...}`` for comparing against printed polynomials."""
    return {str(t): float(c) for t, c in zip(g.support, g.coefficients)}


def assert_poly(g, expected, atol):
    got = as_dict(g)
    for k, v in expected.items():
        assert abs(got.get(k, 0.0) - v) <= atol, (k, got.get(k), v)
    for k, v in got.items():
        if k not in expected:
            assert abs(v) <= atol, (k, v)


def circle_points(seed=0, m=20, noise=1e-4):
    ang = 2 * np.pi * (np.arange(m) + 0.5) / m
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    rng = np.random.default_rng(seed)
    # strictly inside (-noise, noise)
    return pts + rng.uniform(-1, 1, size=pts.shape) * noise * 0.999


@pytest.fixture
def three_pts():
    return EmpiricalPointSet(THREE_PTS, [0.15, 0])


@pytest.fixture
def five_pts():
    return EmpiricalPointSet(FIVE_PTS, 0.018)


@pytest.fixture
def square_pts():
    return EmpiricalPointSet(SQUARE_PTS, 0.12)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def record(number, title, ok, detail=""):
    ACCEPTANCE[number] = (title, bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        line = f"criterion {k:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
