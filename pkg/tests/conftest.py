import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from boomerang.linalg import Matrix
from boomerang.sln import elementary

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_rational(rng, height=5):
    return Fraction(rng.randint(-height, height), rng.randint(1, height))


def random_unitriangular(rng, n, height=3, upper=True):
    rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if (i < j) if upper else (i > j):
                rows[i][j] = random_rational(rng, height)
    return Matrix(rows)


def random_sl(rng, n, steps=8, height=3):
    """Random element of SL_n(Q) as a product of rational elementary matrices
    and one diagonal factor of determinant 1."""
    g = Matrix.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(1, n + 1), 2)
        k = random_rational(rng, height)
        if k:
            g = g @ elementary(n, i, j, k)
    d = [Fraction(rng.choice([1, 2, 3]), rng.choice([1, 2, 3])) for _ in range(n - 1)]
    last = Fraction(1)
    for x in d:
        last /= x
    return g @ Matrix.diag(d + [last])


def random_sl_int(rng, n, steps=6, k=2):
    g = Matrix.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(1, n + 1), 2)
        g = g @ elementary(n, i, j, rng.choice([x for x in range(-k, k + 1) if x]))
    return g


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, summary, elapsed):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {summary} ({elapsed:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
