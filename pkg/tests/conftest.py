import itertools
import math

import numpy as np
import pytest


def naive_dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def naive_radius(S, centers, z=0):
    """Double loop over plain Python lists, independent of the package."""
    d = sorted((min(naive_dist(s, S[t]) for t in centers) for s in S), reverse=True)
    return d[z]


def naive_opt(S, k, z=0):
    return min(naive_radius(S, T, z) for T in itertools.combinations(range(len(S)), k))


def naive_outliers_cluster(points, weights, k, r, eps_hat):
    """Literal transcription of the greedy procedure with Python loops."""
    m = len(points)
    uncovered = set(range(m))
    centers = []
    while len(centers) < k and uncovered:
        best, best_w = None, -1
        for t in range(m):
            w = sum(weights[v] for v in uncovered if naive_dist(points[v], points[t]) <= (1 + 2 * eps_hat) * r)
            if w > best_w:
                best, best_w = t, w
        centers.append(best)
        uncovered -= {v for v in uncovered if naive_dist(points[v], points[best]) <= (3 + 4 * eps_hat) * r}
    return centers, sorted(uncovered)


@pytest.fixture
def line5():
    return np.array([0.0, 1.0, 2.0, 9.0, 10.0]).reshape(-1, 1)


@pytest.fixture
def line4():
    return np.array([0.0, 1.0, 2.0, 100.0]).reshape(-1, 1)


def uniform_instance(seed, n, d=2):
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(n, d))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
