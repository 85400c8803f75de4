"""Exact optima for small instances and the sequential baselines.

The enumeration oracles restrict centers to input points and refuse to run
when ``C(n, k)`` exceeds the budget instead of sampling.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from .errors import BudgetExceeded, InputError
from .gmm import unit_coreset
from .mapreduce import DEFAULT_EPS_HAT, kcenter_outliers_mr_det
from .metric import as_dataset, pairwise_distances
from .outliers import solve_weighted
from .solution import ClusteringSolution

__all__ = [
    "DEFAULT_BUDGET",
    "OracleResult",
    "brute_force_kcenter",
    "brute_force_kcenter_outliers",
    "charikar_baseline",
    "cover_search_kcenter_outliers",
    "sequential_coreset",
]

DEFAULT_BUDGET = 10**7

# center sets scored per vectorized batch
_BATCH = 4096


@dataclass(frozen=True)
class OracleResult:
    opt_radius: float
    opt_centers: tuple[int, ...]
    enumerated: int


def _enumerate(S, k: int, z: int, budget: int) -> OracleResult:
    S = as_dataset(S)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"k={k} must lie in [1, {n}]")
    if not 0 <= z < n:
        raise InputError(f"z={z} must lie in [0, {n - 1}]")
    total = math.comb(n, k)
    if total > budget:
        raise BudgetExceeded(f"C({n}, {k}) = {total} exceeds the enumeration budget {budget}")
    D = pairwise_distances(S)
    best = math.inf
    best_set: tuple[int, ...] = ()
    it = combinations(range(n), k)
    done = 0
    while done < total:
        chunk = np.array(list(islice(it, _BATCH)), dtype=np.intp).reshape(-1, k)
        done += chunk.shape[0]
        # (batch, n): each point's distance to its nearest center in the set
        near = D[chunk].min(axis=1)
        if z:
            # the (z+1)-th largest value is the radius after discarding z points
            rad = -np.partition(-near, z, axis=1)[:, z]
        else:
            rad = near.max(axis=1)
        # argmin picks the lexicographically first set among equal radii
        j = int(np.argmin(rad))
        if rad[j] < best:
            best, best_set = float(rad[j]), tuple(int(c) for c in chunk[j])
    return OracleResult(best, best_set, total)


def brute_force_kcenter(S, k: int, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Optimal k-center radius over all k-subsets of ``S``."""
    return _enumerate(S, k, 0, budget)


def brute_force_kcenter_outliers(S, k: int, z: int, budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Optimal radius with ``z`` discarded points over all k-subsets of ``S``."""
    return _enumerate(S, k, z, budget)


def cover_search_kcenter_outliers(S, k: int, z: int = 0) -> float:
    """Second, independent oracle: smallest candidate radius at which some
    ``k`` balls around input points cover at least ``n - z`` points.

    Walks the sorted pairwise distances and answers each coverage question
    with a depth-first search over bitmasks. Only meant for ``n <= 16``.
    """
    S = as_dataset(S)
    n = S.shape[0]
    if n > 16:
        raise InputError("cover search is limited to 16 points")
    D = pairwise_distances(S)
    need = n - z
    for r in np.unique(np.concatenate(([0.0], D.ravel()))):
        masks = [sum(1 << j for j in range(n) if D[i, j] <= r) for i in range(n)]
        if _covers(masks, k, need, 0, 0):
            return float(r)
    raise AssertionError("the largest pairwise distance always covers everything")


def _covers(masks, k, need, start, acc) -> bool:
    if bin(acc).count("1") >= need:
        return True
    if k == 0:
        return False
    return any(_covers(masks, k - 1, need, i + 1, acc | masks[i]) for i in range(start, len(masks)))


def charikar_baseline(S, k: int, z: int) -> ClusteringSolution:
    """Unweighted 3-approximation: the radius search with ``eps_hat = 0`` on all of ``S``."""
    S = as_dataset(S)
    t0 = time.perf_counter()
    sol = solve_weighted(unit_coreset(S), k, z, 0.0, S=S, algorithm="charikar")
    sol.timings = {"total": time.perf_counter() - t0}
    return sol


def sequential_coreset(
    S,
    k: int,
    z: int,
    mu: float | None = None,
    eps_hat: float = DEFAULT_EPS_HAT,
    seed: int = 0,
    random_first: bool = False,
) -> ClusteringSolution:
    """The deterministic two-round algorithm run sequentially (one partition).

    With ``mu`` the coreset holds ``mu * (k + z)`` points; ``mu=1`` is the
    smallest such coreset. Without ``mu`` the adaptive stopping rule
    with ``eps_hat`` decides the size.
    """
    t0 = time.perf_counter()
    rep = kcenter_outliers_mr_det(S, k, z, 1, eps_hat, mu=mu, seed=seed, random_first=random_first)
    sol = rep.solution
    sol.algorithm = "sequential"
    sol.info["coreset_size"] = rep.union_size
    sol.timings["total"] = time.perf_counter() - t0
    return sol
