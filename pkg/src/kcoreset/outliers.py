"""Weighted k-center with outliers on a coreset: OutliersCluster and its radius search."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError
from .gmm import Coreset
from .metric import nearest_center_distances, pairwise_distances, radius_of_centers
from .solution import ClusteringSolution

__all__ = [
    "CandidateSource",
    "OutliersClusterResult",
    "Prober",
    "RadiusSearchResult",
    "find_min_radius",
    "outliers_cluster",
    "solve_weighted",
    "weighted_radius_with_outliers",
]

# cells per row block when sorting the distance matrix (~64 MB of float64)
_BLOCK_CELLS = 8_000_000


@dataclass(frozen=True)
class OutliersClusterResult:
    """``centers`` and ``uncovered`` are positions into the coreset."""

    centers: np.ndarray
    uncovered: np.ndarray
    uncovered_weight: int


class CandidateSource(str, Enum):
    EXACT_PAIRWISE = "exact_pairwise"
    GEOMETRIC_REFINED = "geometric_refined"


@dataclass(frozen=True)
class RadiusSearchResult:
    r_tilde: float
    solution: OutliersClusterResult
    probes: int
    candidate_source: CandidateSource


class Prober:
    """Runs OutliersCluster repeatedly on one coreset.

    Every row of the coreset's distance matrix is sorted once, so a probe
    finds each ball by binary search and each point's initial ball weight
    from a prefix sum. Per probe the work is O(m log m) plus the size of
    the small balls around the points that get covered.
    """

    def __init__(self, T: Coreset):
        self.T = T
        D = pairwise_distances(T.points)
        m = D.shape[0]
        self.m = m
        self._cands = _candidates(D)
        self.order = np.empty((m, m), dtype=np.int32 if m < 2**31 else np.int64)
        step = max(1, _BLOCK_CELLS // m)
        for start in range(0, m, step):
            blk = slice(start, start + step)
            o = np.argsort(D[blk], axis=1)
            self.order[blk] = o
            D[blk] = np.take_along_axis(D[blk], o, axis=1)
        # row t holds the distances from t in increasing order
        self.sorted = D
        self.w = T.weights.astype(np.float64)
        self._unit = bool(np.all(T.weights == 1))
        if not self._unit:
            # prefix[t, j] = weight of the j points closest to t
            self.prefix = np.zeros((m, m + 1))
            for start in range(0, m, step):
                blk = slice(start, start + step)
                np.cumsum(self.w[self.order[blk]], axis=1, out=self.prefix[blk, 1:])
        self.probes = 0

    def _counts(self, thresh: float) -> np.ndarray:
        """Per row, how many distances are ``<= thresh`` (vectorized bisection)."""
        m = self.m
        rows = np.arange(m)
        lo = np.zeros(m, dtype=np.int64)
        hi = np.full(m, m, dtype=np.int64)
        while True:
            active = lo < hi
            if not active.any():
                return lo
            mid = (lo + hi) // 2
            ok = self.sorted[rows, np.minimum(mid, m - 1)] <= thresh
            lo = np.where(active & ok, mid + 1, lo)
            hi = np.where(active & ~ok, mid, hi)

    def _ball_weight(self, rows: np.ndarray, counts: np.ndarray) -> np.ndarray:
        """For every coreset point ``t``, the weight of the ``rows`` points whose ball holds ``t``."""
        lens = counts[rows]
        if not lens.any():
            return np.zeros(self.m)
        targets = np.concatenate([self.order[v, :c] for v, c in zip(rows.tolist(), lens.tolist())])
        if self._unit:
            return np.bincount(targets, minlength=self.m).astype(np.float64)
        return np.bincount(targets, weights=np.repeat(self.w[rows], lens), minlength=self.m)

    def run(self, k: int, r: float, eps_hat: float) -> OutliersClusterResult:
        self.probes += 1
        m = self.m
        small = self._counts((1.0 + 2.0 * eps_hat) * r)
        large = self._counts((3.0 + 4.0 * eps_hat) * r)
        uncovered = np.ones(m, dtype=bool)
        # cover[t] = uncovered weight inside the small ball around t, kept up to date;
        # distances are symmetric, so t's own row gives its initial value
        if self._unit:
            cover = small.astype(np.float64)
        else:
            cover = self.prefix[np.arange(m), small]
        centers: list[int] = []
        while len(centers) < k and uncovered.any():
            x = int(np.argmax(cover))
            centers.append(x)
            ball = self.order[x, : large[x]]
            removed = ball[uncovered[ball]]
            uncovered[removed] = False
            if len(centers) < k and uncovered.any():
                cover -= self._ball_weight(removed, small)
        left = np.flatnonzero(uncovered)
        return OutliersClusterResult(
            centers=np.array(centers, dtype=np.intp),
            uncovered=left,
            uncovered_weight=int(self.T.weights[left].sum()),
        )

    def candidates(self) -> np.ndarray:
        """``{0}`` and every pairwise distance, sorted and deduplicated."""
        return self._cands


def _candidates(D: np.ndarray) -> np.ndarray:
    m = D.shape[0]
    vals = np.empty(m * (m - 1) // 2 + 1)
    vals[0] = 0.0
    pos = 1
    for i in range(m - 1):
        row = D[i, i + 1:]
        vals[pos:pos + row.shape[0]] = row
        pos += row.shape[0]
    vals.sort()
    keep = np.empty(vals.shape[0], dtype=bool)
    keep[0] = True
    np.not_equal(vals[1:], vals[:-1], out=keep[1:])
    return vals[keep]


def _check(T: Coreset, k: int, eps_hat: float) -> None:
    if k < 1:
        raise InputError("k must be >= 1")
    if eps_hat < 0:
        raise InputError("eps_hat must be >= 0")


def outliers_cluster(T: Coreset, k: int, r: float, eps_hat: float) -> OutliersClusterResult:
    """One run of the greedy weighted OutliersCluster procedure at radius ``r``.

    Each round picks the coreset point whose ``(1 + 2*eps_hat) * r`` ball holds
    the most uncovered weight (ties to the lower position; the point itself
    need not be uncovered), then marks everything within ``(3 + 4*eps_hat) * r``
    of it as covered. Stops after ``k`` centers or when nothing is left.
    """
    _check(T, k, eps_hat)
    if r < 0:
        raise InputError("r must be >= 0")
    return Prober(T).run(k, r, eps_hat)


def find_min_radius(T: Coreset, k: int, z: int, eps_hat: float, prober: Prober | None = None) -> RadiusSearchResult:
    """Estimate the smallest radius at which OutliersCluster leaves at most ``z`` weight uncovered.

    Binary search over the exact candidate set ``{0} U {pairwise distances}``,
    then a downward geometric search with step ``1 + delta``,
    ``delta = eps_hat / (3 + 4 eps_hat)``, as long as feasibility holds.
    The returned radius is always one at which a probe was feasible.
    """
    _check(T, k, eps_hat)
    if z < 0:
        raise InputError("z must be >= 0")
    prober = prober or Prober(T)
    cands = prober.candidates()
    cache: dict[int, OutliersClusterResult] = {}

    def probe(i: int) -> OutliersClusterResult:
        if i not in cache:
            cache[i] = prober.run(k, float(cands[i]), eps_hat)
        return cache[i]

    hi = cands.shape[0] - 1
    if probe(hi).uncovered_weight > z:
        raise AssertionError("largest candidate radius is infeasible; OutliersCluster invariant broken")
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if probe(mid).uncovered_weight <= z:
            hi = mid
        else:
            lo = mid + 1
    best = probe(hi)
    r_tilde = float(cands[hi])
    source = CandidateSource.EXACT_PAIRWISE

    if eps_hat > 0 and r_tilde > 0:
        step = 1.0 + eps_hat / (3.0 + 4.0 * eps_hat)
        # bounded so a pathological non-monotone instance cannot spin forever
        for _ in range(10_000):
            r_next = r_tilde / step
            res = prober.run(k, r_next, eps_hat)
            if res.uncovered_weight > z:
                break
            r_tilde, best = r_next, res
            source = CandidateSource.GEOMETRIC_REFINED

    assert best.uncovered_weight <= z
    return RadiusSearchResult(r_tilde, best, prober.probes, source)


def weighted_radius_with_outliers(T: Coreset, center_points: np.ndarray, z: int) -> float:
    """Radius of the multiset represented by ``T`` after discarding ``z`` units of weight.

    Points are discarded farthest first; a point survives if any of its
    weight survives.
    """
    d = nearest_center_distances(T.points, center_points)
    order = np.argsort(-d, kind="stable")
    cum = np.cumsum(T.weights[order])
    first_kept = int(np.searchsorted(cum, z, side="right"))
    if first_kept >= order.shape[0]:
        return 0.0
    return float(d[order[first_kept]])


def solve_weighted(T: Coreset, k: int, z: int, eps_hat: float, S: np.ndarray | None = None, algorithm: str = "weighted"):
    """Run the radius search on ``T`` and package the centers it picks.

    The reported radius is measured on ``S`` when given (with ``z`` outliers),
    otherwise on the weighted coreset itself.
    """
    search = find_min_radius(T, k, z, eps_hat)
    pos = search.solution.centers
    centers = T.points[pos]
    if S is not None:
        rad = radius_of_centers(S, centers, z).radius
    else:
        rad = weighted_radius_with_outliers(T, centers, z)
    return ClusteringSolution(
        centers=centers,
        center_indices=T.origin_indices[pos],
        radius=rad,
        z=z,
        algorithm=algorithm,
        params={"k": k, "z": z, "eps_hat": eps_hat},
        info={
            "r_tilde": search.r_tilde,
            "probes": search.probes,
            "candidate_source": search.candidate_source.value,
            "coreset_size": len(T),
            "uncovered_weight": search.solution.uncovered_weight,
        },
    )
