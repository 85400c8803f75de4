"""Farthest-first traversal (GMM) and weighted coreset extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .metric import ColumnDistances, as_dataset

__all__ = [
    "Coreset",
    "FarthestFirst",
    "GmmTrace",
    "WeightedPoint",
    "build_weighted_coreset",
    "gmm",
    "gmm_adaptive",
    "unit_coreset",
]


@dataclass(frozen=True)
class GmmTrace:
    """Result of a farthest-first run.

    ``radii[j]`` is the radius of the dataset with respect to the first
    ``j + 1`` centers. ``assignment[i]`` is the position in
    ``center_indices`` of the selected center closest to point ``i``.
    """

    center_indices: np.ndarray
    radii: np.ndarray
    assignment: np.ndarray

    @property
    def tau(self) -> int:
        return int(self.center_indices.shape[0])

    @property
    def radius(self) -> float:
        return float(self.radii[-1])


class FarthestFirst:
    """Incremental farthest-first traversal over a fixed dataset.

    Keeps, for every point, the distance to the closest selected center and
    that center's selection rank, so each :meth:`step` costs one pass over
    the data. Argmax ties go to the lowest index.
    """

    def __init__(self, X, first_center: int = 0):
        self.X = as_dataset(X)
        n = self.X.shape[0]
        if not 0 <= first_center < n:
            raise InputError(f"first_center {first_center} out of range for {n} points")
        self._dist = ColumnDistances(self.X)
        self._mind = np.full(n, np.inf)
        self._assign = np.zeros(n, dtype=np.intp)
        self.centers: list[int] = []
        self.radii: list[float] = []
        self._add(first_center)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def exhausted(self) -> bool:
        return len(self.centers) == self.n

    def _add(self, idx: int) -> None:
        rank = len(self.centers)
        d = self._dist.to(self.X[idx])
        # strict: on equal distance the earlier center keeps the point
        closer = d < self._mind
        np.minimum(self._mind, d, out=self._mind)
        self._assign[closer] = rank
        self._assign[idx] = rank
        # selected points get a negative key so they are never re-picked
        self._mind[idx] = -1.0
        self.centers.append(idx)
        self.radii.append(max(float(self._mind.max()), 0.0))

    def step(self) -> float:
        """Add the next center and return the new radius."""
        if self.exhausted:
            raise InputError("every point is already a center")
        self._add(int(np.argmax(self._mind)))
        return self.radii[-1]

    def trace(self) -> GmmTrace:
        return GmmTrace(
            center_indices=np.array(self.centers, dtype=np.intp),
            radii=np.array(self.radii),
            assignment=self._assign.copy(),
        )


def gmm(X, tau: int, first_center: int = 0) -> GmmTrace:
    """Run farthest-first traversal for exactly ``tau`` centers."""
    X = as_dataset(X)
    if not 1 <= tau <= X.shape[0]:
        raise InputError(f"tau={tau} must lie in [1, {X.shape[0]}]")
    ff = FarthestFirst(X, first_center)
    while len(ff.centers) < tau:
        ff.step()
    return ff.trace()


def gmm_adaptive(X, base: int, eps_hat: float, first_center: int = 0) -> GmmTrace:
    """Farthest-first traversal with the adaptive stopping rule.

    Selects at least ``base`` centers, then keeps going until the radius
    drops to ``eps_hat / 2`` times the radius reached at ``base`` centers.
    If the data runs out first, every point ends up a center (radius 0).

    Parameters
    ----------
    X : array_like
        The points to summarize.
    base : int
        Minimum number of centers (``k``, ``k + z`` or ``k + z'``).
    eps_hat : float
        Precision in ``(0, 1]``.
    first_center : int
        Index of the first selected point.
    """
    X = as_dataset(X)
    if not 1 <= base <= X.shape[0]:
        raise InputError(f"base={base} must lie in [1, {X.shape[0]}]")
    if not 0 < eps_hat <= 1:
        raise InputError(f"eps_hat={eps_hat} must lie in (0, 1]")
    ff = FarthestFirst(X, first_center)
    while len(ff.centers) < base:
        ff.step()
    target = (eps_hat / 2.0) * ff.radii[-1]
    while ff.radii[-1] > target and not ff.exhausted:
        ff.step()
    return ff.trace()


@dataclass(frozen=True)
class WeightedPoint:
    point: np.ndarray
    weight: int
    origin_index: int


@dataclass(frozen=True)
class Coreset:
    """Weighted summary stored column-wise.

    ``points[j]`` stands in for ``weights[j]`` input points;
    ``origin_indices[j]`` is its index in the source dataset.
    """

    points: np.ndarray
    weights: np.ndarray
    origin_indices: np.ndarray
    source_size: int

    def __post_init__(self):
        if self.points.shape[0] != self.weights.shape[0] or self.points.shape[0] != self.origin_indices.shape[0]:
            raise InputError("coreset columns have mismatched lengths")
        if self.points.shape[0] == 0:
            raise InputError("coreset is empty")
        if np.any(self.weights < 1):
            raise InputError("coreset weights must be >= 1")

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @property
    def items(self) -> list[WeightedPoint]:
        return [
            WeightedPoint(p, int(w), int(o))
            for p, w, o in zip(self.points, self.weights, self.origin_indices)
        ]

    @classmethod
    def from_items(cls, items, source_size: int | None = None) -> "Coreset":
        items = list(items)
        if not items:
            raise InputError("coreset is empty")
        pts = np.array([np.atleast_1d(np.asarray(it.point, dtype=np.float64)) for it in items])
        w = np.array([it.weight for it in items], dtype=np.int64)
        o = np.array([it.origin_index for it in items], dtype=np.intp)
        return cls(pts, w, o, int(w.sum()) if source_size is None else source_size)

    @staticmethod
    def concatenate(parts) -> "Coreset":
        parts = list(parts)
        return Coreset(
            np.concatenate([c.points for c in parts]),
            np.concatenate([c.weights for c in parts]),
            np.concatenate([c.origin_indices for c in parts]),
            sum(c.source_size for c in parts),
        )


def build_weighted_coreset(X, trace: GmmTrace, origin=None) -> Coreset:
    """Weight each selected center by the number of points it is closest to.

    ``origin`` maps positions in ``X`` to indices in a larger source dataset
    (defaults to the identity).
    """
    X = as_dataset(X)
    if trace.assignment.shape[0] != X.shape[0]:
        raise InputError("trace was not produced from this dataset")
    weights = np.bincount(trace.assignment, minlength=trace.tau).astype(np.int64)
    idx = trace.center_indices
    origin_idx = idx if origin is None else np.asarray(origin, dtype=np.intp)[idx]
    return Coreset(X[idx], weights, origin_idx, X.shape[0])


def unit_coreset(X, origin=None) -> Coreset:
    """Every point of ``X`` with weight 1."""
    X = as_dataset(X)
    n = X.shape[0]
    origin_idx = np.arange(n, dtype=np.intp) if origin is None else np.asarray(origin, dtype=np.intp)
    return Coreset(X, np.ones(n, dtype=np.int64), origin_idx, n)
