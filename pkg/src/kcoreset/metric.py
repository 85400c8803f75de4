"""Euclidean metric primitives and the k-center radius functionals.

A dataset is a read-only ``(n, d)`` float64 array. Every distance in the
package is computed through :func:`cross_distances`, so swapping the metric
means touching one function. :class:`ColumnDistances` is the exception: a
faster one-to-many kernel for farthest-first that gives bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError

__all__ = [
    "ColumnDistances",
    "RadiusReport",
    "as_dataset",
    "cross_distances",
    "distance",
    "distances_to",
    "nearest_center_distances",
    "pairwise_distances",
    "radius",
    "radius_of_centers",
    "radius_with_outliers",
]


def as_dataset(points) -> np.ndarray:
    """Validate ``points`` and return them as a read-only ``(n, d)`` float64 array.

    1-d input is read as ``n`` points of dimension 1. Writeable input is
    copied so the caller's array is never frozen.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise InputError(f"expected a 2-d array of points, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InputError("dataset is empty")
    if not np.all(np.isfinite(arr)):
        raise InputError("dataset contains non-finite coordinates")
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


def cross_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between the rows of ``A`` and ``B``."""
    if A.shape[1] != B.shape[1]:
        raise InputError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return cdist(A, B, metric="euclidean")


def distance(a, b) -> float:
    """Euclidean distance between two points."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.ndim != 1:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(cross_distances(a[None, :], b[None, :])[0, 0])


def distances_to(X: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Distances from every row of ``X`` to the single point ``p``."""
    return cross_distances(X, p.reshape(1, -1)).ravel()


class ColumnDistances:
    """Repeated one-to-many Euclidean distances over a fixed dataset.

    Stores the data column-major and accumulates squared coordinate
    differences in dimension order, which reproduces :func:`distances_to`
    exactly while streaming over contiguous memory.
    """

    def __init__(self, X: np.ndarray):
        self.cols = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
        n = self.cols.shape[1]
        self._acc = np.empty(n)
        self._tmp = np.empty(n)

    def to(self, p: np.ndarray) -> np.ndarray:
        """Distances to ``p``; the returned buffer is reused by the next call."""
        acc, tmp = self._acc, self._tmp
        acc.fill(0.0)
        for col, c in zip(self.cols, np.asarray(p, dtype=np.float64).ravel()):
            np.subtract(col, c, out=tmp)
            np.multiply(tmp, tmp, out=tmp)
            acc += tmp
        return np.sqrt(acc, out=acc)


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    return cross_distances(X, X)


def nearest_center_distances(X: np.ndarray, C: np.ndarray, block: int = 4096) -> np.ndarray:
    """``d(x, C)`` for every row ``x`` of ``X``, computed in row blocks to bound memory."""
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], block):
        out[start:start + block] = cross_distances(X[start:start + block], C).min(axis=1)
    return out


@dataclass(frozen=True)
class RadiusReport:
    radius: float
    witness_index: int
    excluded_indices: frozenset = field(default_factory=frozenset)


def _check_centers(S: np.ndarray, T) -> np.ndarray:
    T = np.asarray(list(T) if not isinstance(T, np.ndarray) else T, dtype=np.intp).ravel()
    if T.size == 0:
        raise InputError("center index set is empty")
    if T.min() < 0 or T.max() >= S.shape[0]:
        raise InputError("center index out of range")
    return T


def _report(dists: np.ndarray, z: int) -> RadiusReport:
    if z >= dists.shape[0]:
        raise InputError(f"z={z} must be smaller than |S|={dists.shape[0]}")
    if z < 0:
        raise InputError("z must be nonnegative")
    if z == 0:
        witness = int(np.argmax(dists))
        return RadiusReport(float(dists[witness]), witness, frozenset())
    # descending distance, ascending index on ties
    order = np.lexsort((np.arange(dists.shape[0]), -dists))
    excluded = order[:z]
    witness = int(order[z])
    return RadiusReport(float(dists[witness]), witness, frozenset(int(i) for i in excluded))


def radius(S, T) -> RadiusReport:
    """Radius of ``S`` with respect to the centers indexed by ``T``."""
    S = as_dataset(S)
    T = _check_centers(S, T)
    return _report(nearest_center_distances(S, S[T]), 0)


def radius_with_outliers(S, T, z: int) -> RadiusReport:
    """Radius of ``S`` w.r.t. ``T`` after discarding the ``z`` farthest points.

    Ties among equally distant points are excluded lowest index first.
    """
    S = as_dataset(S)
    T = _check_centers(S, T)
    return _report(nearest_center_distances(S, S[T]), z)


def radius_of_centers(S, centers, z: int = 0) -> RadiusReport:
    """Like :func:`radius_with_outliers` but with centers given as coordinates."""
    S = as_dataset(S)
    C = np.asarray(centers, dtype=np.float64).reshape(-1, S.shape[1])
    if C.shape[0] == 0:
        raise InputError("center set is empty")
    return _report(nearest_center_distances(S, C), z)
