"""One- and two-pass streaming coresets built on a weighted doubling algorithm.

The doubling state keeps at most ``tau`` weighted centers that are pairwise
more than ``4 * phi`` apart. A new point within ``8 * phi`` of a center is
absorbed by the closest one; otherwise it becomes a center. On overflow
``phi`` doubles and centers closer than ``4 * phi`` are merged, repeatedly,
until the capacity holds again.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import InputError
from .gmm import Coreset, gmm, unit_coreset
from .mapreduce import DEFAULT_EPS_HAT
from .metric import as_dataset, distances_to, pairwise_distances, radius_of_centers
from .outliers import solve_weighted
from .seeding import substream
from .solution import ClusteringSolution

__all__ = [
    "DoublingCoreset",
    "StreamConfig",
    "choose_tau",
    "separated_coreset",
    "shuffled_stream",
    "stream_init",
    "stream_kcenter_no_outliers",
    "stream_solve_outliers",
    "stream_update",
    "two_pass_oblivious",
]

# refuse capacities that could never be allocated
MAX_TAU = 2**40


def choose_tau(k: int, z: int, eps_hat: float, D: float) -> int:
    """Capacity ``ceil((k + z) * (16 / eps_hat) ** D)`` for a doubling dimension ``D``."""
    if not 0 < eps_hat <= 1:
        raise InputError("eps_hat must lie in (0, 1]")
    if D < 0:
        raise InputError("D must be >= 0")
    try:
        val = (k + z) * (16.0 / eps_hat) ** D
    except OverflowError:
        raise InputError("capacity overflows; D or 1/eps_hat too large") from None
    if not math.isfinite(val) or val > MAX_TAU:
        raise InputError(f"capacity {val:.3g} is too large")
    return int(math.ceil(val))


@dataclass(frozen=True)
class StreamConfig:
    k: int
    z: int
    tau: int
    eps_hat: float = DEFAULT_EPS_HAT
    D: float | None = None

    def __post_init__(self):
        if self.k < 1 or self.z < 0:
            raise InputError("need k >= 1 and z >= 0")
        if self.tau < self.k + self.z:
            raise InputError(f"tau={self.tau} must be >= k + z = {self.k + self.z}")

    @classmethod
    def from_doubling_dimension(cls, k: int, z: int, eps_hat: float, D: float) -> "StreamConfig":
        return cls(k, z, choose_tau(k, z, eps_hat, D), eps_hat, D)

    @classmethod
    def from_mu(cls, k: int, z: int, mu: float, eps_hat: float = DEFAULT_EPS_HAT) -> "StreamConfig":
        return cls(k, z, max(k + z, int(math.ceil(mu * (k + z)))), eps_hat)


class DoublingCoreset:
    """Mutable state of the weighted doubling algorithm.

    Centers live in preallocated arrays of capacity ``tau + 1`` (one slot of
    slack for the point that triggers a merge). With ``debug=True`` the
    capacity, separation and weight invariants are asserted after every
    update.
    """

    def __init__(self, tau: int, dim: int, debug: bool = False):
        if tau < 1:
            raise InputError("tau must be >= 1")
        self.tau = tau
        self.debug = debug
        self.points = np.empty((tau + 1, dim))
        self.weights = np.zeros(tau + 1, dtype=np.int64)
        self.origin = np.zeros(tau + 1, dtype=np.intp)
        self.size = 0
        self.phi = 0.0
        self.points_seen = 0
        self.merges = 0
        self.init_rule = "reinforce"

    # -- views ---------------------------------------------------------------
    @property
    def centers(self) -> np.ndarray:
        return self.points[: self.size]

    def coreset(self) -> Coreset:
        n = self.size
        return Coreset(self.points[:n].copy(), self.weights[:n].copy(), self.origin[:n].copy(), self.points_seen)

    # -- construction --------------------------------------------------------
    @classmethod
    def initialize(
        cls, first_points, tau: int, origin=None, debug: bool = False, init_rule: str = "reinforce"
    ) -> "DoublingCoreset":
        """Start from the first ``tau + 1`` points.

        Exact duplicates are folded into their first occurrence before
        ``phi`` is set to half the smallest distance between distinct
        points; if fewer than two distinct points exist ``phi`` stays 0
        until a distinct point shows up.

        ``init_rule="reinforce"`` then merges centers within ``4 * phi`` at
        that ``phi``. The closest pair always merges, so capacity holds and
        ``phi`` stays a lower bound on the optimal tau-center radius.
        ``init_rule="double"`` first runs the overflow rule (doubling
        ``phi``), which can overshoot that bound by up to a factor of 2.
        """
        if init_rule not in ("reinforce", "double"):
            raise InputError(f"unknown init_rule {init_rule!r}")
        P = as_dataset(first_points)
        if P.shape[0] != tau + 1:
            raise InputError(f"initialization needs exactly tau + 1 = {tau + 1} points, got {P.shape[0]}")
        origin = np.arange(P.shape[0]) if origin is None else np.asarray(origin, dtype=np.intp)
        state = cls(tau, P.shape[1], debug)
        state.init_rule = init_rule
        _, first, inverse = np.unique(P, axis=0, return_index=True, return_inverse=True)
        inverse = inverse.ravel()
        keep = np.sort(first)
        slot = {int(j): i for i, j in enumerate(keep)}
        state.size = keep.shape[0]
        state.points[: state.size] = P[keep]
        state.origin[: state.size] = origin[keep]
        for j in range(P.shape[0]):
            state.weights[slot[int(first[inverse[j]])]] += 1
        state.points_seen = P.shape[0]
        if state.size >= 2:
            D = pairwise_distances(state.centers)
            state.phi = float(D[np.triu_indices(state.size, 1)].min()) / 2.0
            if init_rule == "double":
                state._restore_capacity()
            # separation must hold even if no doubling was needed
            state._merge_close()
        state._check()
        return state

    def update(self, s: np.ndarray, origin_index: int = -1) -> tuple[int, float]:
        """Process one point.

        Returns the origin index of the center that absorbed the point and
        the distance to it at absorption time (0 if it became a center).
        """
        self.points_seen += 1
        d = distances_to(self.centers, s)
        j = int(np.argmin(d))
        if d[j] <= 8.0 * self.phi:
            self.weights[j] += 1
            out = (int(self.origin[j]), float(d[j]))
        else:
            n = self.size
            self.points[n] = s
            self.weights[n] = 1
            self.origin[n] = origin_index
            self.size += 1
            out = (origin_index, 0.0)
            if self.size > self.tau:
                if self.phi == 0.0:
                    # deferred initialization: all earlier points were duplicates
                    D = pairwise_distances(self.centers)
                    self.phi = float(D[np.triu_indices(self.size, 1)].min()) / 2.0
                    if self.init_rule == "reinforce":
                        self._merge_close()
                self._restore_capacity()
        self._check()
        return out

    def _restore_capacity(self) -> None:
        while self.size > self.tau:
            self.phi *= 2.0
            self.merges += 1
            self._merge_close()

    def _merge_close(self) -> None:
        """Fold every center within ``4 * phi`` of an earlier surviving center into it."""
        n = self.size
        D = pairwise_distances(self.centers)
        alive = np.ones(n, dtype=bool)
        thresh = 4.0 * self.phi
        for i in range(n):
            if not alive[i]:
                continue
            victims = np.flatnonzero(alive & (D[i] <= thresh))
            victims = victims[victims > i]
            if victims.size:
                self.weights[i] += self.weights[victims].sum()
                alive[victims] = False
        keep = np.flatnonzero(alive)
        m = keep.shape[0]
        self.points[:m] = self.points[keep]
        self.weights[:m] = self.weights[keep]
        self.origin[:m] = self.origin[keep]
        self.weights[m:] = 0
        self.size = m

    def _check(self) -> None:
        if not self.debug:
            return
        assert self.size <= self.tau, "capacity invariant violated"
        assert int(self.weights[: self.size].sum()) == self.points_seen, "weight invariant violated"
        if self.size >= 2:
            D = pairwise_distances(self.centers)
            sep = D[np.triu_indices(self.size, 1)].min()
            assert sep > 4.0 * self.phi, "separation invariant violated"


def stream_init(first_points, tau: int, debug: bool = False, init_rule: str = "reinforce") -> DoublingCoreset:
    return DoublingCoreset.initialize(first_points, tau, debug=debug, init_rule=init_rule)


def stream_update(state: DoublingCoreset, s, origin_index: int = -1) -> DoublingCoreset:
    state.update(np.asarray(s, dtype=np.float64).ravel(), origin_index)
    return state


def shuffled_stream(S, seed: int | None) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(index, point)`` pairs, in a seeded random order unless ``seed`` is None."""
    S = as_dataset(S)
    order = np.arange(S.shape[0]) if seed is None else substream(seed, "shuffle").permutation(S.shape[0])
    for i in order:
        yield int(i), S[i]


def _build(stream: Iterable, tau: int, debug: bool = False, on_absorb=None):
    """Run the doubling algorithm over ``(index, point)`` pairs.

    Returns the state, or ``(None, head)`` if the stream ended within the
    first ``tau + 1`` points, ``head`` being everything seen.
    """
    it = iter(stream)
    head = []
    for item in it:
        head.append(item)
        if len(head) == tau + 1:
            break
    if len(head) <= tau:
        return None, head
    state = DoublingCoreset.initialize(
        np.array([p for _, p in head]), tau, origin=[i for i, _ in head], debug=debug
    )
    if on_absorb is not None:
        for i, _ in head:
            on_absorb(state, i, -1, 0.0)
    for i, p in it:
        center, dist = state.update(p, i)
        if on_absorb is not None:
            on_absorb(state, i, center, dist)
    return state, head


def _head_coreset(head) -> Coreset:
    pts = np.array([p for _, p in head])
    return unit_coreset(pts, origin=[i for i, _ in head])


def stream_solve_outliers(S, config: StreamConfig, seed: int | None = 0, debug: bool = False) -> ClusteringSolution:
    """One pass over a shuffled ``S`` building the doubling coreset, then the
    OutliersCluster radius search on it.

    Pass ``eps_hat = eps / 6`` in the config for a ``(3 + eps)`` target.
    ``seed=None`` streams ``S`` in its stored order. Throughput counts
    only the coreset pass, not data access.
    """
    S = as_dataset(S)
    t0 = time.perf_counter()
    state, head = _build(shuffled_stream(S, seed), config.tau, debug)
    t1 = time.perf_counter()
    T = state.coreset() if state is not None else _head_coreset(head)
    sol = solve_weighted(T, config.k, config.z, config.eps_hat, S=S, algorithm="outliers-stream")
    t2 = time.perf_counter()
    sol.params = {"k": config.k, "z": config.z, "tau": config.tau, "eps_hat": config.eps_hat, "D": config.D}
    sol.seed = seed
    sol.timings = {"stream": t1 - t0, "solve": t2 - t1}
    sol.info.update(
        throughput=S.shape[0] / (t1 - t0) if t1 > t0 else float("inf"),
        phi=state.phi if state is not None else 0.0,
    )
    return sol


def stream_kcenter_no_outliers(S, k: int, tau: int, seed: int | None = 0, debug: bool = False) -> ClusteringSolution:
    """Doubling coreset of capacity ``tau`` followed by farthest-first for ``k`` centers.

    Weights play no role in the final k-center step.
    """
    S = as_dataset(S)
    if tau < k:
        raise InputError(f"tau={tau} must be >= k={k}")
    t0 = time.perf_counter()
    state, head = _build(shuffled_stream(S, seed), tau, debug)
    t1 = time.perf_counter()
    T = state.coreset() if state is not None else _head_coreset(head)
    trace = gmm(T.points, min(k, len(T)), 0)
    idx = T.origin_indices[trace.center_indices]
    t2 = time.perf_counter()
    return ClusteringSolution(
        centers=S[idx],
        center_indices=idx,
        radius=radius_of_centers(S, S[idx], 0).radius,
        z=0,
        algorithm="kcenter-stream",
        params={"k": k, "tau": tau},
        seed=seed,
        timings={"stream": t1 - t0, "solve": t2 - t1},
        info={
            "coreset_size": len(T),
            "phi": state.phi if state is not None else 0.0,
            "throughput": S.shape[0] / (t1 - t0) if t1 > t0 else float("inf"),
        },
    )


def separated_coreset(stream: Iterable, sep: float, dim: int) -> Coreset:
    """Greedy maximal set of points pairwise more than ``sep`` apart.

    Every other point is counted towards its closest kept point.
    """
    cap = 64
    pts = np.empty((cap, dim))
    w = np.zeros(cap, dtype=np.int64)
    origin = np.zeros(cap, dtype=np.intp)
    m = 0
    seen = 0
    for i, p in stream:
        seen += 1
        if m:
            d = distances_to(pts[:m], p)
            j = int(np.argmin(d))
            if d[j] <= sep:
                w[j] += 1
                continue
        if m == cap:
            cap *= 2
            pts = np.resize(pts, (cap, dim))
            w = np.resize(w, cap)
            origin = np.resize(origin, cap)
        pts[m], w[m], origin[m] = p, 1, i
        m += 1
    return Coreset(pts[:m].copy(), w[:m].copy(), origin[:m].copy(), seen)


def two_pass_oblivious(S, k: int, z: int, eps: float, seed: int | None = 0) -> ClusteringSolution:
    """Two passes that need no doubling-dimension estimate.

    Pass 1 runs the doubling algorithm with capacity ``k + z`` and takes
    ``r_hat = 8 * phi``. Pass 2 keeps a maximal set of points pairwise more
    than ``(eps / 48) * r_hat`` apart, weighted by proxy counts. The
    OutliersCluster search then runs with ``eps_hat = eps / 6``.
    """
    S = as_dataset(S)
    if not 0 < eps <= 1:
        raise InputError("eps must lie in (0, 1]")
    if k < 1 or z < 0:
        raise InputError("need k >= 1 and z >= 0")
    t0 = time.perf_counter()
    state, _ = _build(shuffled_stream(S, seed), k + z)
    # a stream that fits in the first k + z + 1 slots is kept whole
    r_hat = 8.0 * state.phi if state is not None else 0.0
    sep = (eps / 48.0) * r_hat
    t1 = time.perf_counter()
    T = separated_coreset(shuffled_stream(S, seed), sep, S.shape[1])
    t2 = time.perf_counter()
    if r_hat == 0.0 and len(T) == 1:
        idx = T.origin_indices[:1]
        sol = ClusteringSolution(S[idx], idx, 0.0, z, "two-pass")
    else:
        sol = solve_weighted(T, k, z, eps / 6.0, S=S, algorithm="two-pass")
    t3 = time.perf_counter()
    sol.params = {"k": k, "z": z, "eps": eps}
    sol.seed = seed
    sol.timings = {"pass1": t1 - t0, "pass2": t2 - t1, "solve": t3 - t2}
    sol.info.update(r_hat=r_hat, separation=sep, coreset_size=len(T))
    return sol
