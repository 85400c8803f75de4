"""Two-round coreset pipelines: partition, per-partition coreset, union, sequential solve.

Round 1 tasks are independent jobs over disjoint partitions; round 2 runs once
on the concatenated coresets (always in partition-id order, so results do not
depend on which round-1 task finishes first).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError
from .gmm import Coreset, build_weighted_coreset, gmm, gmm_adaptive
from .metric import as_dataset
from .outliers import solve_weighted
from .seeding import substream
from .solution import ClusteringSolution, score

__all__ = [
    "DEFAULT_EPS_HAT",
    "PartitionPlan",
    "RunReport",
    "kcenter_mr",
    "kcenter_outliers_mr_det",
    "kcenter_outliers_mr_rand",
    "partition",
    "z_prime",
]

# precision used by the round-2 radius search when only a coreset size is given
DEFAULT_EPS_HAT = 0.1


@dataclass(frozen=True)
class PartitionPlan:
    assignments: np.ndarray
    ell: int
    mode: str
    seed: int | None = None

    def parts(self) -> list[np.ndarray]:
        """Input indices of each partition, ascending within a partition."""
        order = np.argsort(self.assignments, kind="stable")
        bounds = np.cumsum(np.bincount(self.assignments, minlength=self.ell))[:-1]
        return np.split(order, bounds)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.ell)


def partition(S, ell: int, mode: str = "chunked", seed: int = 0) -> PartitionPlan:
    """Split the indices of ``S`` into ``ell`` groups.

    ``chunked`` makes contiguous blocks whose sizes differ by at most one;
    ``random`` draws each point's group uniformly and independently.
    """
    n = as_dataset(S).shape[0]
    if not 1 <= ell <= n:
        raise InputError(f"ell={ell} must lie in [1, {n}]")
    if mode == "chunked":
        sizes = np.full(ell, n // ell)
        sizes[: n % ell] += 1
        assign = np.repeat(np.arange(ell), sizes)
        return PartitionPlan(assign, ell, mode, None)
    if mode == "random":
        assign = substream(seed, "partition").integers(0, ell, size=n)
        return PartitionPlan(assign, ell, mode, seed)
    raise InputError(f"unknown partition mode {mode!r}")


@dataclass
class RunReport:
    solution: ClusteringSolution
    coreset_sizes: list[int]
    union_size: int
    peak_local_memory_points: int
    round_times: dict[str, float] = field(default_factory=dict)
    tau_mode: str = "adaptive"
    # input indices of each partition's coreset, in selection order
    coreset_origins: list[np.ndarray] = field(default_factory=list)

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "solution": self.solution.to_dict(timings=timings),
            "coreset_sizes": [int(c) for c in self.coreset_sizes],
            "union_size": int(self.union_size),
            "peak_local_memory_points": int(self.peak_local_memory_points),
            "tau_mode": self.tau_mode,
        }
        if timings:
            out["round_times"] = {k: float(v) for k, v in self.round_times.items()}
        return out


def z_prime(z: int, ell: int, n: int, with_log: bool = True) -> int:
    """Per-partition outlier allowance for random partitioning, rounded up.

    ``with_log=False`` drops the ``log2 n`` term, as done when sizing
    coresets in practice.
    """
    val = 6.0 * (z / ell + (math.log2(n) if with_log else 0.0))
    return int(math.ceil(val))


def _first_centers(plan: PartitionPlan, parts, seed: int, random_first: bool) -> list[int]:
    if not random_first:
        return [0] * len(parts)
    rng = substream(seed, "first-center")
    return [int(rng.integers(0, p.shape[0])) for p in parts]


def _round1(S, plan, build: Callable, seed: int, random_first: bool, workers: int) -> list[Coreset]:
    parts = plan.parts()
    if any(p.shape[0] == 0 for p in parts):
        raise InputError("a partition is empty; lower ell")
    firsts = _first_centers(plan, parts, seed, random_first)

    def task(i: int) -> Coreset:
        idx = parts[i]
        return build(S[idx], idx, firsts[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, range(len(parts))))
    return [task(i) for i in range(len(parts))]


def _gmm_coreset(base: int, eps: float | None, tau: int | None):
    """Round-1 builder: adaptive stopping rule, or a fixed size when ``tau`` is set.

    Partitions smaller than the requested size contribute all their points.
    """

    def build(X, origin, first):
        n = X.shape[0]
        if tau is not None:
            trace = gmm(X, min(tau, n), first)
        else:
            trace = gmm_adaptive(X, min(base, n), eps, first)
        return build_weighted_coreset(X, trace, origin)

    return build


def _resolve_tau(tau, mu, unit: float) -> int | None:
    if tau is not None and mu is not None:
        raise InputError("give either tau or mu, not both")
    if mu is not None:
        if mu <= 0:
            raise InputError("mu must be positive")
        return max(1, int(math.ceil(mu * unit)))
    if tau is not None:
        if tau < 1:
            raise InputError("tau must be >= 1")
        return int(tau)
    return None


def _report(sol, coresets, plan, t1, t2, tau) -> RunReport:
    sizes = [len(c) for c in coresets]
    union = sum(sizes)
    sol.timings.update({"round1": t1, "round2": t2})
    return RunReport(
        solution=sol,
        coreset_sizes=sizes,
        union_size=union,
        peak_local_memory_points=max(int(plan.sizes().max()), union),
        round_times={"round1": t1, "round2": t2},
        tau_mode="adaptive" if tau is None else "fixed",
        coreset_origins=[c.origin_indices for c in coresets],
    )


def kcenter_mr(
    S,
    k: int,
    ell: int = 1,
    eps: float | None = None,
    *,
    tau: int | None = None,
    mu: float | None = None,
    seed: int = 0,
    mode: str = "chunked",
    random_first: bool = False,
    workers: int = 1,
) -> RunReport:
    """Two-round k-center without outliers.

    Round 1 builds a farthest-first coreset per partition, either with the
    adaptive stopping rule driven by ``eps`` or with a fixed size ``tau``
    (``mu`` gives ``tau = mu * k``). Round 2 runs farthest-first for ``k``
    centers on the union.
    """
    S = as_dataset(S)
    n = S.shape[0]
    if not 1 <= k < n:
        raise InputError(f"k={k} must lie in [1, {n - 1}]")
    tau = _resolve_tau(tau, mu, k)
    if tau is None:
        if eps is None:
            raise InputError("one of eps, tau or mu is required")
        if not 0 < eps <= 1:
            raise InputError("eps must lie in (0, 1]")
    plan = partition(S, ell, mode, seed)

    t0 = time.perf_counter()
    coresets = _round1(S, plan, _gmm_coreset(k, eps, tau), seed, random_first, workers)
    t1 = time.perf_counter()
    T = Coreset.concatenate(coresets)
    trace = gmm(T.points, min(k, len(T)), 0)
    idx = T.origin_indices[trace.center_indices]
    t2 = time.perf_counter()

    sol = ClusteringSolution(
        centers=S[idx],
        center_indices=idx,
        radius=score(S, idx, 0),
        z=0,
        algorithm="kcenter-mr",
        params={"k": k, "ell": ell, "eps": eps, "tau": tau, "mu": mu, "mode": mode},
        seed=seed,
    )
    return _report(sol, coresets, plan, t1 - t0, t2 - t1, tau)


def _outliers_mr(S, k, z, ell, eps_hat, base, tau, seed, mode, random_first, workers, algorithm, params):
    n = S.shape[0]
    if not 0 < eps_hat <= 1:
        raise InputError("eps_hat must lie in (0, 1]")
    if k < 1 or z < 0 or k + z >= n:
        raise InputError(f"need k >= 1, z >= 0 and k + z < |S| (got k={k}, z={z}, |S|={n})")
    plan = partition(S, ell, mode, seed)

    t0 = time.perf_counter()
    coresets = _round1(S, plan, _gmm_coreset(base, eps_hat, tau), seed, random_first, workers)
    t1 = time.perf_counter()
    T = Coreset.concatenate(coresets)
    sol = solve_weighted(T, k, z, eps_hat, S=S, algorithm=algorithm)
    t2 = time.perf_counter()

    sol.params = {**params, "k": k, "z": z, "ell": ell, "eps_hat": eps_hat, "tau": tau, "mode": mode}
    sol.seed = seed
    return _report(sol, coresets, plan, t1 - t0, t2 - t1, tau)


def kcenter_outliers_mr_det(
    S,
    k: int,
    z: int,
    ell: int = 1,
    eps_hat: float = DEFAULT_EPS_HAT,
    *,
    tau: int | None = None,
    mu: float | None = None,
    seed: int = 0,
    mode: str = "chunked",
    random_first: bool = False,
    workers: int = 1,
) -> RunReport:
    """Two-round k-center with ``z`` outliers over a deterministic partition.

    Round 1 keeps farthest-first going past ``k + z`` centers until the
    adaptive stopping rule fires (or to a fixed ``tau``; ``mu`` gives
    ``tau = mu * (k + z)``), weighting each center by the points it proxies.
    Round 2 searches the radius for OutliersCluster on the union.
    Pass ``eps_hat = eps / 6`` for a ``(3 + eps)`` guarantee.
    """
    S = as_dataset(S)
    tau = _resolve_tau(tau, mu, k + z)
    return _outliers_mr(
        S, k, z, ell, eps_hat, k + z, tau, seed, mode, random_first, workers,
        "outliers-mr-det", {"mu": mu},
    )


def kcenter_outliers_mr_rand(
    S,
    k: int,
    z: int,
    ell: int = 1,
    eps_hat: float = DEFAULT_EPS_HAT,
    *,
    tau: int | None = None,
    mu: float | None = None,
    seed: int = 0,
    random_first: bool = False,
    workers: int = 1,
) -> RunReport:
    """Randomized-partition variant of :func:`kcenter_outliers_mr_det`.

    Each point lands in a uniformly random partition, so each partition only
    needs to budget ``z' = ceil(6 (z / ell + log2 |S|))`` outliers. With ``mu``
    the coreset size is ``mu * (k + 6 z / ell)`` (log term dropped).
    """
    S = as_dataset(S)
    n = S.shape[0]
    zp = z_prime(z, ell, n)
    tau = _resolve_tau(tau, mu, k + 6.0 * z / ell)
    return _outliers_mr(
        S, k, z, ell, eps_hat, k + zp, tau, seed, "random", random_first, workers,
        "outliers-mr-rand", {"mu": mu, "z_prime": zp},
    )
