"""Algorithm dispatch, benchmark records and their aggregation."""

from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InputError
from .mapreduce import DEFAULT_EPS_HAT, kcenter_mr, kcenter_outliers_mr_det, kcenter_outliers_mr_rand
from .metric import as_dataset
from .oracles import brute_force_kcenter_outliers, charikar_baseline, sequential_coreset
from .seeding import substream
from .solution import ClusteringSolution
from .streaming import StreamConfig, stream_kcenter_no_outliers, stream_solve_outliers, two_pass_oblivious

__all__ = ["ALGORITHMS", "BenchRecord", "aggregate", "run_algorithm", "run_bench", "write_csv"]

ALGORITHMS = (
    "kcenter-mr",
    "outliers-mr-det",
    "outliers-mr-rand",
    "outliers-stream",
    "kcenter-stream",
    "two-pass",
    "sequential",
    "charikar",
    "brute-force",
)


@dataclass
class BenchRecord:
    dataset: str
    algorithm: str
    k: int
    z: int
    ell: int | None
    mu: float | None
    eps: float | None
    seed: int
    radius: float
    approximation_ratio: float = math.nan
    times: dict[str, float] = field(default_factory=dict)
    throughput: float | None = None
    peak_local_memory_points: int | None = None
    coreset_size: int | None = None

    def config_key(self) -> tuple:
        return (self.dataset, self.k, self.z)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _shuffle(S, seed):
    perm = substream(seed, "shuffle").permutation(S.shape[0])
    return as_dataset(S[perm]), perm


def run_algorithm(
    algo: str,
    S,
    k: int,
    z: int = 0,
    ell: int = 1,
    mu: float | None = None,
    eps: float | None = None,
    tau: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> tuple[ClusteringSolution, dict[str, Any]]:
    """Run one named algorithm and return its solution plus report extras.

    ``eps`` is the user-facing precision: algorithms with a ``(3 + eps)``
    guarantee run their internal search with ``eps / 6``.
    MapReduce runs keep the input order (so an adversarial layout survives)
    and pick each partition's first center from the seed. The sequential
    run sees a seed-shuffled input; streams are shuffled by the streaming
    code itself. Center indices always refer to the input order.
    """
    S = as_dataset(S)
    extra: dict[str, Any] = {}
    eps_hat = eps / 6.0 if eps is not None else DEFAULT_EPS_HAT

    if algo in ("kcenter-mr", "outliers-mr-det", "outliers-mr-rand"):
        common = dict(tau=tau, mu=mu, seed=seed, random_first=True, workers=workers)
        if algo == "kcenter-mr":
            rep = kcenter_mr(S, k, ell, eps if tau is None and mu is None else None, **common)
        elif algo == "outliers-mr-det":
            rep = kcenter_outliers_mr_det(S, k, z, ell, eps_hat, **common)
        else:
            rep = kcenter_outliers_mr_rand(S, k, z, ell, eps_hat, **common)
        sol = rep.solution
        extra.update(
            peak_local_memory_points=rep.peak_local_memory_points,
            coreset_size=rep.union_size,
            coreset_sizes=rep.coreset_sizes,
        )
    elif algo == "sequential":
        X, perm = _shuffle(S, seed)
        sol = sequential_coreset(X, k, z, mu=mu, eps_hat=eps_hat, seed=seed)
        sol.center_indices = perm[sol.center_indices]
        extra["coreset_size"] = sol.info.get("coreset_size")
    elif algo == "outliers-stream":
        if tau is not None:
            cfg = StreamConfig(k, z, tau, eps_hat)
        else:
            cfg = StreamConfig.from_mu(k, z, mu if mu is not None else 1.0, eps_hat)
        sol = stream_solve_outliers(S, cfg, seed)
        extra.update(throughput=sol.info["throughput"], coreset_size=cfg.tau)
    elif algo == "kcenter-stream":
        cap = tau if tau is not None else max(k, int(math.ceil((mu if mu is not None else 1.0) * k)))
        sol = stream_kcenter_no_outliers(S, k, cap, seed)
        extra.update(throughput=sol.info["throughput"], coreset_size=cap)
    elif algo == "two-pass":
        sol = two_pass_oblivious(S, k, z, eps if eps is not None else 6 * DEFAULT_EPS_HAT, seed)
        extra["coreset_size"] = sol.info["coreset_size"]
    elif algo == "charikar":
        sol = charikar_baseline(S, k, z)
    elif algo == "brute-force":
        res = brute_force_kcenter_outliers(S, k, z)
        idx = np.array(res.opt_centers, dtype=np.intp)
        sol = ClusteringSolution(S[idx], idx, res.opt_radius, z, "brute-force", {"k": k, "z": z}, info={"enumerated": res.enumerated})
    else:
        raise InputError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    sol.seed = seed
    return sol, extra


def _one(args) -> BenchRecord:
    dataset, S, algo, k, z, ell, mu, eps, tau, seed = args
    sol, extra = run_algorithm(algo, S, k, z, ell, mu, eps, tau, seed)
    return BenchRecord(
        dataset=dataset,
        algorithm=algo,
        k=k,
        z=z,
        ell=ell,
        mu=mu,
        eps=eps,
        seed=seed,
        radius=sol.radius,
        times=dict(sol.timings),
        throughput=extra.get("throughput"),
        peak_local_memory_points=extra.get("peak_local_memory_points"),
        coreset_size=extra.get("coreset_size"),
    )


def run_bench(
    S,
    algos,
    k: int,
    z: int = 0,
    ell: int = 1,
    mus=(None,),
    eps: float | None = None,
    tau: int | None = None,
    reps: int = 10,
    seed: int = 0,
    dataset: str = "data",
    jobs: int = 1,
) -> list[BenchRecord]:
    """One record per (algorithm, mu, repetition); repetition ``r`` uses seed ``seed + r``.

    ``jobs > 1`` runs repetitions in worker processes; the algorithms
    themselves then run single-threaded.
    """
    S = as_dataset(S)
    tasks = [
        (dataset, S, algo, k, z, ell, mu, eps, tau, seed + rep)
        for algo in algos
        for mu in mus
        for rep in range(reps)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_one, tasks))
    else:
        records = [_one(t) for t in tasks]
    set_ratios(records)
    return records


def set_ratios(records) -> None:
    """Ratio to the best radius found for the same dataset and (k, z) across all records."""
    best: dict[tuple, float] = {}
    for r in records:
        key = r.config_key()
        best[key] = min(best.get(key, math.inf), r.radius)
    for r in records:
        b = best[r.config_key()]
        r.approximation_ratio = 1.0 if r.radius == b else (r.radius / b if b > 0 else math.inf)


def _ci(values) -> tuple[float, float]:
    """Mean and half-width of a normal-approximation 95% interval (1.96 * s / sqrt(n))."""
    mean = statistics.fmean(values)
    if len(values) < 2:
        return mean, 0.0
    return mean, 1.96 * statistics.stdev(values) / math.sqrt(len(values))


def aggregate(records) -> list[dict[str, Any]]:
    groups: dict[tuple, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.algorithm, r.k, r.z, r.ell, r.mu, r.eps), []).append(r)
    out = []
    for (dataset, algo, k, z, ell, mu, eps), rs in groups.items():
        rad, rad_ci = _ci([r.radius for r in rs])
        ratio, ratio_ci = _ci([r.approximation_ratio for r in rs])
        total = [sum(r.times.values()) for r in rs]
        t, t_ci = _ci(total)
        row = {
            "dataset": dataset, "algorithm": algo, "k": k, "z": z, "ell": ell, "mu": mu, "eps": eps,
            "runs": len(rs),
            "radius_mean": rad, "radius_ci95": rad_ci,
            "ratio_mean": ratio, "ratio_ci95": ratio_ci,
            "time_mean": t, "time_ci95": t_ci,
        }
        tp = [r.throughput for r in rs if r.throughput is not None]
        if tp:
            row["throughput_mean"], row["throughput_ci95"] = _ci(tp)
        out.append(row)
    return out


_CSV_FIELDS = [
    "dataset", "algorithm", "k", "z", "ell", "mu", "eps", "seed", "radius",
    "approximation_ratio", "time_total", "throughput", "peak_local_memory_points", "coreset_size",
]


def write_csv(path, records) -> None:
    """Append records to ``path``, writing a header when the file is new."""
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        if new:
            w.writeheader()
        for r in records:
            d = r.to_dict()
            d["time_total"] = sum(d.pop("times").values())
            w.writerow({f: d.get(f) for f in _CSV_FIELDS})
