"""Acceptance suite: each test checks one criterion and prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are repeated
in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from kcoreset.bench import ALGORITHMS, run_algorithm
from kcoreset.datatools import inflate, inject_outliers, planted_clusters, save_dataset
from kcoreset.gmm import gmm
from kcoreset.mapreduce import (
    kcenter_mr,
    kcenter_outliers_mr_det,
    kcenter_outliers_mr_rand,
    partition,
    z_prime,
)
from kcoreset.oracles import (
    brute_force_kcenter,
    brute_force_kcenter_outliers,
    charikar_baseline,
    sequential_coreset,
)
from kcoreset.seeding import substream
from kcoreset.streaming import StreamConfig, _build, shuffled_stream, stream_solve_outliers

# absorbs rounding in "radius <= factor * opt" when both sides are computed in floating point
REL = 1e-12


def within(radius, factor, opt):
    return radius <= factor * opt * (1 + REL)


def square(seed, n, d=2):
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(n, d))


def test_criterion_1_kcenter_mr_approximation(acceptance):
    t0 = time.perf_counter()
    worst, fails = 0.0, 0
    for seed in range(100):
        S = square(seed, 24)
        opt = brute_force_kcenter(S, 3).opt_radius
        for ell in (1, 2, 4):
            r = kcenter_mr(S, 3, ell, 0.5).solution.radius
            worst = max(worst, r / opt)
            fails += not within(r, 2.5, opt)
    elapsed = time.perf_counter() - t0
    acceptance(1, fails == 0 and elapsed < 60,
               f"300 runs, worst ratio {worst:.3f} (bound 2.5), {fails} violations, {elapsed:.1f}s")


def test_criterion_2_outliers_approximation(acceptance):
    t0 = time.perf_counter()
    e = 0.1
    worst, fails = 0.0, 0
    for seed in range(100):
        S = square(1000 + seed, 20)
        opt = brute_force_kcenter_outliers(S, 2, 2).opt_radius
        radii = [kcenter_outliers_mr_det(S, 2, 2, ell, e).solution.radius for ell in (1, 2)]
        radii.append(sequential_coreset(S, 2, 2, eps_hat=e).radius)
        for r in radii:
            worst = max(worst, r / opt)
            fails += not within(r, 3 + 6 * e, opt)
    elapsed = time.perf_counter() - t0
    acceptance(2, fails == 0 and elapsed < 60,
               f"300 runs, worst ratio {worst:.3f} (bound {3 + 6 * e:.1f}), {fails} violations, {elapsed:.1f}s")


def test_criterion_3_randomized_partition(acceptance):
    n, z, ell, k = 2000, 40, 8, 5
    base = square(3, n - z)
    # injected points are appended, so all outliers are contiguous at the end
    S, injected = inject_outliers(base, z, seed=3)
    zp = z_prime(z, ell, n)
    over, most = 0, 0
    for seed in range(100):
        plan = partition(S, ell, "random", seed)
        counts = np.bincount(plan.assignments[injected], minlength=ell)
        most = max(most, int(counts.max()))
        over += int(counts.max() > zp)
    rep = kcenter_outliers_mr_rand(S, k, z, ell, 0.1, seed=0)
    # the full run must discard the far points
    full_ok = rep.solution.radius < 10.0

    e = 0.1
    worst, fails = 0.0, 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pick = rng.choice(n - z, 18, replace=False)
        sub = np.vstack([base[pick], S[injected[:2]]])
        opt = brute_force_kcenter_outliers(sub, 2, 2).opt_radius
        for ell_small in (1, 2):
            r = kcenter_outliers_mr_rand(sub, 2, 2, ell_small, e, seed=seed).solution.radius
            worst = max(worst, r / opt)
            fails += not within(r, 3 + 6 * e, opt)
    acceptance(3, over == 0 and fails == 0 and full_ok,
               f"max injected per partition {most} <= z'={zp} in 100/100 seeds: {over == 0}; "
               f"sub-sampled worst ratio {worst:.3f} (bound {3 + 6 * e:.1f}), {fails} violations")


class _Tracker:
    def __init__(self):
        self.last_phi = 0.0
        self.violations = 0

    def __call__(self, state, i, center, dist):
        if dist > 8.0 * state.phi or state.phi < self.last_phi:
            self.violations += 1
        self.last_phi = state.phi


def test_criterion_4_streaming_invariants(acceptance):
    absorb, relaxed, streams = 0, 0, 0
    for seed in range(50):
        S = planted_clusters(5000, 2, 8, seed=seed)
        for tau in (20, 50):
            tr = _Tracker()
            # debug mode asserts (a), (b) and (d) after every point
            state, _ = _build(shuffled_stream(S, seed), tau, debug=True, on_absorb=tr)
            absorb += tr.violations
            relaxed += state.phi > gmm(S, tau, 0).radius
            streams += 1
    exact = 0
    for seed in range(50):
        S = square(500 + seed, 14)
        for tau in (2, 3, 4):
            state, _ = _build(shuffled_stream(S, seed), tau, debug=True)
            exact += state.phi > brute_force_kcenter(S, tau).opt_radius
    acceptance(4, absorb == 0 and relaxed == 0 and exact == 0,
               f"{streams} streams of 5000: absorption/monotonicity violations {absorb}, "
               f"phi > r_GMM(tau) in {relaxed}; exact phi <= r*_tau violated in {exact}/150 small streams")


def test_criterion_5_streaming_end_to_end(acceptance):
    eps = 0.6
    cfg = StreamConfig.from_mu(2, 2, 4, eps / 6)
    worst, fails, runs = 0.0, 0, 0
    for inst in range(10):
        S = square(2000 + inst, 20)
        opt = brute_force_kcenter_outliers(S, 2, 2).opt_radius
        for shuffle in range(10):
            r = stream_solve_outliers(S, cfg, seed=100 * inst + shuffle, debug=True).radius
            worst = max(worst, r / opt)
            fails += not within(r, 3 + eps, opt)
            runs += 1
    acceptance(5, fails == 0, f"{runs} shuffles, tau={cfg.tau}, worst ratio {worst:.3f} (bound {3 + eps}), {fails} violations")


@pytest.mark.slow
def test_criterion_6_coreset_size_trend(acceptance):
    base = planted_clusters(10_000, 7, 20, seed=1)
    S = inflate(base, 10, seed=1)
    S_out, _ = inject_outliers(S, 50, seed=1)
    mus = (1, 2, 4, 8)
    lines, ok = [], True
    for algo, X, k, z in (("kcenter-mr", S, 50, 0), ("outliers-mr-rand", S_out, 20, 50)):
        means = []
        for mu in mus:
            radii = [run_algorithm(algo, X, k, z, 16, mu, None, None, seed)[0].radius for seed in range(10)]
            means.append(float(np.mean(radii)))
        mono = all(a >= b for a, b in zip(means, means[1:]))
        gain = means[-1] / means[0]
        ok &= mono and gain <= 0.95
        lines.append(f"{algo} means {[round(m, 4) for m in means]} non-increasing={mono} mu8/mu1={gain:.3f}")
    acceptance(6, ok, "; ".join(lines) + " (need <= 0.95)")


@pytest.mark.slow
def test_criterion_7_sequential_speedup(acceptance):
    base = planted_clusters(10_000, 7, 20, seed=3)
    S, _ = inject_outliers(base, 200, seed=3)
    t_seq, t_char, r_seq, r_char = [], [], [], []
    for seed in range(10):
        X = S[substream(seed, "shuffle").permutation(S.shape[0])]
        t = time.perf_counter()
        r_seq.append(sequential_coreset(X, 20, 200, mu=2).radius)
        t_seq.append(time.perf_counter() - t)
        t = time.perf_counter()
        r_char.append(charikar_baseline(X, 20, 200).radius)
        t_char.append(time.perf_counter() - t)
    speedup = np.mean(t_char) / np.mean(t_seq)
    quality = np.mean(r_seq) / np.mean(r_char)
    acceptance(7, speedup >= 3 and quality <= 1.1,
               f"n={S.shape[0]}: speedup {speedup:.1f}x (need >= 3), radius ratio {quality:.3f} (need <= 1.1)")


@pytest.mark.slow
def test_criterion_8_scalability(acceptance):
    ell = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    base = planted_clusters(10_000, 7, 20, seed=5)
    times = []
    for h in (25, 50, 100):
        S = inflate(base, h, seed=5)
        t = time.perf_counter()
        kcenter_outliers_mr_rand(S, 20, 200, ell, mu=1, seed=0, workers=ell)
        times.append(time.perf_counter() - t)
        del S
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(2 / 1.35 <= q <= 2 * 1.35 for q in ratios)
    acceptance(8, ok, f"ell={ell}, times {[round(t, 2) for t in times]}s for n=2.5e5,5e5,1e6, "
                      f"per-doubling ratios {[round(q, 3) for q in ratios]} (need within [1.481, 2.7])")


def test_criterion_9_nested_prefixes(acceptance):
    S = planted_clusters(4000, 3, 12, seed=9)
    checked, bad = 0, 0
    runs = {
        "kcenter-mr": lambda mu: kcenter_mr(S, 5, 4, tau=None, mu=mu, seed=4, random_first=True),
        "outliers-mr-det": lambda mu: kcenter_outliers_mr_det(S, 5, 10, 4, mu=mu, seed=4, random_first=True),
        "outliers-mr-rand": lambda mu: kcenter_outliers_mr_rand(S, 5, 10, 4, mu=mu, seed=4, random_first=True),
    }
    for run in runs.values():
        origins = {mu: run(mu).coreset_origins for mu in (1, 2, 4, 8)}
        for mu in (1, 2, 4):
            for mu2 in (m for m in (2, 4, 8) if m > mu):
                for a, b in zip(origins[mu], origins[mu2]):
                    checked += 1
                    bad += not np.array_equal(a, b[: len(a)])
    acceptance(9, bad == 0, f"{checked} (partition, mu < mu') pairs, {bad} non-prefix coresets")


def test_criterion_10_reproducible_json(acceptance, tmp_path):
    data = tmp_path / "data.csv"
    save_dataset(data, planted_clusters(200, 3, 4, seed=10))
    mismatches = []
    for algo in ALGORITHMS:
        cmd = [sys.executable, "-m", "kcoreset.cli", "solve", "--algo", algo, "--input", str(data),
               "--k", "2", "--z", "0" if algo in ("kcenter-mr", "kcenter-stream") else "3",
               "--ell", "2", "--seed", "42", "--json"]
        cmd += ["--eps", "0.6"] if algo in ("two-pass", "charikar", "brute-force") else ["--mu", "2"]
        outs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            mismatches.append(algo)
    acceptance(10, not mismatches, f"{len(ALGORITHMS)} algorithms x 2 invocations, mismatched: {mismatches or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
