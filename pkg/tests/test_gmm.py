import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcoreset import InputError, build_weighted_coreset, gmm, gmm_adaptive
from kcoreset.gmm import Coreset, WeightedPoint, unit_coreset

from conftest import naive_opt, naive_radius, uniform_instance


def test_gmm_hand_trace(line5):
    tr = gmm(line5, 2, first_center=0)
    assert list(tr.center_indices) == [0, 4]
    assert list(tr.radii) == [10.0, 2.0]


def test_gmm_full_run_ends_at_zero(line5):
    tr = gmm(line5, 5)
    assert tr.radii[-1] == 0.0
    assert sorted(tr.center_indices) == [0, 1, 2, 3, 4]


def test_gmm_degenerate_dataset():
    X = np.ones((5, 2))
    tr = gmm(X, 1)
    assert tr.radii[-1] == 0.0
    # distinct centers even when every remaining distance is zero
    assert len(set(gmm(X, 5).center_indices)) == 5


def test_gmm_rejects_large_tau(line5):
    with pytest.raises(InputError):
        gmm(line5, 6)


def test_gmm_ties_go_to_lower_index():
    X = np.array([[0.0], [-1.0], [1.0]])
    assert list(gmm(X, 2).center_indices) == [0, 1]


def test_gmm_adaptive_hand_trace(line5):
    tr = gmm_adaptive(line5, 2, 1.0)
    assert tr.tau == 3
    assert tr.radii[-1] == 1.0
    assert list(tr.center_indices) == [0, 4, 2]


def test_gmm_adaptive_zero_radius_stops_at_base():
    X = np.array([[0.0], [0.0], [5.0], [5.0]])
    assert gmm_adaptive(X, 2, 0.5).tau == 2


def test_gmm_adaptive_exhaustion(line5):
    tr = gmm_adaptive(line5, 5, 1.0)
    assert tr.tau == 5 and tr.radii[-1] == 0.0


def test_gmm_adaptive_validates(line5):
    with pytest.raises(InputError):
        gmm_adaptive(line5, 6, 0.5)
    with pytest.raises(InputError):
        gmm_adaptive(line5, 2, 0.0)


def test_gmm_adaptive_stopping_rule():
    X = uniform_instance(11, 300)
    tr = gmm_adaptive(X, 5, 0.3)
    target = 0.15 * tr.radii[4]
    assert tr.radii[-1] <= target
    # and it is the first such iteration
    assert all(r > target for r in tr.radii[5:-1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_radii_non_increasing_and_assignment_consistent(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(int(rng.integers(1, 60)), 2))
    tr = gmm(X, int(rng.integers(1, X.shape[0] + 1)))
    assert np.all(np.diff(tr.radii) <= 0)
    assert len(set(tr.center_indices)) == tr.tau
    C = X[tr.center_indices]
    d = np.linalg.norm(X[:, None, :] - C[None, :, :], axis=2)
    assert np.allclose(d[np.arange(X.shape[0]), tr.assignment], d.min(axis=1))
    assert tr.radii[-1] == pytest.approx(d.min(axis=1).max())


def test_weighted_coreset_examples(line5):
    cs = build_weighted_coreset(line5, gmm(line5, 2))
    assert dict(zip(cs.origin_indices.tolist(), cs.weights.tolist())) == {0: 3, 4: 2}
    cs = build_weighted_coreset(line5, gmm(line5, 5))
    assert np.all(cs.weights == 1)
    same = np.ones((5, 1))
    cs = build_weighted_coreset(same, gmm(same, 1))
    assert cs.weights.tolist() == [5]


def test_weighted_coreset_ties_to_earlier_center():
    X = np.array([[0.0], [2.0], [1.0]])
    cs = build_weighted_coreset(X, gmm(X, 2))
    # point 1.0 is equidistant from both centers and goes to the first
    assert cs.weights.tolist() == [2, 1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_weight_conservation(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(int(rng.integers(1, 80)), 3))
    cs = build_weighted_coreset(X, gmm_adaptive(X, 1, float(rng.uniform(0.05, 1.0))))
    assert cs.weights.sum() == X.shape[0] == cs.source_size
    assert len(set(cs.origin_indices.tolist())) == len(cs)


def test_coreset_items_round_trip(line5):
    cs = build_weighted_coreset(line5, gmm(line5, 2))
    again = Coreset.from_items(cs.items)
    assert np.array_equal(again.points, cs.points)
    assert np.array_equal(again.weights, cs.weights)
    assert isinstance(cs.items[0], WeightedPoint)


def test_coreset_rejects_zero_weight():
    with pytest.raises(InputError):
        Coreset(np.zeros((1, 1)), np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.intp), 0)


def test_nested_prefixes():
    X = uniform_instance(5, 500, 3)
    short, long = gmm(X, 10), gmm(X, 40)
    assert np.array_equal(long.center_indices[:10], short.center_indices)
    assert np.array_equal(long.radii[:10], short.radii)


@pytest.mark.parametrize("seed", range(6))
def test_gmm_subset_bound(seed):
    # any subset's GMM radius is within twice the optimum of the whole set
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 25))
    k = int(rng.integers(1, 4))
    S = rng.uniform(size=(n, 2))
    opt = naive_opt(S.tolist(), k)
    for _ in range(6):
        sub = np.sort(rng.choice(n, size=int(rng.integers(k, n + 1)), replace=False))
        X = S[sub]
        tr = gmm(X, k)
        assert naive_radius(X.tolist(), list(tr.center_indices)) <= 2 * opt + 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_farthest_first_two_approximation(seed):
    S = uniform_instance(100 + seed, 16)
    for k in (1, 2, 3):
        assert gmm(S, k).radius <= 2 * naive_opt(S.tolist(), k) + 1e-12


def test_unit_coreset():
    cs = unit_coreset(np.arange(4.0))
    assert cs.total_weight == 4 and cs.origin_indices.tolist() == [0, 1, 2, 3]
