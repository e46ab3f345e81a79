import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.sparse.csgraph import minimum_spanning_tree as scipy_mst
from scipy.spatial.distance import cdist
from scipy.stats import spearmanr

from quregress.complexity import (
    MEASURES, ComplexityProfile, compute_profile, minimum_spanning_tree, ols_fit, profile_arrays,
    read_profiles_csv, spearman_rho, write_profiles_csv,
)
from quregress.errors import (
    DegenerateTargetError, InvalidArgument, UndefinedCorrelationError, UnderdeterminedError,
)

finite = st.floats(-100, 100, allow_nan=False)


def _cloud(seed, n=60, d=2):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, (n, d))
    return X, np.sin(3 * X[:, 0]) + X[:, -1] ** 2


def test_spearman_examples():
    assert spearman_rho([1, 2, 3], [3, 1, 2]) == pytest.approx(-0.5)
    assert spearman_rho([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0
    assert spearman_rho([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0
    with pytest.raises(UndefinedCorrelationError):
        spearman_rho([1, 1, 1], [1, 2, 3])
    with pytest.raises(InvalidArgument):
        spearman_rho([1, 2], [1, 2])


@given(arrays(np.float64, 12, elements=finite), arrays(np.float64, 12, elements=finite))
def test_spearman_matches_scipy(a, b):
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return
    assert spearman_rho(a, b) == pytest.approx(spearmanr(a, b).statistic, abs=1e-12)
    assert spearman_rho(a, b) == pytest.approx(spearman_rho(a ** 3 + a, b), abs=1e-12)


def test_ols_examples():
    m = ols_fit([[0.0], [1.0], [2.0]], [1.0, 3.0, 5.0])
    assert m.intercept == pytest.approx(1.0)
    np.testing.assert_allclose(m.coefficients, [2.0])
    with pytest.raises(UnderdeterminedError):
        ols_fit([[0.0, 1.0], [1.0, 0.0]], [1.0, 2.0])
    # duplicated column: minimum-norm solution splits the slope evenly
    x = np.arange(5.0)
    m = ols_fit(np.column_stack([x, x]), 4 * x)
    np.testing.assert_allclose(m.coefficients, [2.0, 2.0], atol=1e-10)


def test_mst_examples():
    assert minimum_spanning_tree([[0.0], [1.0], [3.0]]) == [(0, 1), (1, 2)]
    assert sorted(minimum_spanning_tree([[0, 0], [0, 1], [5, 5], [5, 6]])) == [(0, 1), (1, 2), (2, 3)]
    # unit square: all sides tie, lower pairs win
    assert minimum_spanning_tree([[0, 0], [1, 0], [0, 1], [1, 1]]) == [(0, 1), (0, 2), (1, 3)]
    with pytest.raises(InvalidArgument):
        minimum_spanning_tree([[0.0, 0.0]])


@given(st.integers(0, 10_000), st.integers(2, 40))
def test_mst_weight_matches_scipy(seed, n):
    X = np.random.default_rng(seed).normal(size=(n, 2))
    edges = minimum_spanning_tree(X)
    D = cdist(X, X)
    assert len(edges) == n - 1 and all(i < j for i, j in edges)
    assert len({v for e in edges for v in e}) == n
    assert sum(D[i, j] for i, j in edges) == pytest.approx(scipy_mst(D).sum(), rel=1e-12)


def test_profile_basic_facts():
    X, y = _cloud(0)
    p = profile_arrays(X, y)
    assert p.c1 >= p.c2 >= 0
    assert 0 <= p.c3 <= 1 and 0 <= p.c4 <= 1
    assert p.t2 == 30.0
    assert p.l2 >= p.l1 ** 2 - 1e-12
    assert all(np.isfinite(p.as_array()))
    assert tuple(p.as_dict()) == MEASURES


def test_linear_target_is_easy():
    X, _ = _cloud(1)
    y = 0.3 * X[:, 0] - 0.2 * X[:, 1]
    p = profile_arrays(X, y)
    assert p.l1 < 1e-12 and p.l2 < 1e-24 and p.l3 < 1e-24
    # one-feature regressions in turn still leave points of a two-feature plane
    assert p.c4 > 0
    assert profile_arrays(X[:, :1], 2 * X[:, 0] + 1).c4 == 0.0


def test_monotone_single_feature_has_no_c3_removals():
    x = np.linspace(-1, 1, 40)
    p = profile_arrays(x, x ** 3)
    assert p.c1 == 1.0 and p.c3 == 0.0


@given(st.integers(0, 1000), st.floats(0.1, 10))
def test_s1_scales_with_target(seed, k):
    X, y = _cloud(seed, n=30)
    assert profile_arrays(X, k * y).s1 == pytest.approx(k * profile_arrays(X, y).s1, rel=1e-9)


@given(st.integers(0, 1000))
def test_c1_invariant_to_monotone_feature_maps(seed):
    X, y = _cloud(seed, n=30)
    a, b = profile_arrays(X, y), profile_arrays(np.exp(X) * 3 + 1, y)
    assert a.c1 == pytest.approx(b.c1, abs=1e-12) and a.c2 == pytest.approx(b.c2, abs=1e-12)


def test_duplicated_points_have_zero_s3():
    X, y = _cloud(2, n=20)
    p = profile_arrays(np.vstack([X, X]), np.concatenate([y, y]))
    assert p.s3 == 0.0


def test_profile_deterministic_and_seeded():
    X, y = _cloud(3)
    assert profile_arrays(X, y, seed=5) == profile_arrays(X, y, seed=5)
    a, b = profile_arrays(X, y, seed=5), profile_arrays(X, y, seed=6)
    assert a.s4 != b.s4 and a.s1 == b.s1


def test_profile_preconditions():
    X, y = _cloud(4, n=9)
    with pytest.raises(InvalidArgument):
        profile_arrays(X, y)
    with pytest.raises(DegenerateTargetError):
        profile_arrays(np.arange(20.0), np.ones(20))


def test_csv_round_trip(tmp_path, sphere_data):
    prof = {1: compute_profile(sphere_data), "1d-2": ComplexityProfile(*range(12))}
    write_profiles_csv(tmp_path / "p.csv", prof)
    assert read_profiles_csv(tmp_path / "p.csv") == prof
