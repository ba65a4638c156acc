import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blgrowth import subspace as sp
from blgrowth.errors import InvalidInputError
from blgrowth.subspace import Subspace


def test_rank_examples():
    assert sp.rank(np.eye(2)) == 2
    assert sp.rank(np.zeros((2, 2))) == 0
    assert sp.rank([[1, 1], [1, 1]]) == 1


def test_rank_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        sp.rank([[np.nan, 0.0]])
    with pytest.raises(InvalidInputError):
        sp.rank(np.eye(2), tol=0)


def test_image_dim_examples(x_axis, y_axis):
    M = [[1.0, 0.0]]
    assert sp.image_dim(M, y_axis) == 0
    assert sp.image_dim(M, Subspace.full(2)) == 1
    assert sp.image_dim(M, Subspace.span([[1, 1]])) == 1


def test_image_dim_mismatch(x_axis):
    with pytest.raises(InvalidInputError):
        sp.image_dim(np.eye(3), x_axis)


def test_sum_and_intersect(x_axis, y_axis):
    assert sp.sum(x_axis, y_axis).dim == 2
    assert sp.intersect(x_axis, y_axis).dim == 0
    V = Subspace.span([[1, 2, 3], [0, 1, 1]])
    W = sp.intersect(V, V)
    assert W.dim == V.dim
    assert sp.grassmann_distance(W, V) < 1e-10
    with pytest.raises(InvalidInputError):
        sp.sum(x_axis, Subspace.full(3))


def test_orthocomplement(x_axis, y_axis):
    R2 = Subspace.full(2)
    assert sp.orthocomplement(Subspace.zero(2), R2).dim == 2
    assert sp.orthocomplement(R2, R2).dim == 0
    C = sp.orthocomplement(x_axis, R2)
    assert sp.grassmann_distance(C, y_axis) < 1e-12
    with pytest.raises(InvalidInputError):
        sp.orthocomplement(x_axis, y_axis)


def test_projection_matrix_examples(x_axis):
    assert np.allclose(sp.projection_matrix(x_axis), np.diag([1.0, 0.0]))
    assert np.allclose(sp.projection_matrix(Subspace.full(2)), np.eye(2))
    diag = Subspace.span([[1, 1]])
    assert np.allclose(sp.projection_matrix(diag), [[0.5, 0.5], [0.5, 0.5]], atol=1e-14)


def test_grassmann_distance_examples(x_axis, y_axis):
    assert sp.grassmann_distance(x_axis, x_axis) == 0
    assert sp.grassmann_distance(x_axis, y_axis) == pytest.approx(1.0)
    line = Subspace.span([[np.cos(np.pi / 4), np.sin(np.pi / 4)]])
    # oracle: general (non-symmetric) eigensolver on the projector difference
    D = np.diag([1.0, 0.0]) - np.outer([np.cos(np.pi / 4), np.sin(np.pi / 4)],
                                       [np.cos(np.pi / 4), np.sin(np.pi / 4)])
    oracle = max(abs(np.linalg.eig(D)[0]))
    assert oracle == pytest.approx(0.70710678, abs=1e-8)
    assert sp.grassmann_distance(x_axis, line) == pytest.approx(oracle, abs=1e-8)
    with pytest.raises(InvalidInputError):
        sp.grassmann_distance(x_axis, Subspace.full(2))


def test_random_subspace_examples():
    assert sp.random_subspace(3, 0, 1).dim == 0
    assert sp.random_subspace(3, 3, 1).dim == 3
    a = sp.random_subspace(2, 1, 7).basis
    b = sp.random_subspace(2, 1, 7).basis
    assert a.tobytes() == b.tobytes()
    with pytest.raises(InvalidInputError):
        sp.random_subspace(2, 3, 0)


def test_kernel_and_containment():
    K = sp.kernel([[1.0, 0.0, 0.0]])
    assert K.dim == 2
    assert Subspace.full(3).contains(K)
    assert not K.contains(Subspace.coordinate(3, [0]))


dims = st.integers(1, 5).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, n), st.integers(0, 10_000)))


@settings(max_examples=60, deadline=None)
@given(dims)
def test_projection_and_modular_law(args):
    n, k, l, seed = args
    rng = np.random.default_rng(seed)
    V = sp.random_subspace(n, k, rng)
    # force some overlap so intersections are nontrivial now and then
    W = sp.sum(sp.random_subspace(n, l, rng), V) if seed % 3 == 0 else sp.random_subspace(n, l, rng)
    P = sp.projection_matrix(V)
    assert np.allclose(P @ P, P, atol=1e-8)
    assert np.allclose(P, P.T, atol=1e-12)
    assert sp.sum(V, W).dim + sp.intersect(V, W).dim == V.dim + W.dim


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10_000))
def test_grassmann_metric_axioms(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    U, V, W = (sp.random_subspace(n, k, rng) for _ in range(3))
    d = sp.grassmann_distance
    assert 0 <= d(U, V) <= 1
    assert d(U, V) == pytest.approx(d(V, U), abs=1e-12)
    assert d(U, W) <= d(U, V) + d(V, W) + 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 10_000))
def test_image_dim_bounded(n, m, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((m, n))
    if seed % 2:
        M[:, 0] = 0.0  # rank deficiency now and then
        M = M[:, ::-1] @ np.eye(n)
    V = sp.random_subspace(n, int(rng.integers(0, n + 1)), rng)
    assert sp.image_dim(M, V) <= min(sp.rank(M), V.dim)
