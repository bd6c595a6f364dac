import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodpolar.polar_core import (
    encode_along_last_axis,
    log2_exact,
    polar_encode,
    product_encode,
    row_flatten,
    row_reshape,
    transform_matrix,
)


def dense_encode(u):
    return (u.astype(np.int64) @ transform_matrix(u.shape[-1])) % 2


def test_transform_matrix_small():
    assert transform_matrix(2).tolist() == [[1, 0], [1, 1]]
    assert np.array_equal(transform_matrix(4), np.kron([[1, 0], [1, 1]], [[1, 0], [1, 1]]))


def test_transform_entries_are_subset_relation():
    T = transform_matrix(16)
    for k in range(16):
        for i in range(16):
            assert T[k, i] == ((k & i) == i)


@pytest.mark.parametrize("N", [1, 2, 4, 8, 32, 256])
def test_encode_matches_dense(N, rng):
    u = rng.integers(0, 2, (20, N), dtype=np.uint8)
    assert np.array_equal(encode_along_last_axis(u), dense_encode(u))


@pytest.mark.parametrize("N", [2, 16, 1024])
def test_involution(N, rng):
    u = rng.integers(0, 2, N, dtype=np.uint8)
    assert np.array_equal(polar_encode(polar_encode(u)), u)


def test_unit_vectors_give_rows_of_transform():
    T = transform_matrix(8)
    for i in range(8):
        e = np.zeros(8, dtype=np.uint8)
        e[i] = 1
        assert np.array_equal(polar_encode(e), T[i])


def test_length_checks():
    with pytest.raises(ValueError):
        polar_encode(np.zeros(6, dtype=np.uint8))
    with pytest.raises(ValueError):
        polar_encode(np.zeros(4, dtype=np.uint8), n=8)
    with pytest.raises(ValueError):
        log2_exact(0)
    with pytest.raises(ValueError):
        polar_encode(np.array([0, 2, 1, 0]))


def test_input_not_modified(rng):
    u = rng.integers(0, 2, 16, dtype=np.uint8)
    before = u.copy()
    polar_encode(u)
    assert np.array_equal(u, before)


def test_product_encode_is_two_sided_transform(rng):
    U = rng.integers(0, 2, (4, 8), dtype=np.uint8)
    X = product_encode(U)
    expect = (transform_matrix(4).T @ U @ transform_matrix(8)) % 2
    assert np.array_equal(X, expect)


@pytest.mark.parametrize("n_c,n_r", [(1, 4), (4, 1), (2, 8), (8, 2)])
def test_product_matches_flat_rectangular(n_c, n_r, rng):
    U = rng.integers(0, 2, (n_c, n_r), dtype=np.uint8)
    assert np.array_equal(row_flatten(product_encode(U)), polar_encode(row_flatten(U)))


def test_row_flatten_roundtrip(rng):
    M = rng.integers(0, 2, (4, 8), dtype=np.uint8)
    assert np.array_equal(row_reshape(row_flatten(M), 4, 8), M)
    assert row_flatten(M)[8 + 3] == M[1, 3]
    with pytest.raises(ValueError):
        row_reshape(np.zeros(10, dtype=np.uint8), 4, 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 6), st.data())
def test_linearity(n, data):
    N = 1 << n
    a = np.array(data.draw(st.lists(st.integers(0, 1), min_size=N, max_size=N)), dtype=np.uint8)
    b = np.array(data.draw(st.lists(st.integers(0, 1), min_size=N, max_size=N)), dtype=np.uint8)
    assert np.array_equal(polar_encode(a ^ b), polar_encode(a) ^ polar_encode(b))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 2**31 - 1))
def test_kronecker_split_property(a, b, seed):
    n_c, n_r = 1 << a, 1 << b
    U = np.random.default_rng(seed).integers(0, 2, (n_c, n_r), dtype=np.uint8)
    assert np.array_equal(row_flatten(product_encode(U)), polar_encode(row_flatten(U)))
