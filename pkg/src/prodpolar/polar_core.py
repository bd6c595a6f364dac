"""Polar transform kernels.

Encoding is ``x = u . T_N`` over GF(2) with ``T_N`` the n-fold Kronecker power
of ``T_2 = [[1, 0], [1, 1]]``, natural index order (no bit reversal). Matrices
are laid out row-major throughout the package.
"""

from __future__ import annotations

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def log2_exact(n: int) -> int:
    """Return ``log2(n)`` for a power of two, raising ``ValueError`` otherwise."""
    if not is_power_of_two(int(n)):
        raise ValueError(f"length must be a power of two, got {n}")
    return int(n).bit_length() - 1


def _as_bits(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.size == 0:
        raise ValueError("empty bit array")
    if arr.dtype != np.uint8:
        if np.any((arr != 0) & (arr != 1)):
            raise ValueError("bit arrays must contain only 0 and 1")
        arr = arr.astype(np.uint8)
    return arr


def encode_along_last_axis(bits: np.ndarray) -> np.ndarray:
    """Butterfly polar transform applied independently to every vector on the
    last axis of ``bits``. Returns a new uint8 array."""
    x = np.array(bits, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    log2_exact(N)
    lead = x.shape[:-1]
    h = 1
    while h < N:
        v = x.reshape(*lead, N // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def polar_encode(u, n: int | None = None) -> np.ndarray:
    """Encode ``u`` as ``x = u . T_N`` in O(N log N).

    ``n`` is optional; when given it must satisfy ``len(u) == 2**n``. Since
    ``T_N`` is an involution, ``polar_encode(polar_encode(u)) == u``.
    """
    u = _as_bits(u)
    if u.ndim != 1:
        raise ValueError("polar_encode expects a 1-D bit vector")
    if n is not None and u.shape[0] != 2 ** n:
        raise ValueError(f"length {u.shape[0]} does not match n={n}")
    return encode_along_last_axis(u)


def product_encode(U, n_r: int | None = None, n_c: int | None = None) -> np.ndarray:
    """Product encoding ``X = T_{N_c}^T . U . T_{N_r}``.

    Every row of ``U`` is polar-encoded with ``T_{N_r}``, then every column
    with ``T_{N_c}``; the two passes commute.
    """
    U = _as_bits(U)
    if U.ndim != 2:
        raise ValueError("product_encode expects a 2-D bit matrix")
    rows, cols = U.shape
    if n_r is not None and cols != 2 ** n_r:
        raise ValueError(f"U has {cols} columns, expected 2**{n_r}")
    if n_c is not None and rows != 2 ** n_c:
        raise ValueError(f"U has {rows} rows, expected 2**{n_c}")
    log2_exact(rows)
    log2_exact(cols)
    X = encode_along_last_axis(U)
    return np.ascontiguousarray(encode_along_last_axis(X.T).T)


def row_flatten(M) -> np.ndarray:
    """Juxtapose the rows of ``M`` head to tail."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("row_flatten expects a 2-D matrix")
    return M.reshape(-1).copy()


def row_reshape(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`row_flatten`."""
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != rows * cols:
        raise ValueError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols).copy()


def transform_matrix(N: int) -> np.ndarray:
    """Dense ``T_N`` as an int64 matrix (used for small construction work and
    as a reference, never in the decoding hot path)."""
    n = log2_exact(N)
    T2 = np.array([[1, 0], [1, 1]], dtype=np.int64)
    T = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        T = np.kron(T, T2)
    return T
