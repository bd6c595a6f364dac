"""Frozen-set construction for polar, product-polar and hybrid codes.

Covers the Bhattacharyya reliability order, the frozen set of the product of
two polar codes, the per-row / per-column frozen sets of a polar code viewed
as an irregular product code, and the hybrid design that freezes extra
unreliable positions on top of a product frozen set.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np

from .polar_core import is_power_of_two, log2_exact, transform_matrix


@dataclass(frozen=True)
class FrozenSet:
    """Sorted frozen indices of a length-``length`` polar code."""

    indices: tuple[int, ...]
    length: int

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate frozen indices")
        if idx and (idx[0] < 0 or idx[-1] >= self.length):
            raise ValueError(f"frozen index out of range [0, {self.length})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, mask) -> "FrozenSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple(np.flatnonzero(mask).tolist()), mask.shape[0])

    @property
    def dimension(self) -> int:
        return self.length - len(self.indices)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.length, dtype=bool)
        m[list(self.indices)] = True
        return m

    @property
    def information(self) -> tuple[int, ...]:
        return tuple(np.flatnonzero(~self.mask).tolist())

    def indicator(self) -> np.ndarray:
        """0 on frozen positions, 1 elsewhere."""
        return (~self.mask).astype(np.int64)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in self._members

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.indices)


@dataclass(frozen=True)
class ReliabilityOrder:
    """Bit-channel indices, least reliable first."""

    order: tuple[int, ...]
    design_parameter: float | None = None

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise ValueError("reliability order must be a permutation of range(N)")
        object.__setattr__(self, "order", order)

    @property
    def length(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class ComponentProfile:
    """Frozen sets of the row and column component codes.

    ``row_frozen[i]`` is the frozen set of row ``i`` (length N_r) and
    ``col_frozen[j]`` the one of column ``j`` (length N_c). ``z_r = Z * T_{N_r}``
    (read column-wise for the column codes) and ``z_c = T_{N_c}^T * Z`` (read
    row-wise for the row codes) are the unfrozen-count matrices.
    """

    row_frozen: tuple[FrozenSet, ...]
    col_frozen: tuple[FrozenSet, ...]
    z_r: np.ndarray = field(repr=False, compare=False)
    z_c: np.ndarray = field(repr=False, compare=False)

    @property
    def row_dimensions(self) -> tuple[int, ...]:
        return tuple(f.dimension for f in self.row_frozen)

    @property
    def col_dimensions(self) -> tuple[int, ...]:
        return tuple(f.dimension for f in self.col_frozen)


@dataclass(frozen=True)
class CodeSpec:
    """A length ``n_rows * n_cols`` polar code and its product decomposition.

    ``design`` records where the frozen set came from: ``"product"``,
    ``"hybrid"``, ``"flat"`` (reliability order) or ``"file"``. For product
    and hybrid designs ``row_code`` / ``col_code`` hold the frozen sets the
    design started from.
    """

    frozen: FrozenSet
    n_rows: int
    n_cols: int
    design: str
    profile: ComponentProfile
    row_code: FrozenSet | None = None
    col_code: FrozenSet | None = None

    @property
    def N(self) -> int:
        return self.frozen.length

    @property
    def K(self) -> int:
        return self.frozen.dimension

    @property
    def rate(self) -> float:
        return self.K / self.N

    @cached_property
    def frozen_mask(self) -> np.ndarray:
        return self.frozen.mask

    @cached_property
    def row_masks(self) -> np.ndarray:
        """``(n_rows, n_cols)`` boolean frozen masks of the row codes."""
        return np.stack([f.mask for f in self.profile.row_frozen])

    @cached_property
    def col_masks(self) -> np.ndarray:
        """``(n_cols, n_rows)`` boolean frozen masks of the column codes."""
        return np.stack([f.mask for f in self.profile.col_frozen])

    @property
    def nominal_row_dimension(self) -> int:
        if self.row_code is not None:
            return self.row_code.dimension
        return max(self.profile.row_dimensions)

    @property
    def nominal_col_dimension(self) -> int:
        if self.col_code is not None:
            return self.col_code.dimension
        return max(self.profile.col_dimensions)


def bhattacharyya_parameters(N: int, design_parameter: float = 0.5) -> np.ndarray:
    """Bhattacharyya parameter of each bit channel of ``T_N``.

    Each level maps ``z`` to ``2z - z**2`` (index bit 0) and ``z**2`` (bit 1),
    with the least significant index bit set at the last level.
    """
    n = log2_exact(N)
    if not 0.0 < design_parameter < 1.0:
        raise ValueError("design parameter must lie in (0, 1)")
    z = np.array([design_parameter], dtype=np.float64)
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def bhattacharyya_order(N: int, design_parameter: float = 0.5) -> ReliabilityOrder:
    z = bhattacharyya_parameters(N, design_parameter)
    # lexsort: last key is primary; ties resolved by ascending index
    order = np.lexsort((np.arange(N), -z))
    return ReliabilityOrder(tuple(order.tolist()), design_parameter)


def frozen_from_order(order: ReliabilityOrder, K: int) -> FrozenSet:
    N = order.length
    if not 0 <= K <= N:
        raise ValueError(f"K={K} outside [0, {N}]")
    return FrozenSet(order.order[: N - K], N)


def product_frozen_set(F_r: FrozenSet, F_c: FrozenSet) -> FrozenSet:
    """Frozen set of the product of a row code ``F_r`` and a column code ``F_c``:
    the zeros of ``z_c (x) z_r``."""
    z = np.kron(F_c.indicator(), F_r.indicator())
    return FrozenSet(tuple(np.flatnonzero(z == 0).tolist()), z.size)


def _check_split(F: FrozenSet, N_r: int, N_c: int):
    if not (is_power_of_two(N_r) and is_power_of_two(N_c)):
        raise ValueError("component lengths must be powers of two")
    if N_r * N_c != F.length:
        raise ValueError(f"{N_c}x{N_r} does not match code length {F.length}")


def count_matrices(F: FrozenSet, N_r: int, N_c: int):
    """Return ``(Z, Z_r, Z_c)`` with ``Z_r = Z * T_{N_r}`` and
    ``Z_c = T_{N_c}^T * Z`` computed over the naturals."""
    _check_split(F, N_r, N_c)
    Z = F.indicator().reshape(N_c, N_r)
    Z_r = Z @ transform_matrix(N_r)
    Z_c = transform_matrix(N_c).T @ Z
    return Z, Z_r, Z_c


def component_frozen_sets(F: FrozenSet, N_r: int, N_c: int) -> ComponentProfile:
    """Describe the polar code with frozen set ``F`` as an irregular
    ``N_c x N_r`` product code.

    Row ``i`` freezes the zero entries of row ``i`` of ``Z_c``; column ``j``
    freezes the zero entries of column ``j`` of ``Z_r``.
    """
    _, Z_r, Z_c = count_matrices(F, N_r, N_c)
    rows = tuple(FrozenSet.from_mask(Z_c[i] == 0) for i in range(N_c))
    cols = tuple(FrozenSet.from_mask(Z_r[:, j] == 0) for j in range(N_r))
    return ComponentProfile(rows, cols, Z_r, Z_c)


@lru_cache(maxsize=4096)
def _oracle_supports(N_r: int, N_c: int, i: int, axis: str) -> tuple[tuple[int, ...], ...]:
    """Input positions feeding each virtual bit of component ``i``."""
    if axis == "row":
        M = np.kron(transform_matrix(N_c)[:, [i]], np.eye(N_r, dtype=np.int64))
    elif axis == "col":
        M = np.kron(np.eye(N_c, dtype=np.int64), transform_matrix(N_r)[:, [i]])
    else:
        raise ValueError("axis must be 'row' or 'col'")
    return tuple(tuple(np.flatnonzero(M[:, l]).tolist()) for l in range(M.shape[1]))


def frozen_bit_oracle(F: FrozenSet, N_r: int, N_c: int, i: int, l: int,
                      axis: str = "row") -> bool:
    """Brute-force check whether bit ``l`` of component ``i`` is frozen.

    For a row, the virtual input is ``u . (T_{N_c}[:, i] (x) I_{N_r})``; bit
    ``l`` is frozen when every position of ``u`` feeding it is in ``F``. For
    a column the matrix is ``I_{N_c} (x) T_{N_r}[:, i]``.
    """
    _check_split(F, N_r, N_c)
    return all(j in F for j in _oracle_supports(N_r, N_c, i, axis)[l])


def code_spec(F: FrozenSet, N_r: int, N_c: int, design: str = "flat",
              row_code: FrozenSet | None = None,
              col_code: FrozenSet | None = None) -> CodeSpec:
    return CodeSpec(F, N_c, N_r, design, component_frozen_sets(F, N_r, N_c),
                    row_code, col_code)


def product_code_spec(F_r: FrozenSet, F_c: FrozenSet) -> CodeSpec:
    F = product_frozen_set(F_r, F_c)
    return code_spec(F, F_r.length, F_c.length, "product", F_r, F_c)


def hybrid_frozen_set(F_r: FrozenSet, F_c: FrozenSet, K: int,
                      order: ReliabilityOrder) -> CodeSpec:
    """Product frozen set plus the ``K_r K_c - K`` least reliable positions of
    the full-length code that the product set leaves unfrozen."""
    N_r, N_c = F_r.length, F_c.length
    N = N_r * N_c
    if order.length != N:
        raise ValueError(f"reliability order has length {order.length}, expected {N}")
    base = product_frozen_set(F_r, F_c)
    k_prod = F_r.dimension * F_c.dimension
    if not 0 <= K <= k_prod:
        raise ValueError(f"K={K} must lie in [0, K_r*K_c={k_prod}]")
    extra_needed = k_prod - K
    frozen = base.mask
    extra = [i for i in order.order if not frozen[i]][:extra_needed]
    frozen[extra] = True
    F = FrozenSet.from_mask(frozen)
    return code_spec(F, N_r, N_c, "hybrid", F_r, F_c)


def design_product(N_r: int, K_r: int, N_c: int | None = None, K_c: int | None = None,
                   design_parameter: float = 0.5) -> CodeSpec:
    N_c = N_r if N_c is None else N_c
    K_c = K_r if K_c is None else K_c
    F_r = frozen_from_order(bhattacharyya_order(N_r, design_parameter), K_r)
    F_c = frozen_from_order(bhattacharyya_order(N_c, design_parameter), K_c)
    return product_code_spec(F_r, F_c)


def design_hybrid(N_r: int, K_r: int, K: int, N_c: int | None = None,
                  K_c: int | None = None, design_parameter: float = 0.5) -> CodeSpec:
    N_c = N_r if N_c is None else N_c
    K_c = K_r if K_c is None else K_c
    F_r = frozen_from_order(bhattacharyya_order(N_r, design_parameter), K_r)
    F_c = frozen_from_order(bhattacharyya_order(N_c, design_parameter), K_c)
    order = bhattacharyya_order(N_r * N_c, design_parameter)
    return hybrid_frozen_set(F_r, F_c, K, order)


def design_flat(N: int, K: int, N_r: int, N_c: int | None = None,
                design_parameter: float = 0.5) -> CodeSpec:
    N_c = N // N_r if N_c is None else N_c
    F = frozen_from_order(bhattacharyya_order(N, design_parameter), K)
    return code_spec(F, N_r, N_c, "flat")


def place_information(bits, frozen: FrozenSet) -> np.ndarray:
    """Input vector with ``bits`` on the information positions in ascending
    order (row by row from the top left for a row-major input matrix)."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (frozen.dimension,):
        raise ValueError(f"expected {frozen.dimension} information bits, got {bits.shape}")
    u = np.zeros(frozen.length, dtype=np.uint8)
    u[~frozen.mask] = bits
    return u


# -- text file format ------------------------------------------------------
#
#   N=<int> K=<int>
#   <index>
#   ...
#
# Frozen-set files list frozen indices ascending. Reliability-order files use
# the same header (K optional) and list indices least reliable first.


def _parse_header(line: str) -> dict[str, int]:
    out = {}
    for tok in line.split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise ValueError(f"malformed header token {tok!r}")
        out[key.strip().upper()] = int(val)
    if "N" not in out:
        raise ValueError("header must define N")
    return out


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def write_frozen_file(path, F: FrozenSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_frozen(F))


def format_frozen(F: FrozenSet) -> str:
    lines = [f"N={F.length} K={F.dimension}"]
    lines.extend(str(i) for i in F.indices)
    return "\n".join(lines) + "\n"


def read_frozen_file(path) -> FrozenSet:
    lines = _read_lines(path)
    if not lines:
        raise ValueError(f"{os.fspath(path)}: empty frozen-set file")
    head = _parse_header(lines[0])
    idx = [int(x) for x in lines[1:]]
    if idx != sorted(idx):
        raise ValueError("frozen indices must be ascending")
    F = FrozenSet(tuple(idx), head["N"])
    if "K" in head and head["K"] != F.dimension:
        raise ValueError(f"header K={head['K']} but file lists {len(idx)} frozen indices")
    return F


def format_order(order: ReliabilityOrder, K: int | None = None) -> str:
    head = f"N={order.length}" + (f" K={K}" if K is not None else "")
    return "\n".join([head, *map(str, order.order)]) + "\n"


def write_order_file(path, order: ReliabilityOrder, K: int | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_order(order, K))


def read_order_file(path) -> tuple[ReliabilityOrder, int | None]:
    lines = _read_lines(path)
    head = _parse_header(lines[0])
    order = ReliabilityOrder(tuple(int(x) for x in lines[1:]))
    if order.length != head["N"]:
        raise ValueError("order length does not match header N")
    return order, head.get("K")


def as_frozen_set(indices: Iterable[int], length: int) -> FrozenSet:
    return FrozenSet(tuple(indices), length)
