"""SC and SCL decoding of polar codes, plus soft output from list candidates.

LLRs follow ``log(P(0) / P(1))``; a zero LLR is decided as 0.

Two arithmetic modes are available. ``exact=False`` (default) uses the
min-sum check-node update and the hardware path metric, which adds ``|alpha|``
whenever a decision disagrees with the sign of its LLR. ``exact=True`` uses
the exact box-plus and adds ``log(1 + exp(-(1 - 2u) alpha))``, so the final
metric of a path equals ``-log P(x | y)`` and SCL with a full list is ML.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .construction import FrozenSet
from .polar_core import encode_along_last_axis, log2_exact


@dataclass
class ListCandidate:
    u_hat: np.ndarray
    x_hat: np.ndarray
    metric: float


def _prepare(y, frozen) -> tuple[np.ndarray, np.ndarray]:
    y = np.ascontiguousarray(y, dtype=np.float64)
    if isinstance(frozen, FrozenSet):
        mask = frozen.mask
    else:
        mask = np.asarray(frozen, dtype=bool)
    if y.ndim != 1:
        raise ValueError("expected a 1-D LLR vector")
    if mask.shape != y.shape:
        raise ValueError(f"LLR length {y.shape[0]} does not match code length {mask.shape[0]}")
    log2_exact(y.shape[0])
    return y, np.ascontiguousarray(mask)


def sc_decode(y, frozen, exact: bool = False) -> ListCandidate:
    """Successive-cancellation estimate of the input vector behind ``y``."""
    y, mask = _prepare(y, frozen)
    u = np.zeros(y.shape[0], dtype=np.uint8)
    metric = _kernels.sc_kernel(y, mask, exact, u)
    return ListCandidate(u, encode_along_last_axis(u), float(metric))


def scl_decode(y, frozen, L: int, exact: bool = False) -> list[ListCandidate]:
    """List decoding; survivors are returned best (lowest metric) first."""
    if L < 1:
        raise ValueError("list size must be >= 1")
    y, mask = _prepare(y, frozen)
    N = y.shape[0]
    u = np.zeros((L, N), dtype=np.uint8)
    pm = np.full(L, np.inf)
    count = _kernels.scl_kernel(y, mask, int(L), exact, u, pm)
    x = encode_along_last_axis(u[:count])
    return [ListCandidate(u[r].copy(), x[r], float(pm[r])) for r in range(count)]


# -- batched forms used by the product decoder ------------------------------


def sc_decode_batch(llrs: np.ndarray, masks: np.ndarray, exact: bool = False):
    """Decode every row of ``llrs`` with the frozen mask on the same row of
    ``masks``. Returns ``(u, metrics)``."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    masks = np.ascontiguousarray(masks, dtype=bool)
    u = np.zeros(llrs.shape, dtype=np.uint8)
    pm = np.zeros(llrs.shape[0])
    _kernels.sc_batch(llrs, masks, exact, u, pm)
    return u, pm


def scl_decode_batch(llrs: np.ndarray, masks: np.ndarray, L: int, exact: bool = False):
    """Batched list decoding. Returns ``(u, metrics, counts)`` with shapes
    ``(B, L, N)``, ``(B, L)`` and ``(B,)``; unused list slots carry an
    infinite metric."""
    if L < 1:
        raise ValueError("list size must be >= 1")
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    masks = np.ascontiguousarray(masks, dtype=bool)
    B, N = llrs.shape
    u = np.zeros((B, L, N), dtype=np.uint8)
    pm = np.full((B, L), np.inf)
    counts = np.zeros(B, dtype=np.int64)
    _kernels.scl_batch(llrs, masks, int(L), exact, u, pm, counts)
    return u, pm, counts


def soft_output_from_lists(x: np.ndarray, metrics: np.ndarray, agreement: float) -> np.ndarray:
    """Vectorised soft output over a batch of candidate lists.

    ``x`` has shape ``(B, L, N)`` and ``metrics`` ``(B, L)`` (``inf`` marks an
    unused slot). For every bit, the result is the best metric among
    candidates with a 1 minus the best among candidates with a 0, or
    ``+-agreement`` when the candidates are unanimous.
    """
    pm = metrics[:, :, None]
    ones = x.astype(bool)
    best1 = np.where(ones, pm, np.inf).min(axis=1)
    best0 = np.where(~ones, pm, np.inf).min(axis=1)
    with np.errstate(invalid="ignore"):
        lam = best1 - best0
    lam = np.where(np.isinf(best1), agreement, lam)
    lam = np.where(np.isinf(best0), -agreement, lam)
    return lam


def list_soft_output(candidates: list[ListCandidate], agreement: float) -> np.ndarray:
    """Bitwise soft output of a candidate list (best candidate first)."""
    if not candidates:
        raise ValueError("candidate list is empty")
    if agreement <= 0:
        raise ValueError("agreement constant must be positive")
    x = np.stack([c.x_hat for c in candidates])[None]
    pm = np.array([[c.metric for c in candidates]], dtype=np.float64)
    return soft_output_from_lists(x, pm, agreement)[0]
