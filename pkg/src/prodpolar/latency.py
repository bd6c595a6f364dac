"""Time-step latency model for flat and two-step decoding.

A fully parallel SC decoder needs ``2N - 2`` steps for a length-``N`` code
and an SCL decoder ``2N + K - 2``. A two-step decoder spends one component
decode per product iteration and pays the full-length decode only on the
fraction ``gamma`` of frames that fall back to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

VARIANTS = ("sc-hd", "scl-hd", "scl-sd")


def _check_variant(variant: str) -> str:
    v = variant.lower()
    if v not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return v


def delta_sc(N: int) -> int:
    return 2 * N - 2


def delta_scl(N: int, K: int) -> int:
    return 2 * N + K - 2


def component_delta(variant: str, N: int, K: int) -> int:
    return delta_sc(N) if _check_variant(variant) == "sc-hd" else delta_scl(N, K)


def iteration_delta(variant: str, N_r: int, N_c: int, K_r: int, K_c: int) -> int:
    """Steps spent on one row/column iteration.

    Hard-decision variants decode rows and columns concurrently, so only the
    longer component counts; the soft variant runs them one after the other.
    """
    v = _check_variant(variant)
    if v == "scl-sd":
        return delta_scl(N_r, K_r) + delta_scl(N_c, K_c)
    if N_r > N_c:
        n, k = N_r, K_r
    elif N_c > N_r:
        n, k = N_c, K_c
    else:
        n, k = N_r, max(K_r, K_c)
    return component_delta(v, n, k)


def fallback_delta(variant: str, N: int, K: int) -> int:
    return component_delta(variant, N, K)


def expected_latency(variant: str, N_r: int, N_c: int, K_r: int, K_c: int, K: int,
                     t_avg: float, gamma: float) -> float:
    """Expected time steps of the two-step decoder for a length ``N_r * N_c``
    code of dimension ``K``."""
    return (t_avg * iteration_delta(variant, N_r, N_c, K_r, K_c)
            + gamma * fallback_delta(variant, N_r * N_c, K))


def latency_bounds(variant: str, N_r: int, N_c: int, K_r: int, K_c: int, K: int,
                   t: int = 4) -> tuple[float, float]:
    """(worst case, best case): ``t_avg = t, gamma = 1`` and ``t_avg = 1, gamma = 0``."""
    worst = expected_latency(variant, N_r, N_c, K_r, K_c, K, t, 1.0)
    best = expected_latency(variant, N_r, N_c, K_r, K_c, K, 1, 0.0)
    return worst, best


def gamma_max_sc(N_r: int, N: int, t_avg: float, approximate: bool = False) -> float:
    """Largest fallback rate for which SC-HD on an ``N_r x N_r`` product code
    beats plain SC on a length-``N`` code."""
    if approximate:
        return (N / N_r - t_avg) / N_r
    return (t_avg * (1 - N_r) + N - 1) / (N_r ** 2 - 1)


def gamma_max_scl(N_r: int, N: int, R: float, R_r: float, t_avg: float,
                  approximate: bool = True) -> float:
    """SCL counterpart of :func:`gamma_max_sc`; ``R`` is the rate of the
    competing length-``N`` code and ``R_r`` the component rate (the product
    code has rate ``R_r**2``). The approximate form drops the ``-2`` terms."""
    if approximate:
        return (N / N_r * (2 + R) - t_avg * (2 + R_r)) / (N_r * (2 + R_r ** 2))
    num = N * (2 + R) - 2 - t_avg * (N_r * (2 + R_r) - 2)
    return num / (N_r ** 2 * (2 + R_r ** 2) - 2)


@dataclass(frozen=True)
class LatencyRow:
    N: int
    K: int
    N_r: int
    K_r: int
    delta_sc: int
    sc_hd: tuple[float, float]
    delta_scl: int
    scl_hd: tuple[float, float]
    scl_sd: tuple[float, float]


def latency_row(N_r: int, K_r: int, K: int, t: int = 4) -> LatencyRow:
    """Square ``N_r x N_r`` product code with components of dimension ``K_r``
    and overall dimension ``K``."""
    N = N_r * N_r
    return LatencyRow(
        N, K, N_r, K_r,
        delta_sc(N),
        latency_bounds("sc-hd", N_r, N_r, K_r, K_r, K, t),
        delta_scl(N, K),
        latency_bounds("scl-hd", N_r, N_r, K_r, K_r, K, t),
        latency_bounds("scl-sd", N_r, N_r, K_r, K_r, K, t),
    )


def row_from_component_rate(N_r: int, R_r: Fraction, t: int = 4) -> LatencyRow:
    """Row for a square product code of nominal component rate ``R_r``:
    ``K_r = ceil(R_r N_r)`` and ``K = ceil(R_r**2 N)``."""
    R_r = Fraction(R_r)
    K_r = math.ceil(R_r * N_r)
    K = math.ceil(R_r * R_r * N_r * N_r)
    return latency_row(N_r, K_r, K, t)


# Component lengths and rates of the reference latency table.
REFERENCE_CODES = [
    (n_r, rate)
    for n_r in (32, 64, 128, 256, 512)
    for rate in (Fraction(7, 8), Fraction(9, 10))
]


def reference_table(t: int = 4) -> list[LatencyRow]:
    return [row_from_component_rate(n_r, r, t) for n_r, r in REFERENCE_CODES]


def format_table(rows: list[LatencyRow]) -> str:
    head = ("N", "K", "dSC", "SC-HD WC", "SC-HD BC", "dSCL",
            "SCL-HD WC", "SCL-HD BC", "SCL-SD WC", "SCL-SD BC")
    lines = [" ".join(f"{h:>10}" for h in head)]
    for r in rows:
        vals = (r.N, r.K, r.delta_sc, *r.sc_hd, r.delta_scl, *r.scl_hd, *r.scl_sd)
        lines.append(" ".join(f"{_fmt(v):>10}" for v in vals))
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return f"{v:g}" if isinstance(v, float) else str(v)
