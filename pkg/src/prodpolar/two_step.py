"""Two-step decoding: product decoding first, full-length polar decoding on
failure.

The received LLRs are arranged row by row into an ``n_rows x n_cols`` matrix.
Step 1 decodes every row with its row code and every column with its column
code, for up to ``t`` iterations, exchanging either hard decisions (SC-HD,
SCL-HD) or list-based soft outputs (SCL-SD) between the two directions. When
row and column estimates agree, the input vector is recovered by re-encoding
the agreed codeword (``T_N`` is an involution). Otherwise step 2 decodes the
original LLR vector with a full-length SC or SCL decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import latency
from .construction import CodeSpec
from .decoders import (
    sc_decode_batch,
    scl_decode_batch,
    soft_output_from_lists,
)
from .polar_core import encode_along_last_axis, row_flatten

DEFAULT_SATURATION = 1e3


@dataclass(frozen=True)
class TwoStepConfig:
    """Decoder settings.

    ``saturation`` stands in for an infinite LLR when a bit is pinned by the
    other direction; ``agreement`` is the soft value given to bits on which
    all list candidates agree (defaults to ``saturation``).
    ``channel_weight`` adds a multiple of the channel LLRs to the exchanged
    soft values (0 means plain substitution).
    """

    variant: str = "sc-hd"
    t: int = 4
    list_size: int = 8
    saturation: float = DEFAULT_SATURATION
    agreement: float | None = None
    frozen_check: bool = True
    exact: bool = False
    channel_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", self.variant.lower())
        if self.variant not in latency.VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")
        if self.saturation <= 0:
            raise ValueError("saturation must be positive")
        if self.agreement is not None and self.agreement <= 0:
            raise ValueError("agreement constant must be positive")

    @property
    def agreement_value(self) -> float:
        return self.saturation if self.agreement is None else self.agreement

    @property
    def uses_list(self) -> bool:
        return self.variant != "sc-hd"


@dataclass
class TwoStepOutcome:
    u_hat: np.ndarray
    iterations_used: int
    step2_used: bool
    time_steps: int
    agreement_achieved: bool
    frozen_check_failed: bool = False

    def as_dict(self) -> dict:
        return {
            "u_hat": self.u_hat.tolist(),
            "iterations_used": self.iterations_used,
            "step2_used": self.step2_used,
            "time_steps": self.time_steps,
            "agreement_achieved": self.agreement_achieved,
            "frozen_check_failed": self.frozen_check_failed,
        }


@dataclass(frozen=True)
class MismatchReport:
    err_rows: tuple[int, ...]
    err_cols: tuple[int, ...]


def find_erroneous(X_d) -> MismatchReport:
    """Greedy localisation of the rows and columns holding the mismatches.

    Repeatedly flags the row or column with the most remaining mismatches
    (rows only win a strict majority; ties among rows or among columns go to
    the lowest index) and clears it, until no mismatch is left.
    """
    X = np.array(X_d, dtype=np.int64, copy=True)
    err_rows: list[int] = []
    err_cols: list[int] = []
    row_counts = X.sum(axis=1)
    col_counts = X.sum(axis=0)
    while row_counts.sum() + col_counts.sum() > 0:
        e_r = int(np.argmax(row_counts))
        e_c = int(np.argmax(col_counts))
        if row_counts[e_r] > col_counts[e_c]:
            err_rows.append(e_r)
            X[e_r, :] = 0
        else:
            err_cols.append(e_c)
            X[:, e_c] = 0
        row_counts = X.sum(axis=1)
        col_counts = X.sum(axis=0)
    return MismatchReport(tuple(err_rows), tuple(err_cols))


def update_llrs_hd(Y_rows, Y_cols, report: MismatchReport, X_from_rows, X_from_cols,
                   saturation: float = DEFAULT_SATURATION):
    """Hard-decision LLR update between iterations.

    A flagged row is pinned to the column decoders' bits (``+S`` for 0,
    ``-S`` for 1) wherever its column is not flagged; a flagged column is
    pinned to the row decoders' bits wherever its row is not flagged.
    Crossings of a flagged row and a flagged column become erasures (0).
    Unflagged lines are returned unchanged.
    """
    Y_r = np.array(Y_rows, dtype=np.float64, copy=True)
    Y_c = np.array(Y_cols, dtype=np.float64, copy=True)
    rows = list(report.err_rows)
    cols = list(report.err_cols)
    if rows:
        Y_r[rows, :] = saturation * (1.0 - 2.0 * np.asarray(X_from_cols)[rows, :])
        if cols:
            Y_r[np.ix_(rows, cols)] = 0.0
    if cols:
        Y_c[:, cols] = saturation * (1.0 - 2.0 * np.asarray(X_from_rows)[:, cols])
        if rows:
            Y_c[np.ix_(rows, cols)] = 0.0
    return Y_r, Y_c


def step1_sd_exchange(lam_rows, lam_cols, Y=None, channel_weight: float = 0.0):
    """Soft exchange: the row decoders' output feeds the column decoders and
    vice versa. Returns the next ``(Y_rows, Y_cols)``."""
    Y_r = np.array(lam_cols, dtype=np.float64, copy=True)
    Y_c = np.array(lam_rows, dtype=np.float64, copy=True)
    if channel_weight and Y is not None:
        Y_r += channel_weight * Y
        Y_c += channel_weight * Y
    return Y_r, Y_c


def _decode_lines(llrs, masks, cfg: TwoStepConfig, soft: bool = False):
    """Decode each row of ``llrs``; returns ``(codewords, soft_output)``."""
    if not cfg.uses_list:
        u, _ = sc_decode_batch(llrs, masks, cfg.exact)
        return encode_along_last_axis(u), None
    u, pm, _ = scl_decode_batch(llrs, masks, cfg.list_size, cfg.exact)
    if not soft:
        return encode_along_last_axis(u[:, 0]), None
    x = encode_along_last_axis(u)
    return x[:, 0], soft_output_from_lists(x, pm, cfg.agreement_value)


def full_length_decode(y, spec: CodeSpec, cfg: TwoStepConfig) -> np.ndarray:
    """Step 2: SC (SC-HD) or SCL (list variants) on the whole code."""
    y = np.asarray(y, dtype=np.float64)[None, :]
    mask = spec.frozen_mask[None, :]
    if cfg.uses_list:
        u, _, _ = scl_decode_batch(y, mask, cfg.list_size, cfg.exact)
        return u[0, 0].copy()
    u, _ = sc_decode_batch(y, mask, cfg.exact)
    return u[0].copy()


def _step_costs(spec: CodeSpec, cfg: TwoStepConfig) -> tuple[int, int]:
    per_iter = latency.iteration_delta(
        cfg.variant, spec.n_cols, spec.n_rows,
        spec.nominal_row_dimension, spec.nominal_col_dimension)
    return per_iter, latency.fallback_delta(cfg.variant, spec.N, spec.K)


def two_step_decode(Y, spec: CodeSpec, cfg: TwoStepConfig = TwoStepConfig()) -> TwoStepOutcome:
    """Decode one received word (``n_rows x n_cols`` LLR matrix, or the flat
    length-N vector) of the code described by ``spec``."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        if Y.shape[0] != spec.N:
            raise ValueError(f"LLR vector of length {Y.shape[0]} for a length-{spec.N} code")
        Y = Y.reshape(spec.n_rows, spec.n_cols)
    if Y.shape != (spec.n_rows, spec.n_cols):
        raise ValueError(f"LLR matrix {Y.shape} does not match {spec.n_rows}x{spec.n_cols}")

    per_iter, fallback = _step_costs(spec, cfg)
    row_masks, col_masks = spec.row_masks, spec.col_masks
    soft = cfg.variant == "scl-sd"
    Y_r, Y_c = Y, Y
    X_rows = np.zeros(Y.shape, dtype=np.uint8)
    X_cols = np.zeros(Y.shape, dtype=np.uint8)
    rows = np.arange(spec.n_rows)
    cols = np.arange(spec.n_cols)
    steps = 0
    agreed = False
    rejected = False

    for it in range(1, cfg.t + 1):
        steps += per_iter
        if soft:
            X_rows, lam_rows = _decode_lines(Y_r, row_masks, cfg, soft=True)
            xc, lc = _decode_lines(Y_c.T, col_masks, cfg, soft=True)
            X_cols, lam_cols = xc.T, lc.T
        else:
            if rows.size:
                X_rows[rows] = _decode_lines(Y_r[rows], row_masks[rows], cfg)[0]
            if cols.size:
                X_cols[:, cols] = _decode_lines(Y_c[:, cols].T, col_masks[cols], cfg)[0].T

        if np.array_equal(X_rows, X_cols):
            agreed = True
            u_hat = encode_along_last_axis(row_flatten(X_rows))
            if cfg.frozen_check and u_hat[spec.frozen_mask].any():
                rejected = True
                break
            return TwoStepOutcome(u_hat, it, False, steps, True)
        if it == cfg.t:
            break
        if soft:
            Y_r, Y_c = step1_sd_exchange(lam_rows, lam_cols, Y, cfg.channel_weight)
        else:
            report = find_erroneous(X_rows ^ X_cols)
            Y_r, Y_c = update_llrs_hd(Y_r, Y_c, report, X_rows, X_cols, cfg.saturation)
            rows = np.array(report.err_rows, dtype=np.int64)
            cols = np.array(report.err_cols, dtype=np.int64)

    u_hat = full_length_decode(row_flatten(Y), spec, cfg)
    return TwoStepOutcome(u_hat, it, True, steps + fallback, agreed, rejected)


def plain_decode(y, spec: CodeSpec, decoder: str = "sc", list_size: int = 8,
                 exact: bool = False) -> np.ndarray:
    """Flat SC / SCL decoding of the whole code (no product step)."""
    y = np.asarray(y, dtype=np.float64).reshape(1, -1)
    mask = spec.frozen_mask[None, :]
    if decoder == "scl":
        u, _, _ = scl_decode_batch(y, mask, list_size, exact)
        return u[0, 0].copy()
    if decoder != "sc":
        raise ValueError(f"unknown decoder {decoder!r}")
    u, _ = sc_decode_batch(y, mask, exact)
    return u[0].copy()
