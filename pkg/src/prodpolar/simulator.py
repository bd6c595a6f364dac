"""AWGN / BPSK Monte-Carlo harness for flat and two-step decoding.

Every frame draws its information bits and noise from a generator keyed by
``(seed, frame index)``, so results do not depend on how frames are spread
over workers. The same key is reused at every SNR point of a grid (common
random numbers), which keeps comparisons between points low-variance.

Frames are processed in fixed-size chunks. The stopping rule is checked on
the chunks in order, so a run with more workers only computes a few chunks
that are later thrown away; it never changes the reported numbers.

A frame counts as a step-2 activation whenever the full-length decoder ran,
including frames whose step-1 agreement was rejected by the frozen-bit check.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import latency
from .construction import (
    CodeSpec,
    design_flat,
    design_hybrid,
    design_product,
    place_information,
    read_frozen_file,
    code_spec,
)
from .polar_core import polar_encode
from .two_step import TwoStepConfig, plain_decode, two_step_decode

WORKERS_ENV = "PRODPOLAR_WORKERS"
CSV_HEADER = ("eb_n0_db", "frames", "ber", "fer", "gamma", "t_avg", "avg_time_steps")
DEFAULT_MAX_FRAMES = 1_000_000
DEFAULT_MIN_FRAME_ERRORS = 100
CHUNK_FRAMES = 256


@dataclass(frozen=True)
class ChannelConfig:
    eb_n0_db: float
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def noise_variance(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.eb_n0_db / 10.0))


@dataclass(frozen=True)
class PlainDecoderConfig:
    """Flat SC or SCL decoding of the whole code, the baseline for the
    two-step decoder."""

    decoder: str = "sc"
    list_size: int = 8
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "decoder", self.decoder.lower())
        if self.decoder not in ("sc", "scl"):
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.list_size < 1:
            raise ValueError("list size must be >= 1")


@dataclass(frozen=True)
class StopRule:
    max_frames: int = DEFAULT_MAX_FRAMES
    min_frame_errors: int = DEFAULT_MIN_FRAME_ERRORS

    def __post_init__(self):
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")


@dataclass
class TrialStats:
    """Counters for one grid point. ``info_bits`` is the number of
    information bits per frame; ``time_steps`` is a histogram.
    ``bit_error_sq_sum`` (sum of squared per-frame bit-error counts) gives
    the frame-level variance needed for BER confidence intervals."""

    eb_n0_db: float
    info_bits: int
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    step2_count: int = 0
    iteration_sum: int = 0
    time_step_sum: int = 0
    time_steps: Counter = field(default_factory=Counter)
    bit_error_sq_sum: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.info_bits) if self.frames else math.nan

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else math.nan

    @property
    def gamma(self) -> float:
        return self.step2_count / self.frames if self.frames else math.nan

    @property
    def t_avg(self) -> float:
        return self.iteration_sum / self.frames if self.frames else math.nan

    @property
    def avg_time_steps(self) -> float:
        return self.time_step_sum / self.frames if self.frames else math.nan

    def ber_interval(self, z: float = 1.96) -> tuple[float, float]:
        """Normal-approximation interval for the BER from per-frame error
        counts (bits of one frame are not independent)."""
        n, k = self.frames, self.info_bits
        mean = self.bit_errors / n
        var = max(self.bit_error_sq_sum / n - mean * mean, 0.0)
        half = z * math.sqrt(var / n)
        return max(mean - half, 0.0) / k, (mean + half) / k

    def gamma_interval(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.step2_count, self.frames, z)

    def merge(self, other: "TrialStats") -> "TrialStats":
        if other.info_bits != self.info_bits or other.eb_n0_db != self.eb_n0_db:
            raise ValueError("cannot merge statistics of different experiments")
        return TrialStats(
            self.eb_n0_db, self.info_bits,
            self.frames + other.frames,
            self.bit_errors + other.bit_errors,
            self.frame_errors + other.frame_errors,
            self.step2_count + other.step2_count,
            self.iteration_sum + other.iteration_sum,
            self.time_step_sum + other.time_step_sum,
            self.time_steps + other.time_steps,
            self.bit_error_sq_sum + other.bit_error_sq_sum,
        )

    def row(self) -> dict:
        return {
            "eb_n0_db": self.eb_n0_db,
            "frames": self.frames,
            "ber": self.ber,
            "fer": self.fer,
            "gamma": self.gamma,
            "t_avg": self.t_avg,
            "avg_time_steps": self.avg_time_steps,
        }

    def as_dict(self) -> dict:
        d = self.row()
        d.update(
            bit_errors=self.bit_errors,
            frame_errors=self.frame_errors,
            step2_count=self.step2_count,
            iteration_sum=self.iteration_sum,
            time_step_sum=self.time_step_sum,
            bit_error_sq_sum=self.bit_error_sq_sum,
            time_steps={str(k): v for k, v in sorted(self.time_steps.items())},
        )
        return d


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("no trials")
    p = successes / trials
    d = 1 + z * z / trials
    c = (p + z * z / (2 * trials)) / d
    h = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / d
    return max(c - h, 0.0), min(c + h, 1.0)


def frame_rng(seed: int, frame: int) -> np.random.Generator:
    """Counter-based generator for one frame."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, frame])))


def modulate_and_transmit(x, ch: ChannelConfig, rng: np.random.Generator) -> np.ndarray:
    """BPSK (0 -> +1, 1 -> -1) over AWGN; returns channel LLRs ``2y / sigma^2``."""
    s = 1.0 - 2.0 * np.asarray(x, dtype=np.float64)
    var = ch.noise_variance
    y = s + math.sqrt(var) * rng.standard_normal(s.shape)
    return 2.0 * y / var


def _decode(y, spec: CodeSpec, cfg):
    """Returns ``(u_hat, step2_used, iterations, time_steps)``."""
    if isinstance(cfg, TwoStepConfig):
        out = two_step_decode(y, spec, cfg)
        return out.u_hat, out.step2_used, out.iterations_used, out.time_steps
    u_hat = plain_decode(y, spec, cfg.decoder, cfg.list_size, cfg.exact)
    variant = "sc-hd" if cfg.decoder == "sc" else "scl-hd"
    return u_hat, True, 0, latency.fallback_delta(variant, spec.N, spec.K)


def simulate_frames(spec: CodeSpec, cfg, ch: ChannelConfig, start: int, count: int) -> TrialStats:
    """Run frames ``start .. start + count - 1`` at one SNR point.

    Flat decoders report every frame as a full-length decode with no
    product iterations.
    """
    info = np.flatnonzero(~spec.frozen_mask)
    stats = TrialStats(ch.eb_n0_db, spec.K)
    for f in range(start, start + count):
        rng = frame_rng(ch.seed, f)
        bits = rng.integers(0, 2, spec.K, dtype=np.uint8)
        x = polar_encode(place_information(bits, spec.frozen))
        y = modulate_and_transmit(x, ch, rng)
        u_hat, step2, iters, steps = _decode(y, spec, cfg)
        errors = int(np.count_nonzero(u_hat[info] != bits))
        stats.frames += 1
        stats.bit_errors += errors
        stats.bit_error_sq_sum += errors * errors
        stats.frame_errors += errors > 0
        stats.step2_count += step2
        stats.iteration_sum += iters
        stats.time_step_sum += steps
        stats.time_steps[steps] += 1
    return stats


def _chunk_job(args):
    return simulate_frames(*args)


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def run_point(spec: CodeSpec, cfg, ch: ChannelConfig, stop: StopRule = StopRule(),
              workers: int | None = None, chunk: int = CHUNK_FRAMES) -> TrialStats:
    workers = worker_count(workers)
    total = TrialStats(ch.eb_n0_db, spec.K)
    jobs = [(spec, cfg, ch, s, min(chunk, stop.max_frames - s))
            for s in range(0, stop.max_frames, chunk)]
    if workers == 1:
        for job in jobs:
            total = total.merge(_chunk_job(job))
            if total.frame_errors >= stop.min_frame_errors:
                break
        return total
    # chunks are merged in submission order; at most 2 * workers are in flight
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = deque()
        it = iter(jobs)
        for job in it:
            pending.append(pool.submit(_chunk_job, job))
            if len(pending) >= 2 * workers:
                break
        while pending:
            total = total.merge(pending.popleft().result())
            if total.frame_errors >= stop.min_frame_errors:
                for fut in pending:
                    fut.cancel()
                break
            job = next(it, None)
            if job is not None:
                pending.append(pool.submit(_chunk_job, job))
    return total


def run_experiment(spec: CodeSpec, cfg, grid, stop: StopRule = StopRule(),
                   workers: int | None = None) -> list[TrialStats]:
    """Simulate every :class:`ChannelConfig` of ``grid`` in order."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty SNR grid")
    return [run_point(spec, cfg, ch, stop, workers) for ch in grid]


def snr_grid(points, rate: float, seed: int = 0) -> list[ChannelConfig]:
    return [ChannelConfig(float(p), rate, seed) for p in points]


# -- output ------------------------------------------------------------------


def format_csv(stats: list[TrialStats]) -> str:
    """CSV text; floats use Python's shortest round-trip representation."""
    if not stats:
        raise ValueError("no statistics to write")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in stats:
        w.writerow([repr(v) if isinstance(v, float) else v for v in s.row().values()])
    return buf.getvalue()


def format_jsonl(stats: list[TrialStats]) -> str:
    if not stats:
        raise ValueError("no statistics to write")
    return "".join(json.dumps(s.as_dict()) + "\n" for s in stats)


def emit_results(stats: list[TrialStats], path, fmt: str = "csv") -> None:
    text = {"csv": format_csv, "jsonl": format_jsonl}[fmt](stats)
    Path(path).write_text(text)


# -- experiment files ----------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    """Parsed ``key = value`` experiment description."""

    spec: CodeSpec
    decoder: TwoStepConfig | PlainDecoderConfig
    grid: list[ChannelConfig]
    stop: StopRule
    output: str | None = None
    jsonl: str | None = None


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(v: str) -> bool:
    v = v.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v: str) -> list[float]:
    """``3,4,5`` or ``start:stop:step`` (stop included)."""
    if ":" in v:
        a, b, s = (float(p) for p in v.split(":"))
        n = int(round((b - a) / s)) + 1
        return [round(a + i * s, 10) for i in range(n)]
    return [float(p) for p in v.replace(",", " ").split()]


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        out[k.lower()] = v
    return out


def _rate_dimension(kv, n: int, dim_key: str, rate_key: str) -> int | None:
    if dim_key in kv:
        return int(kv[dim_key])
    if rate_key in kv:
        return math.ceil(Fraction(kv[rate_key]) * n)
    return None


KNOWN_KEYS = {
    "nr", "nc", "kr", "kc", "rate_r", "rate_c", "k", "rate", "design",
    "frozen_file", "design_parameter", "variant", "decoder", "t", "list_size",
    "saturation", "agreement", "frozen_check", "exact", "channel_weight",
    "snr", "eb_n0_db", "seed", "max_frames", "min_frame_errors", "output", "jsonl",
}


def experiment_from_dict(kv: dict[str, str], base_dir=".") -> Experiment:
    unknown = set(kv) - KNOWN_KEYS
    if unknown:
        raise ValueError(f"unknown keys: {', '.join(sorted(unknown))}")
    N_r = int(kv.get("nr", 32))
    N_c = int(kv.get("nc", N_r))
    z0 = float(kv.get("design_parameter", 0.5))
    design = kv.get("design", "product").lower()

    if "frozen_file" in kv:
        F = read_frozen_file(Path(base_dir) / kv["frozen_file"])
        spec = code_spec(F, N_r, N_c, design="file")
    else:
        K_r = _rate_dimension(kv, N_r, "kr", "rate_r")
        K_c = _rate_dimension(kv, N_c, "kc", "rate_c")
        K = _rate_dimension(kv, N_r * N_c, "k", "rate")
        if design == "product":
            if K_r is None:
                raise ValueError("product design needs kr or rate_r")
            spec = design_product(N_r, K_r, N_c, K_c if K_c is not None else None,
                                  design_parameter=z0)
        elif design == "hybrid":
            if K_r is None or K is None:
                raise ValueError("hybrid design needs kr/rate_r and k/rate")
            spec = design_hybrid(N_r, K_r, K, N_c, K_c, design_parameter=z0)
        elif design == "flat":
            if K is None:
                raise ValueError("flat design needs k or rate")
            spec = design_flat(N_r * N_c, K, N_r, N_c, design_parameter=z0)
        else:
            raise ValueError(f"unknown design {design!r}")

    variant = kv.get("variant", kv.get("decoder", "sc-hd")).lower()
    if variant in ("sc", "scl"):
        decoder = PlainDecoderConfig(variant, int(kv.get("list_size", 8)),
                                     _bool(kv.get("exact", "false")))
    else:
        decoder = TwoStepConfig(
            variant=variant,
            t=int(kv.get("t", 4)),
            list_size=int(kv.get("list_size", 8)),
            saturation=float(kv.get("saturation", 1e3)),
            agreement=float(kv["agreement"]) if "agreement" in kv else None,
            frozen_check=_bool(kv.get("frozen_check", "true")),
            exact=_bool(kv.get("exact", "false")),
            channel_weight=float(kv.get("channel_weight", 0.0)),
        )

    snr = kv.get("snr", kv.get("eb_n0_db"))
    if snr is None:
        raise ValueError("missing snr grid")
    grid = snr_grid(_floats(snr), spec.rate, int(kv.get("seed", 0)))
    stop = StopRule(int(float(kv.get("max_frames", DEFAULT_MAX_FRAMES))),
                    int(float(kv.get("min_frame_errors", DEFAULT_MIN_FRAME_ERRORS))))
    return Experiment(spec, decoder, grid, stop, kv.get("output"), kv.get("jsonl"))


def load_experiment(path) -> Experiment:
    path = Path(path)
    return experiment_from_dict(parse_config_text(path.read_text()), path.parent)
