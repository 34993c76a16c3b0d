"""Monte-Carlo link simulation with an exhaustive ML detector.

Trials are grouped into fixed-size batches. Batch ``b`` draws from a
Philox generator keyed by the seed with ``b`` in the counter's high word,
so every batch has its own stream and results do not depend on how many
workers process the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import as_gain_matrix
from .errors import InvalidParameterError
from .modulation import ComboLike, as_combo, constellation

DEFAULT_BATCH_SIZE = 1 << 16


@dataclass(frozen=True)
class TransmitVector:
    led: int
    point: int
    intensity: float

    def as_array(self, n_t: int) -> np.ndarray:
        x = np.zeros(n_t)
        x[self.led] = self.intensity
        return x


@dataclass(frozen=True, order=True)
class DetectionOutcome:
    led: int
    point: int


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings. ``batch_size`` defaults to ``min(65536, trials)``."""

    trials: int
    seed: int
    sigma: float
    early_stop_errors: Optional[int] = None
    batch_size: Optional[int] = None

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameterError("seed must fit in an unsigned 64-bit integer")
        if not self.sigma > 0.0 or math.isnan(self.sigma):
            raise InvalidParameterError(f"noise sigma must be positive, got {self.sigma}")
        if self.early_stop_errors is not None and int(self.early_stop_errors) < 1:
            raise InvalidParameterError("early_stop_errors must be >= 1 when set")
        batch = min(DEFAULT_BATCH_SIZE, int(self.trials)) if self.batch_size is None else int(self.batch_size)
        if not 1 <= batch <= int(self.trials):
            raise InvalidParameterError("batch_size must lie in [1, trials]")
        object.__setattr__(self, "batch_size", batch)

    @property
    def n_batches(self) -> int:
        return -(-self.trials // self.batch_size)


@dataclass(frozen=True)
class SimResult:
    ser_estimate: float
    error_count: int
    trials_run: int
    std_error: float
    spatial_error_rate: float
    signal_error_rate_given_spatial_correct: float
    spatial_error_count: int
    signal_error_count: int
    per_led_trials: tuple
    per_led_spatial_errors: tuple
    per_led_errors: tuple

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def candidate_points(H, combo: ComboLike, peak: float):
    """All noiseless received vectors in (led, point) lexicographic order.

    Returns ``(points, led_index, point_index)`` where ``points`` has shape
    ``(N_r, sum M_j)``.
    """
    H = as_gain_matrix(H)
    combo = as_combo(combo)
    if len(combo) != H.shape[1]:
        raise InvalidParameterError(f"combo has {len(combo)} orders but H has {H.shape[1]} columns")
    cols, leds, pts = [], [], []
    for j, order in enumerate(combo):
        levels = constellation(order, peak).points
        cols.append(np.outer(H[:, j], levels))
        leds.extend([j] * order)
        pts.extend(range(order))
    return np.hstack(cols), np.array(leds), np.array(pts)


def draw_symbol(combo: ComboLike, rng: np.random.Generator, peak: float = 1.0) -> TransmitVector:
    """LED ``j`` with probability ``M_j / sum M``, then a uniform level of that LED."""
    combo = as_combo(combo)
    k = int(rng.integers(0, combo.total_points))
    for j, order in enumerate(combo):
        if k < order:
            return TransmitVector(led=j, point=k, intensity=(k + 1) * peak / order)
        k -= order
    raise AssertionError("unreachable")


def ml_detect(y, H, combo: ComboLike, peak: float, form: str = "direct") -> DetectionOutcome:
    """Maximum-likelihood (minimum Euclidean distance) detection of one received vector.

    ``form="expanded"`` uses ``||c||^2 - 2 y.c`` instead of ``||y - c||^2``.
    Ties go to the lexicographically smallest ``(led, point)``.
    """
    points, leds, pts = candidate_points(H, combo, peak)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != points.shape[0]:
        raise InvalidParameterError(f"y has {y.shape[0]} entries, expected {points.shape[0]}")
    if form == "direct":
        diff = points - y[:, None]
        metric = np.sum(diff * diff, axis=0)
    elif form == "expanded":
        metric = np.sum(points * points, axis=0) - 2.0 * (y @ points)
    else:
        raise InvalidParameterError(f"unknown metric form {form!r}")
    k = int(np.argmin(metric))
    return DetectionOutcome(led=int(leds[k]), point=int(pts[k]))


def batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, batch_index]))


def _run_batch(points, energy, leds, sigma, seed, batch_index, n):
    rng = batch_rng(seed, batch_index)
    n_r, n_cand = points.shape
    sent = rng.integers(0, n_cand, size=n)
    noise = rng.standard_normal((n, n_r)) * sigma
    y = points.T[sent] + noise
    detected = np.argmin(energy[None, :] - 2.0 * (y @ points), axis=1)

    n_t = int(leds[-1]) + 1
    true_led = leds[sent]
    symbol_err = detected != sent
    spatial_err = leds[detected] != true_led
    return (
        int(symbol_err.sum()),
        int(spatial_err.sum()),
        int((symbol_err & ~spatial_err).sum()),
        np.bincount(true_led, minlength=n_t),
        np.bincount(true_led[spatial_err], minlength=n_t),
        np.bincount(true_led[symbol_err], minlength=n_t),
    )


def simulate_ser(H, combo: ComboLike, peak: float, config: SimConfig, workers: int = 1) -> SimResult:
    """Empirical SER of the ML receiver under i.i.d. real Gaussian noise per photodiode."""
    if workers < 1:
        raise InvalidParameterError("workers must be >= 1")
    points, leds, _ = candidate_points(H, combo, peak)
    energy = np.sum(points * points, axis=0)
    n_t = len(as_combo(combo))

    sizes = [
        min(config.batch_size, config.trials - b * config.batch_size)
        for b in range(config.n_batches)
    ]

    def job(b):
        return _run_batch(points, energy, leds, config.sigma, config.seed, b, sizes[b])

    errors = spatial = signal = trials = 0
    led_trials = np.zeros(n_t, dtype=np.int64)
    led_spatial = np.zeros(n_t, dtype=np.int64)
    led_errors = np.zeros(n_t, dtype=np.int64)
    stop = False
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for start in range(0, config.n_batches, workers):
            wave = range(start, min(start + workers, config.n_batches))
            # merge in batch order so early stopping lands on the same batch for any worker count
            for b, out in zip(wave, pool.map(job, wave)):
                errors += out[0]
                spatial += out[1]
                signal += out[2]
                led_trials += out[3]
                led_spatial += out[4]
                led_errors += out[5]
                trials += sizes[b]
                if config.early_stop_errors is not None and errors >= config.early_stop_errors:
                    stop = True
                    break
            if stop:
                break

    p = errors / trials
    spatial_ok = trials - spatial
    return SimResult(
        ser_estimate=p,
        error_count=errors,
        trials_run=trials,
        std_error=math.sqrt(p * (1.0 - p) / trials),
        spatial_error_rate=spatial / trials,
        signal_error_rate_given_spatial_correct=signal / spatial_ok if spatial_ok else 0.0,
        spatial_error_count=spatial,
        signal_error_count=signal,
        per_led_trials=tuple(int(v) for v in led_trials),
        per_led_spatial_errors=tuple(int(v) for v in led_spatial),
        per_led_errors=tuple(int(v) for v in led_errors),
    )
