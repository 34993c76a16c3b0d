"""Closed-form average SER of adaptive spatial modulation.

The per-LED error splits into a spatial part (wrong active LED, nearest
cross-LED neighbour approximation) and a signal part (wrong PAM level with
the LED detected correctly)::

    P_ej = P_aj + (1 - P_aj) * P_sj
    P_e  = sum_j M_j / sum_i M_i * P_ej

Every Q argument is a distance over ``2 sigma``, so scaling the channel and
the noise together leaves all probabilities unchanged. Alongside each
probability a natural-log value is kept; those stay finite after the
probability itself underflows, which lets the optimizer rank very
high-SNR candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, log_ndtr, logsumexp

from .channel import as_gain_matrix
from .errors import InvalidParameterError, NotApplicableError
from .modulation import ComboLike, as_combo, constellation, is_power_of_two

_SQRT2 = math.sqrt(2.0)


def q_function(x):
    """Gaussian tail probability ``Q(x) = P[N(0,1) > x]``.

    Scalars in, float out; arrays in, arrays out.
    """
    out = 0.5 * erfc(np.asarray(x, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def log_q_function(x):
    """``ln Q(x)``, finite far past the point where ``Q`` underflows."""
    out = log_ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def _check_sigma(sigma: float):
    if not sigma > 0.0 or math.isnan(sigma):
        raise InvalidParameterError(f"noise sigma must be positive, got {sigma}")


def _received_points(H: np.ndarray, j: int, order: int, peak: float) -> np.ndarray:
    """Noiseless received vectors of LED ``j`` as columns, shape (N_r, order)."""
    return np.outer(H[:, j], constellation(order, peak).points)


def min_intra_distance(h_j, order: int, peak: float) -> float:
    """Distance between adjacent received levels of one LED: ``(P/M) * ||h_j||``."""
    if not is_power_of_two(order):
        raise InvalidParameterError(f"PAM order must be a power of 2, got {order}")
    if order == 1:
        raise NotApplicableError("a single-level constellation has no intra-LED distance")
    return peak / order * float(np.linalg.norm(np.asarray(h_j, dtype=float)))


def signal_domain_error(h_j, order: int, peak: float, sigma: float) -> float:
    """PAM symbol error given the right LED: ``2(M-1)/M * Q(d_min / 2 sigma)``."""
    _check_sigma(sigma)
    if order == 1:
        return 0.0
    d_min = min_intra_distance(h_j, order, peak)
    return 2.0 * (order - 1) / order * q_function(d_min / (2.0 * sigma))


def _log_signal_domain_error(h_j, order: int, peak: float, sigma: float) -> float:
    if order == 1:
        return -math.inf
    d_min = min_intra_distance(h_j, order, peak)
    return math.log(2.0 * (order - 1) / order) + log_q_function(d_min / (2.0 * sigma))


def cross_min_distances(H, combo: ComboLike, peak: float, j: int) -> np.ndarray:
    """``D_jq`` for every level ``q`` of LED ``j`` (0-based), as an array of length M_j.

    Each entry is the smallest distance from that received point to any
    received point of a different LED, found by checking all of them.
    """
    H = as_gain_matrix(H)
    combo = as_combo(combo)
    n_t = H.shape[1]
    if len(combo) != n_t:
        raise InvalidParameterError(f"combo has {len(combo)} orders but H has {n_t} columns")
    if n_t < 2:
        raise NotApplicableError("cross-LED distance needs at least two LEDs")
    own = _received_points(H, j, combo[j], peak)
    others = np.hstack([_received_points(H, i, combo[i], peak) for i in range(n_t) if i != j])
    diff = own[:, :, None] - others[:, None, :]
    return np.sqrt(np.sum(diff * diff, axis=0)).min(axis=1)


def cross_min_distance(H, combo: ComboLike, peak: float, j: int, q: int) -> float:
    """``D_jq`` for LED ``j`` and level ``q`` (both 0-based)."""
    return float(cross_min_distances(H, combo, peak, j)[q])


def spatial_domain_error(H, combo: ComboLike, peak: float, sigma: float, j: int) -> float:
    """Probability of picking the wrong LED: mean over levels of ``Q(D_jq / 2 sigma)``."""
    _check_sigma(sigma)
    d = cross_min_distances(H, combo, peak, j)
    return float(np.mean(q_function(d / (2.0 * sigma))))


def _log_spatial_domain_error(H, combo, peak, sigma, j) -> float:
    d = cross_min_distances(H, combo, peak, j)
    return float(logsumexp(log_q_function(d / (2.0 * sigma)))) - math.log(len(d))


def per_led_ser(H, combo: ComboLike, peak: float, sigma: float, j: int) -> float:
    H = as_gain_matrix(H)
    combo = as_combo(combo)
    p_a = spatial_domain_error(H, combo, peak, sigma, j)
    p_s = signal_domain_error(H[:, j], combo[j], peak, sigma)
    return combine_errors(p_a, p_s)


def combine_errors(p_a: float, p_s: float) -> float:
    """Symbol error from spatial and conditional signal error probabilities."""
    return p_a + (1.0 - p_a) * p_s


@dataclass(frozen=True)
class LedError:
    p_a: float
    p_s: float
    p_e: float
    log_p_e: float


@dataclass(frozen=True)
class SerBreakdown:
    """Per-LED error terms and their selection-weighted average."""

    per_led: tuple
    average: float
    log_average: float
    noise_sigma: float
    weights: tuple

    def to_dict(self) -> dict:
        return {
            "average": self.average,
            "log_average": self.log_average,
            "noise_sigma": self.noise_sigma,
            "per_led": [
                {"p_a": e.p_a, "p_s": e.p_s, "p_e": e.p_e, "weight": w}
                for e, w in zip(self.per_led, self.weights)
            ],
        }


def average_ser(H, combo: ComboLike, peak: float, sigma: float) -> SerBreakdown:
    H = as_gain_matrix(H)
    combo = as_combo(combo)
    _check_sigma(sigma)
    total = combo.total_points
    leds = []
    weights = []
    average = 0.0
    log_terms = []
    for j in range(len(combo)):
        p_a = spatial_domain_error(H, combo, peak, sigma, j)
        p_s = signal_domain_error(H[:, j], combo[j], peak, sigma)
        p_e = combine_errors(p_a, p_s)

        log_p_a = _log_spatial_domain_error(H, combo, peak, sigma, j)
        log_p_s = _log_signal_domain_error(H[:, j], combo[j], peak, sigma)
        log_p_e = float(np.logaddexp(log_p_a, math.log1p(-p_a) + log_p_s))

        w = combo[j] / total
        average += w * p_e
        log_terms.append(math.log(w) + log_p_e)
        weights.append(w)
        leds.append(LedError(p_a=p_a, p_s=p_s, p_e=p_e, log_p_e=log_p_e))
    return SerBreakdown(
        per_led=tuple(leds),
        average=average,
        log_average=float(logsumexp(log_terms)),
        noise_sigma=sigma,
        weights=tuple(weights),
    )


def ssk_ser(H, peak: float, sigma: float) -> float:
    """Space shift keying: every LED sends the single level ``P``."""
    n_t = as_gain_matrix(H).shape[1]
    return average_ser(H, [1] * n_t, peak, sigma).average


def sms_ser(H, order: int, peak: float, sigma: float) -> float:
    """Spatial modulation with the same PAM order on every LED."""
    if not is_power_of_two(order) or order < 2:
        raise InvalidParameterError(f"SMS order must be a power of 2 >= 2, got {order}")
    n_t = as_gain_matrix(H).shape[1]
    return average_ser(H, [order] * n_t, peak, sigma).average


def snr_db_to_sigma(snr_db: float, peak: float) -> float:
    """Noise standard deviation for ``SNR = 10 log10(P^2 / sigma^2)``."""
    return peak * 10.0 ** (-snr_db / 20.0)


def sigma_to_snr_db(sigma: float, peak: float) -> float:
    return 20.0 * math.log10(peak / sigma)
