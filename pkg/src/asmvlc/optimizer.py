"""Modulation-order selection under a fixed spectral efficiency.

``asm_search`` scores every feasible combination with the closed-form SER.
``cr_asm_search`` first keeps only the combinations whose order variance
is the smallest or second-smallest distinct value, then scores those.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .channel import as_gain_matrix
from .errors import InvalidParameterError
from .modulation import ComboLike, ModOrderCombo, as_combo, default_min_order, enumerate_combos
from .ser import average_ser


@dataclass(frozen=True)
class RankedCandidate:
    combo: ModOrderCombo
    ser: float
    log_ser: float
    variance: float


@dataclass(frozen=True)
class SearchReport:
    scheme: str
    best_combo: ModOrderCombo
    best_ser: float
    best_log_ser: float
    candidates_evaluated: int
    candidates_total: int
    operating_sigma: float
    ranked: tuple = field(repr=False)
    reduced_set: tuple = ()

    @property
    def ssk_equivalent(self) -> bool:
        return all(m == 1 for m in self.best_combo)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "best_combo": list(self.best_combo),
            "best_ser": self.best_ser,
            "best_log_ser": self.best_log_ser,
            "candidates_evaluated": self.candidates_evaluated,
            "candidates_total": self.candidates_total,
            "operating_sigma": self.operating_sigma,
            "ssk_equivalent": self.ssk_equivalent,
            "reduced_set": [list(c) for c in self.reduced_set],
            "ranked": [
                {"combo": list(r.combo), "ser": r.ser, "log_ser": r.log_ser, "variance": r.variance}
                for r in self.ranked
            ],
        }


def _exact_variance(combo: ComboLike) -> Fraction:
    orders = [Fraction(m) for m in as_combo(combo)]
    mean = sum(orders) / len(orders)
    return sum((m - mean) ** 2 for m in orders) / len(orders)


def combo_variance(combo: ComboLike) -> float:
    """Population variance of the orders in a combination."""
    return float(_exact_variance(combo))


def low_variance_candidates(combos) -> list:
    """Combinations whose variance is the smallest or second-smallest distinct value."""
    variances = [_exact_variance(c) for c in combos]
    keep = set(sorted(set(variances))[:2])
    return [c for c, v in zip(combos, variances) if v in keep]


def _score(H, combos, peak, sigma, workers):
    def one(c):
        b = average_ser(H, c, peak, sigma)
        return RankedCandidate(c, b.average, b.log_average, combo_variance(c))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(one, combos))
    else:
        scored = [one(c) for c in combos]
    # the log value separates candidates whose SER underflows to zero
    return tuple(sorted(scored, key=lambda r: (r.ser, r.log_ser, r.combo)))


def _prepare(H, n_t, m, min_order):
    H = as_gain_matrix(H)
    if n_t != H.shape[1]:
        raise InvalidParameterError(f"n_t = {n_t} but H has {H.shape[1]} columns")
    if min_order is None:
        min_order = default_min_order(n_t, m)
    return H, enumerate_combos(n_t, m, min_order)


def asm_search(H, n_t: int, m: float, peak: float, sigma: float,
               min_order: Optional[int] = None, workers: int = 1) -> SearchReport:
    """Exhaustive search for the combination with the lowest average SER."""
    H, combos = _prepare(H, n_t, m, min_order)
    ranked = _score(H, combos, peak, sigma, workers)
    best = ranked[0]
    return SearchReport(
        scheme="ASM",
        best_combo=best.combo,
        best_ser=best.ser,
        best_log_ser=best.log_ser,
        candidates_evaluated=len(ranked),
        candidates_total=len(combos),
        operating_sigma=sigma,
        ranked=ranked,
    )


def cr_asm_search(H, n_t: int, m: float, peak: float, sigma: float,
                  min_order: Optional[int] = None, workers: int = 1) -> SearchReport:
    """Search restricted to the two lowest variance classes of combinations."""
    H, combos = _prepare(H, n_t, m, min_order)
    reduced = low_variance_candidates(combos)
    ranked = _score(H, reduced, peak, sigma, workers)
    best = ranked[0]
    return SearchReport(
        scheme="CR-ASM",
        best_combo=best.combo,
        best_ser=best.ser,
        best_log_ser=best.log_ser,
        candidates_evaluated=len(ranked),
        candidates_total=len(combos),
        operating_sigma=sigma,
        ranked=ranked,
        reduced_set=tuple(reduced),
    )
