"""Unipolar PAM constellations and modulation-order combinations."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import InfeasibleConstraintError, InvalidParameterError

DEFAULT_MIN_ORDER = 2


def is_power_of_two(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (int(n) & (int(n) - 1)) == 0


@dataclass(frozen=True, order=True)
class ModOrderCombo:
    """Per-LED PAM orders ``[M_1, ..., M_Nt]``, each a power of two.

    Instances compare lexicographically, which the searches rely on for
    tie-breaking.
    """

    orders: tuple

    def __post_init__(self):
        orders = tuple(int(m) for m in self.orders)
        if not orders:
            raise InvalidParameterError("a combination needs at least one LED")
        for m in orders:
            if not is_power_of_two(m):
                raise InvalidParameterError(f"modulation order {m} is not a power of 2")
        object.__setattr__(self, "orders", orders)

    @classmethod
    def parse(cls, text: str) -> "ModOrderCombo":
        """Parse ``"[8,2]"``, ``"8,2"`` or ``"8 2"``."""
        parts = [p for p in re.split(r"[\s,]+", text.strip().strip("[]()")) if p]
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError:
            raise InvalidParameterError(f"cannot parse modulation orders from {text!r}") from None

    def __iter__(self) -> Iterator[int]:
        return iter(self.orders)

    def __len__(self) -> int:
        return len(self.orders)

    def __getitem__(self, j):
        return self.orders[j]

    def __str__(self) -> str:
        return "[" + ",".join(str(m) for m in self.orders) + "]"

    @property
    def total_points(self) -> int:
        return sum(self.orders)


ComboLike = Union[ModOrderCombo, Sequence[int]]


def as_combo(combo: ComboLike) -> ModOrderCombo:
    return combo if isinstance(combo, ModOrderCombo) else ModOrderCombo(tuple(combo))


@dataclass(frozen=True)
class Constellation:
    """Intensity levels ``n P / M`` for ``n = 1..M``; zero is excluded."""

    points: np.ndarray = field(repr=False)
    spacing: float

    @property
    def order(self) -> int:
        return len(self.points)


def constellation(order: int, peak: float) -> Constellation:
    if not is_power_of_two(order):
        raise InvalidParameterError(f"PAM order must be a power of 2, got {order}")
    if not peak > 0.0:
        raise InvalidParameterError(f"peak intensity must be positive, got {peak}")
    points = np.arange(1, order + 1) * (peak / order)
    points[-1] = peak
    return Constellation(points=points, spacing=peak / order)


def selection_probability(combo: ComboLike) -> np.ndarray:
    """LED activation probabilities, proportional to each LED's order."""
    orders = np.asarray(as_combo(combo).orders, dtype=float)
    return orders / orders.sum()


def spectral_efficiency(combo: ComboLike) -> float:
    """Bits per channel use: spatial bits plus the mean signal bits per LED."""
    combo = as_combo(combo)
    n_t = len(combo)
    return math.log2(n_t) + sum(math.log2(m) for m in combo) / n_t


def signal_bit_budget(n_t: int, m: float) -> int:
    """Total signal bits ``sum_j log2 M_j`` implied by spectral efficiency ``m``."""
    if not is_power_of_two(n_t):
        raise InvalidParameterError(f"number of LEDs must be a power of 2, got {n_t}")
    budget = n_t * (m - math.log2(n_t))
    rounded = round(budget)
    if budget < -1e-9 or abs(budget - rounded) > 1e-9:
        raise InfeasibleConstraintError(
            f"m = {m} bit/s/Hz with {n_t} LEDs does not give a whole number of signal bits"
        )
    return int(rounded)


def _compositions(total: int, parts: int, lo: int) -> Iterator[tuple]:
    # lexicographic order on the bit vector equals lexicographic order on the orders
    if parts == 1:
        if total >= lo:
            yield (total,)
        return
    for first in range(lo, total - lo * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, lo):
            yield (first,) + rest


def enumerate_combos(n_t: int, m: float, min_order: int = DEFAULT_MIN_ORDER) -> list:
    """All power-of-two order vectors with every order >= ``min_order`` meeting ``m``.

    Returned in lexicographic order.
    """
    if not is_power_of_two(min_order):
        raise InvalidParameterError(f"min_order must be a power of 2, got {min_order}")
    budget = signal_bit_budget(n_t, m)
    lo = int(math.log2(min_order))
    combos = [
        ModOrderCombo(tuple(1 << b for b in bits))
        for bits in _compositions(budget, n_t, lo)
    ]
    if not combos:
        raise InfeasibleConstraintError(
            f"no combination of orders >= {min_order} on {n_t} LEDs reaches m = {m} bit/s/Hz"
        )
    return combos


def default_min_order(n_t: int, m: float) -> int:
    """2 for adaptive searches, 1 when the budget leaves no signal bits (pure SSK)."""
    return 1 if signal_bit_budget(n_t, m) == 0 else DEFAULT_MIN_ORDER


def uniform_order(n_t: int, m: float) -> int:
    """Common PAM order that an equal-order (SMS) scheme needs to reach ``m``."""
    budget = signal_bit_budget(n_t, m)
    if budget % n_t:
        raise InfeasibleConstraintError(
            f"m = {m} bit/s/Hz cannot be split evenly over {n_t} LEDs"
        )
    return 1 << (budget // n_t)
