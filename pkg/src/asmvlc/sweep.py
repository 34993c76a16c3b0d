"""SNR sweeps over the ASM, CR-ASM, SMS and SSK schemes with CSV output."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .channel import build_channel_matrix, load_scenario
from .errors import ConfigError
from .modulation import ModOrderCombo, spectral_efficiency, uniform_order
from .montecarlo import SimConfig, simulate_ser
from .optimizer import asm_search, cr_asm_search
from .ser import average_ser, snr_db_to_sigma

SCHEMES = ("ASM", "CR-ASM", "SMS", "SSK")
ADAPTIVE = ("ASM", "CR-ASM")
CSV_COLUMNS = ("snr_db", "sigma", "scheme", "combo", "m", "ser_theory", "ser_sim",
               "trials", "std_error", "seed")


@dataclass(frozen=True)
class SweepSpec:
    """One SNR sweep.

    ``operating_snr_db`` pins the SNR at which adaptive schemes pick their
    combination; left as None they re-optimize at every grid point.
    ``trials = 0`` skips simulation.
    """

    scenario_path: str
    snr_start_db: float
    snr_stop_db: float
    snr_step_db: float
    schemes: tuple = SCHEMES
    spectral_efficiency: Optional[float] = None
    combo_override: Optional[ModOrderCombo] = None
    trials: int = 0
    seed: int = 0
    early_stop_errors: Optional[int] = None
    batch_size: Optional[int] = None
    operating_snr_db: Optional[float] = None
    output_path: Optional[str] = None

    def __post_init__(self):
        schemes = tuple(s.upper() for s in self.schemes)
        if not schemes:
            raise ConfigError("at least one scheme must be requested")
        unknown = [s for s in schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown scheme(s) {unknown}; choose from {list(SCHEMES)}")
        object.__setattr__(self, "schemes", tuple(dict.fromkeys(schemes)))
        if not self.snr_step_db > 0:
            raise ConfigError("snr_step_db must be positive")
        if self.snr_start_db > self.snr_stop_db:
            raise ConfigError("snr_start_db must not exceed snr_stop_db")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if self.spectral_efficiency is None and any(s != "SSK" for s in schemes):
            raise ConfigError("spectral_efficiency is required for ASM, CR-ASM and SMS")

    def snr_grid(self) -> list:
        n = int(math.floor((self.snr_stop_db - self.snr_start_db) / self.snr_step_db + 1e-9)) + 1
        return [round(self.snr_start_db + i * self.snr_step_db, 9) for i in range(n)]


@dataclass(frozen=True)
class SerPoint:
    snr_db: float
    sigma: float
    scheme: str
    combo: ModOrderCombo
    m: float
    ser_theory: float
    ser_sim: Optional[float]
    trials: int
    std_error: Optional[float]
    seed: int

    def csv_row(self) -> list:
        def num(x):
            return "" if x is None else repr(float(x))

        return [num(self.snr_db), num(self.sigma), self.scheme, str(self.combo),
                num(self.m), num(self.ser_theory), num(self.ser_sim), str(self.trials),
                num(self.std_error), str(self.seed)]


def _scheme_combo(scheme, H, n_t, m, peak, sigma, override):
    if scheme == "SSK":
        return ModOrderCombo((1,) * n_t)
    if scheme == "SMS":
        return ModOrderCombo((uniform_order(n_t, m),) * n_t)
    if override is not None:
        return override
    search = asm_search if scheme == "ASM" else cr_asm_search
    return search(H, n_t, m, peak, sigma).best_combo


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Theory (and optionally simulated) SER for every grid point and scheme.

    Rows come back sorted by (snr_db, scheme order) and are written to
    ``spec.output_path`` when it is set.
    """
    scenario = load_scenario(spec.scenario_path)
    H = build_channel_matrix(scenario)
    n_t, peak = H.n_t, scenario.peak_intensity
    m = spec.spectral_efficiency
    if spec.combo_override is not None and len(spec.combo_override) != n_t:
        raise ConfigError(f"combo_override has {len(spec.combo_override)} orders, scenario has {n_t} LEDs")

    fixed = {}
    if spec.operating_snr_db is not None:
        op_sigma = snr_db_to_sigma(spec.operating_snr_db, peak)
        for s in spec.schemes:
            fixed[s] = _scheme_combo(s, H, n_t, m, peak, op_sigma, spec.combo_override)

    tasks = [(snr, s) for snr in spec.snr_grid() for s in spec.schemes]

    def point(task):
        snr, scheme = task
        sigma = snr_db_to_sigma(snr, peak)
        combo = fixed.get(scheme) or _scheme_combo(scheme, H, n_t, m, peak, sigma, spec.combo_override)
        theory = average_ser(H, combo, peak, sigma).average
        ser_sim = std = None
        trials = 0
        if spec.trials > 0:
            cfg = SimConfig(trials=spec.trials, seed=spec.seed, sigma=sigma,
                            early_stop_errors=spec.early_stop_errors, batch_size=spec.batch_size)
            res = simulate_ser(H, combo, peak, cfg)
            ser_sim, std, trials = res.ser_estimate, res.std_error, res.trials_run
        return SerPoint(snr, sigma, scheme, combo, spectral_efficiency(combo), theory,
                        ser_sim, trials, std, spec.seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, tasks))
    else:
        rows = [point(t) for t in tasks]
    order = {s: i for i, s in enumerate(SCHEMES)}
    rows.sort(key=lambda r: (r.snr_db, order[r.scheme]))
    if spec.output_path:
        write_csv(rows, spec.output_path)
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def write_csv(rows, path) -> None:
    """Write atomically so a failed run never leaves a partial file."""
    path = Path(path)
    text = rows_to_csv(rows)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
