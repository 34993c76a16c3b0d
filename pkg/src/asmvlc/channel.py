"""Line-of-sight Lambertian channel between ceiling LEDs and desk photodiodes.

Orientation convention: every LED points straight down (-z) and every
photodiode straight up (+z). Emission and incidence angles are measured
from those normals. Responsivity is folded to 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InvalidParameterError, SingularGeometryError

LED_NORMAL = np.array([0.0, 0.0, -1.0])
PD_NORMAL = np.array([0.0, 0.0, 1.0])

BUILTIN_SCENARIOS = ("scenario1", "scenario2", "scenario3", "scenario4")


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Scenario:
    """Room geometry plus the optical front-end parameters.

    Positions are in meters, angles in degrees, ``detector_area`` in m^2.
    """

    led_positions: tuple
    pd_positions: tuple
    semi_angle_half_power: float = 35.0
    detector_area: float = 1e-4
    fov_half_angle: float = 60.0
    peak_intensity: float = 1.0
    room_dims: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        leds = tuple(tuple(float(c) for c in p) for p in self.led_positions)
        pds = tuple(tuple(float(c) for c in p) for p in self.pd_positions)
        object.__setattr__(self, "led_positions", leds)
        object.__setattr__(self, "pd_positions", pds)
        if self.room_dims is not None:
            object.__setattr__(self, "room_dims", tuple(float(c) for c in self.room_dims))
        self._validate()

    def _validate(self):
        if not self.led_positions:
            raise InvalidParameterError("at least one LED is required")
        if not _is_power_of_two(len(self.led_positions)):
            raise InvalidParameterError(
                f"number of LEDs must be a power of 2, got {len(self.led_positions)}"
            )
        if not self.pd_positions:
            raise InvalidParameterError("at least one photodiode is required")
        for p in self.led_positions + self.pd_positions:
            if len(p) != 3:
                raise InvalidParameterError(f"position {p} is not a 3-vector")
        if not 0.0 < self.semi_angle_half_power < 90.0:
            raise InvalidParameterError("semi-angle at half power must lie in (0, 90) deg")
        if not 0.0 < self.fov_half_angle <= 90.0:
            raise InvalidParameterError("receiver FOV must lie in (0, 90] deg")
        if self.detector_area <= 0.0:
            raise InvalidParameterError("detector area must be positive")
        if self.peak_intensity <= 0.0:
            raise InvalidParameterError("peak intensity must be positive")
        if self.room_dims is not None:
            room = np.asarray(self.room_dims)
            for p in self.led_positions + self.pd_positions:
                if np.any(np.asarray(p) < 0.0) or np.any(np.asarray(p) > room):
                    raise InvalidParameterError(f"position {p} lies outside room {self.room_dims}")

    @property
    def n_t(self) -> int:
        return len(self.led_positions)

    @property
    def n_r(self) -> int:
        return len(self.pd_positions)


@dataclass(frozen=True)
class ChannelMatrix:
    """N_r x N_t nonnegative optical gain matrix; column j belongs to LED j."""

    gains: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.array(self.gains, dtype=float, ndmin=2)
        if g.ndim != 2:
            raise InvalidParameterError("channel gains must form a 2-D matrix")
        if np.any(g < 0.0) or not np.all(np.isfinite(g)):
            raise InvalidParameterError("channel gains must be finite and nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def n_r(self) -> int:
        return self.gains.shape[0]

    @property
    def n_t(self) -> int:
        return self.gains.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.gains[:, j]

    @property
    def dark_columns(self) -> tuple:
        """Indices of LEDs that no photodiode can see."""
        return tuple(int(j) for j in np.flatnonzero(~np.any(self.gains > 0.0, axis=0)))

    def scaled(self, c: float) -> "ChannelMatrix":
        return ChannelMatrix(self.gains * c)

    def to_dict(self) -> dict:
        return {"n_r": self.n_r, "n_t": self.n_t, "gains": self.gains.tolist()}


def as_gain_matrix(H) -> np.ndarray:
    """Accept a ChannelMatrix or anything array-like and return a 2-D float array."""
    if isinstance(H, ChannelMatrix):
        return H.gains
    g = np.asarray(H, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    return g


def lambertian_order(semi_angle_half_power: float) -> float:
    """Lambertian emission order ``-ln 2 / ln cos(semi_angle)`` (angle in degrees)."""
    if not 0.0 < semi_angle_half_power < 90.0:
        raise InvalidParameterError(
            f"semi-angle must lie in (0, 90) deg, got {semi_angle_half_power}"
        )
    return -math.log(2.0) / math.log(math.cos(math.radians(semi_angle_half_power)))


def channel_gain(led_pos: Sequence[float], pd_pos: Sequence[float], scenario: Scenario) -> float:
    """DC gain of the LOS link from one LED to one photodiode.

    Returns 0 when the incidence angle exceeds the receiver FOV or the
    photodiode sits above the LED plane.
    """
    v = np.asarray(pd_pos, dtype=float) - np.asarray(led_pos, dtype=float)
    d = float(np.linalg.norm(v))
    if d == 0.0:
        raise SingularGeometryError(f"LED and photodiode coincide at {tuple(led_pos)}")
    cos_phi = float(np.dot(v, LED_NORMAL)) / d
    cos_psi = float(np.dot(-v, PD_NORMAL)) / d
    if cos_phi <= 0.0 or cos_psi <= 0.0:
        return 0.0
    psi = math.degrees(math.acos(min(cos_psi, 1.0)))
    if psi > scenario.fov_half_angle:
        return 0.0
    k = lambertian_order(scenario.semi_angle_half_power)
    return (k + 1.0) * scenario.detector_area / (2.0 * math.pi * d * d) * cos_phi**k * cos_psi


def build_channel_matrix(scenario: Scenario) -> ChannelMatrix:
    gains = np.array(
        [[channel_gain(led, pd, scenario) for led in scenario.led_positions]
         for pd in scenario.pd_positions]
    )
    H = ChannelMatrix(gains)
    if H.dark_columns:
        warnings.warn(
            f"LED(s) {list(H.dark_columns)} are invisible to every photodiode",
            RuntimeWarning,
            stacklevel=2,
        )
    return H


_REQUIRED_KEYS = ("leds", "pds", "semi_angle_deg", "area_cm2", "fov_deg", "peak_intensity")


def scenario_from_dict(doc: dict, name: str = "") -> Scenario:
    """Build a Scenario from the JSON document layout (area given in cm^2)."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a JSON object")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise ConfigError(f"scenario is missing key '{key}'")
    try:
        leds = [tuple(float(c) for c in p) for p in doc["leds"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key 'leds' is malformed: {exc}") from None
    try:
        pds = [tuple(float(c) for c in p) for p in doc["pds"]]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key 'pds' is malformed: {exc}") from None
    scalars = {}
    for key in _REQUIRED_KEYS[2:]:
        try:
            scalars[key] = float(doc[key])
        except (TypeError, ValueError):
            raise ConfigError(f"key '{key}' must be a number") from None
    room = doc.get("room")
    if room is not None:
        try:
            room = tuple(float(c) for c in room)
        except (TypeError, ValueError):
            raise ConfigError("key 'room' must be an [x, y, z] array") from None
    try:
        return Scenario(
            led_positions=leds,
            pd_positions=pds,
            semi_angle_half_power=scalars["semi_angle_deg"],
            detector_area=scalars["area_cm2"] * 1e-4,
            fov_half_angle=scalars["fov_deg"],
            peak_intensity=scalars["peak_intensity"],
            room_dims=room,
            name=name or str(doc.get("name", "")),
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None


def load_scenario(path) -> Scenario:
    """Read a scenario JSON file, or one of the bundled names ``scenario1``..``scenario4``."""
    if str(path) in BUILTIN_SCENARIOS:
        text = resources.files("asmvlc.scenarios").joinpath(f"{path}.json").read_text()
        name = str(path)
    else:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file {p}: {exc.strerror}") from None
        name = p.stem
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file is not valid JSON: {exc}") from None
    return scenario_from_dict(doc, name=name)
