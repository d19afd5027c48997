"""Platform taxonomy, feasibility regions and auxiliary physical models."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .exceptions import ConfigError, DomainError, EmptyRegionError, ExtrapolationWarning, InfeasibleError
from .scenario import SiteGrid

DEFAULT_ALTITUDE_M = 100.0
GRAVITY = 9.8


@dataclass(frozen=True)
class PowerProfile:
    hover_w: float = 170.0
    fly_w: float = 162.0
    comm_w: float = 2.0
    grasp_w: float = 0.0

    def __post_init__(self):
        if min(self.hover_w, self.fly_w, self.comm_w, self.grasp_w) < 0:
            raise ConfigError("power values must be non-negative")
        if self.grasp_w > self.fly_w:
            raise ConfigError("grasping power cannot exceed flying power")


@dataclass(frozen=True)
class Battery:
    capacity_mah: float = 6700.0
    nominal_v: float = 14.8

    def __post_init__(self):
        if not (self.capacity_mah > 0 and self.nominal_v > 0):
            raise ConfigError("battery capacity and voltage must be positive")

    @property
    def energy_wh(self) -> float:
        return self.capacity_mah * self.nominal_v / 1000.0


@dataclass(frozen=True)
class LaserLinkParams:
    """Power-beaming link: received power = eff * P_tx * exp(-attenuation * d)."""

    conversion_eff: float = 0.25
    attenuation_per_m: float = 1e-4

    def __post_init__(self):
        if not 0 < self.conversion_eff <= 1:
            raise ConfigError("conversion_eff must lie in (0, 1]")
        if self.attenuation_per_m < 0:
            raise ConfigError("attenuation_per_m must be non-negative")


@dataclass(frozen=True)
class GripperSpec:
    friction_coeff: float = 0.1
    safety_factor: float = 2.0
    g: float = GRAVITY

    def __post_init__(self):
        if not self.friction_coeff > 0:
            raise ConfigError("friction_coeff must be positive")
        if self.safety_factor < 1:
            raise ConfigError("safety_factor must be >= 1")


@dataclass(frozen=True)
class Hovering:
    altitude_m: float = DEFAULT_ALTITUDE_M


@dataclass(frozen=True)
class Tethered:
    anchor: tuple[float, float] = (0.0, 0.0)
    cable_m: float = 150.0
    altitude_m: float = DEFAULT_ALTITUDE_M


@dataclass(frozen=True)
class LaserPowered:
    director: tuple[float, float] = (0.0, 0.0)
    laser_tx_w: float = 800.0
    altitude_m: float = DEFAULT_ALTITUDE_M
    link: LaserLinkParams = field(default_factory=LaserLinkParams)
    # the platform hovers while serving: hover + comm
    demand_w: float = 172.0


@dataclass(frozen=True)
class Rabs:
    grid: SiteGrid


@dataclass(frozen=True)
class MicroBS:
    sites: SiteGrid


PlatformKind = Union[Hovering, Tethered, LaserPowered, Rabs, MicroBS]


class Disk(NamedTuple):
    center: tuple[float, float]
    radius: float

    def project(self, points) -> np.ndarray:
        """Nearest point of the disk for each row of ``points``."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        if math.isinf(self.radius):
            return p.copy()
        c = np.asarray(self.center, dtype=float)
        v = p - c
        n = np.hypot(v[:, 0], v[:, 1])
        scale = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return c + v * scale[:, None]


WHOLE_PLANE = Disk((0.0, 0.0), math.inf)


def critical_charging_distance(laser_tx_w: float, link: LaserLinkParams, demand_w: float) -> float:
    """Largest director-to-platform distance at which harvested power still meets demand."""
    if not demand_w > 0:
        raise ConfigError("demand_w must be positive")
    available = link.conversion_eff * laser_tx_w
    if available < demand_w:
        raise InfeasibleError(
            f"laser delivers at most {available:.1f} W at zero range, below the {demand_w:.1f} W demand")
    if link.attenuation_per_m == 0:
        return math.inf
    return math.log(available / demand_w) / link.attenuation_per_m


def _ball_slice(reach: float, altitude: float, what: str) -> float:
    if reach < altitude:
        raise EmptyRegionError(f"{what} of {reach:.1f} m cannot reach the {altitude:.1f} m operating altitude")
    return math.sqrt(reach**2 - altitude**2)


def feasible_horizontal_region(kind: PlatformKind) -> Disk | SiteGrid:
    """Where the platform may be placed in the horizontal plane."""
    if isinstance(kind, Hovering):
        return WHOLE_PLANE
    if isinstance(kind, Tethered):
        return Disk(tuple(kind.anchor), _ball_slice(kind.cable_m, kind.altitude_m, "cable"))
    if isinstance(kind, LaserPowered):
        d_c = critical_charging_distance(kind.laser_tx_w, kind.link, kind.demand_w)
        if math.isinf(d_c):
            return Disk(tuple(kind.director), math.inf)
        return Disk(tuple(kind.director), _ball_slice(d_c, kind.altitude_m, "critical charging distance"))
    if isinstance(kind, Rabs):
        return kind.grid
    if isinstance(kind, MicroBS):
        return kind.sites
    raise TypeError(f"unknown platform kind {type(kind).__name__}")


def gripper_holding_force(mass_kg: float, spec: GripperSpec = GripperSpec()) -> float:
    """Normal force a two-finger friction grip needs to hold ``mass_kg``: s * m * g / mu."""
    if mass_kg < 0:
        raise ConfigError("mass must be non-negative")
    return spec.safety_factor * mass_kg * spec.g / spec.friction_coeff


# (total mass kg, flight time min): empty airframe and maximum take-off weight
ENDURANCE_CALIBRATION = ((6.3, 55.0), (9.0, 31.0))


def propulsion_power(total_mass_kg: float, battery: Battery = Battery(),
                     calib=ENDURANCE_CALIBRATION) -> float:
    """Propulsion power in W, linear in mass through the two calibration points."""
    (m1, t1), (m2, t2) = calib
    p1 = battery.energy_wh / (t1 / 60.0)
    p2 = battery.energy_wh / (t2 / 60.0)
    return p1 + (p2 - p1) * (total_mass_kg - m1) / (m2 - m1)


def flight_endurance(total_mass_kg: float, battery: Battery = Battery(),
                     calib=ENDURANCE_CALIBRATION) -> float:
    """Flight time in minutes for the given take-off mass."""
    (m1, _), (m2, _) = calib
    if not min(m1, m2) <= total_mass_kg <= max(m1, m2):
        warnings.warn(f"mass {total_mass_kg} kg outside calibrated range [{min(m1, m2)}, {max(m1, m2)}]",
                      ExtrapolationWarning, stacklevel=2)
    p = propulsion_power(total_mass_kg, battery, calib)
    if p <= 0:
        raise DomainError(f"linear power model gives {p:.2f} W at {total_mass_kg} kg")
    return 60.0 * battery.energy_wh / p


def noise_at_distance(ref_level_db: float, ref_distance_m: float, distance_m: float) -> float:
    """Free-field spherical spreading: -20 log10 of the distance ratio."""
    if not (ref_distance_m > 0 and distance_m > 0):
        raise DomainError("distances must be positive")
    return ref_level_db - 20.0 * math.log10(distance_m / ref_distance_m)


class NoiseSample(NamedTuple):
    status: str
    altitude_m: float
    lateral_m: float
    noise_db: float


# Flyover measurements of a DJI Matrice 600 Pro (status, altitude, lateral offset, level).
NOISE_TABLE: tuple[NoiseSample, ...] = (
    NoiseSample("hovering", 9.18, 0.0, 89.6),
    NoiseSample("hovering", 9.18, 2.45, 88.7),
    NoiseSample("hovering", 9.18, 5.28, 87.3),
    NoiseSample("hovering", 9.18, 9.14, 83.7),
    NoiseSample("hovering", 9.18, 15.84, 79.2),
    NoiseSample("flying", 7.5, 0.0, 85.3),
    NoiseSample("flying", 7.5, 2.45, 84.0),
    NoiseSample("flying", 7.5, 5.28, 82.7),
    NoiseSample("flying", 7.5, 9.14, 79.6),
    NoiseSample("flying", 7.5, 15.84, 75.9),
)


def predict_noise_table(table=NOISE_TABLE) -> list[tuple[NoiseSample, float]]:
    """Predict every row from the zero-lateral row of the same status."""
    refs = {row.status: row for row in table if row.lateral_m == 0}
    out = []
    for row in table:
        ref = refs[row.status]
        slant = math.hypot(row.altitude_m, row.lateral_m)
        out.append((row, noise_at_distance(ref.noise_db, ref.altitude_m, slant)))
    return out
