"""Day-long energy ledgers for each platform kind and cross-platform ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ConfigError, InfeasibleError
from .platform import Battery, Hovering, LaserPowered, MicroBS, PowerProfile, Rabs, Tethered

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class DayPlan:
    horizon_h: float = 24.0
    relocation_fraction: float = 0.5
    relocation_distance_m: float = 500.0
    flight_speed_mps: float = 10.0

    def __post_init__(self):
        if not self.horizon_h > 0:
            raise ConfigError("horizon_h must be positive")
        if not 0 <= self.relocation_fraction <= 1:
            raise ConfigError("relocation_fraction must lie in [0, 1]")
        if self.relocation_distance_m < 0:
            raise ConfigError("relocation_distance_m must be non-negative")
        if not self.flight_speed_mps > 0:
            raise ConfigError("flight_speed_mps must be positive")


@dataclass(frozen=True)
class LedgerEntry:
    platform: str
    n: int
    gripper_w: float
    propulsion_wh: float
    grasp_wh: float
    comm_wh: float
    delivery_overhead_wh: float
    # None for platforms fed from the ground (tether, laser) that never swap batteries
    battery_wh: float | None = None

    @property
    def total_wh(self) -> float:
        return self.propulsion_wh + self.grasp_wh + self.comm_wh + self.delivery_overhead_wh

    @property
    def recharge_count(self) -> int | None:
        """Battery recharges for the whole swarm over the horizon."""
        if self.battery_wh is None:
            return None
        return math.floor(self.total_wh / self.battery_wh)

    @property
    def recharges_per_unit(self) -> int | None:
        if self.battery_wh is None:
            return None
        return math.floor(self.total_wh / self.n / self.battery_wh)


def recharge_count(total_wh: float, battery: Battery = Battery()) -> int:
    return math.floor(total_wh / battery.energy_wh)


def relocation_energy_wh(n: int, profile: PowerProfile, plan: DayPlan) -> float:
    """Flight energy of the relocating share of the swarm, summed over the horizon."""
    flight_s = plan.relocation_distance_m / plan.flight_speed_mps
    per_hour = plan.relocation_fraction * n * flight_s * profile.fly_w / SECONDS_PER_HOUR
    return per_hour * plan.horizon_h


def day_energy(kind, n: int, profile: PowerProfile = PowerProfile(), plan: DayPlan = DayPlan(), *,
               battery: Battery = Battery(), tether_delivery_eff: float = 0.8,
               hover_return_w: float = 0.0) -> LedgerEntry:
    """Energy ledger of ``n`` platforms of ``kind`` over ``plan.horizon_h`` hours.

    Tethered platforms are charged at the wall, i.e. including the tether's
    delivery loss; laser-powered ones at the director's full optical draw.
    ``hover_return_w`` is an optional average surcharge for battery-swap
    return flights of hovering platforms.
    """
    if n < 1:
        raise ConfigError("swarm size must be at least 1")
    h = plan.horizon_h
    comm = n * profile.comm_w * h
    if isinstance(kind, Hovering):
        return LedgerEntry("hovering", n, 0.0, n * profile.hover_w * h, 0.0, comm,
                           n * hover_return_w * h, battery.energy_wh)
    if isinstance(kind, Tethered):
        if not 0 < tether_delivery_eff <= 1:
            raise ConfigError("tether_delivery_eff must lie in (0, 1]")
        prop = n * profile.hover_w * h
        loss = (prop + comm) * (1.0 / tether_delivery_eff - 1.0)
        return LedgerEntry("tethered", n, 0.0, prop, 0.0, comm, loss)
    if isinstance(kind, LaserPowered):
        prop = n * profile.hover_w * h
        drawn = n * kind.laser_tx_w * h
        if drawn < prop + comm:
            raise InfeasibleError(f"laser draw {kind.laser_tx_w} W is below the platform's consumption")
        return LedgerEntry("laser", n, 0.0, prop, 0.0, comm, drawn - prop - comm)
    if isinstance(kind, Rabs):
        return LedgerEntry("rabs", n, profile.grasp_w, relocation_energy_wh(n, profile, plan),
                           n * profile.grasp_w * h, comm, 0.0, battery.energy_wh)
    if isinstance(kind, MicroBS):
        raise ConfigError("micro base stations are mains powered and have no energy ledger")
    raise TypeError(f"unknown platform kind {type(kind).__name__}")


def efficiency_ratio(reference: LedgerEntry, rabs: LedgerEntry) -> float:
    if not rabs.total_wh > 0:
        raise ConfigError("RABS ledger total must be positive")
    return reference.total_wh / rabs.total_wh
