"""Experiment configuration: JSON blocks mirrored by frozen dataclasses.

Unknown keys anywhere in the file are rejected, so a mistyped knob in a
calibration study fails loudly instead of silently using the default.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .channel import AtgParams, CoverageRule, UmiParams
from .energy import DayPlan
from .exceptions import ConfigError
from .platform import Battery, Hovering, LaserLinkParams, LaserPowered, PowerProfile, Tethered
from .scenario import AreaSpec
from .traffic import ServiceParams, TrafficParams

OUT_DIR_ENV = "RABS_SIM_OUT_DIR"


@dataclass(frozen=True)
class ScenarioBlock:
    width_m: float = 2000.0
    height_m: float = 2000.0
    n_users: int = 100
    user_height_m: float = 1.5
    grid_spacing_m: float = 100.0
    site_height_m: float = 7.0


@dataclass(frozen=True)
class AtgBlock:
    a: float = 9.61
    b: float = 0.16
    eta_los_db: float = 1.0
    eta_nlos_db: float = 20.0


@dataclass(frozen=True)
class ChannelBlock:
    carrier_hz: float = 2e9
    threshold_db: float = 118.0
    fade_margin_db: float = 0.0
    atg: AtgBlock = field(default_factory=AtgBlock)


@dataclass(frozen=True)
class PlatformBlock:
    altitude_m: float = 100.0
    hover_w: float = 170.0
    fly_w: float = 162.0
    comm_w: float = 2.0
    battery_mah: float = 6700.0
    battery_v: float = 14.8
    tether_anchor: tuple = (0.0, 0.0)
    cable_m: float = 150.0
    laser_director: tuple = (0.0, 0.0)
    laser_tx_w: float = 800.0
    laser_conversion_eff: float = 0.25
    laser_attenuation_per_m: float = 1e-4


@dataclass(frozen=True)
class CoverageBlock:
    rabs_k: tuple = tuple(range(1, 21))


@dataclass(frozen=True)
class EnergyBlock:
    horizon_h: float = 24.0
    relocation_fraction: float = 0.5
    relocation_distance_m: float = 500.0
    flight_speed_mps: float = 10.0
    tether_delivery_eff: float = 0.8
    hover_return_w: float = 0.0
    rabs_n: tuple = (8, 10)
    gripper_w: tuple = (0.0, 5.0)


@dataclass(frozen=True)
class TrafficBlock:
    epochs: int = 24
    base_mbps: float = 5.0
    hotspot_count: int = 3
    hotspot_amp_mbps: float = 400.0
    hotspot_sigma_m: float = 200.0
    temporal_profile: str = "raised_cosine"
    walk_step_m: float = 500.0
    node_capacity_mbps: float = 500.0
    serving_radius_m: float = 300.0
    k_pairs: tuple = ((1, 1), (1, 4))


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioBlock = field(default_factory=ScenarioBlock)
    channel: ChannelBlock = field(default_factory=ChannelBlock)
    platform: PlatformBlock = field(default_factory=PlatformBlock)
    coverage: CoverageBlock = field(default_factory=CoverageBlock)
    energy: EnergyBlock = field(default_factory=EnergyBlock)
    traffic: TrafficBlock = field(default_factory=TrafficBlock)
    trials: int = 100
    master_seed: int = 0
    out_dir: str = "results"

    # -- domain objects ------------------------------------------------------

    def area(self) -> AreaSpec:
        return AreaSpec(self.scenario.width_m, self.scenario.height_m)

    def atg_params(self) -> AtgParams:
        a = self.channel.atg
        return AtgParams(a.a, a.b, a.eta_los_db, a.eta_nlos_db, self.channel.carrier_hz)

    def umi_params(self) -> UmiParams:
        return UmiParams(self.channel.carrier_hz, self.scenario.site_height_m, self.scenario.user_height_m)

    def rule(self) -> CoverageRule:
        return CoverageRule(self.channel.threshold_db, self.channel.fade_margin_db)

    def power(self, grasp_w: float = 0.0) -> PowerProfile:
        p = self.platform
        return PowerProfile(p.hover_w, p.fly_w, p.comm_w, grasp_w)

    def battery(self) -> Battery:
        return Battery(self.platform.battery_mah, self.platform.battery_v)

    def hovering(self) -> Hovering:
        return Hovering(self.platform.altitude_m)

    def tethered(self) -> Tethered:
        p = self.platform
        return Tethered(tuple(p.tether_anchor), p.cable_m, p.altitude_m)

    def laser(self) -> LaserPowered:
        p = self.platform
        return LaserPowered(tuple(p.laser_director), p.laser_tx_w, p.altitude_m,
                            LaserLinkParams(p.laser_conversion_eff, p.laser_attenuation_per_m),
                            demand_w=p.hover_w + p.comm_w)

    def day_plan(self) -> DayPlan:
        e = self.energy
        return DayPlan(e.horizon_h, e.relocation_fraction, e.relocation_distance_m, e.flight_speed_mps)

    def traffic_params(self) -> TrafficParams:
        t = self.traffic
        return TrafficParams(t.base_mbps, t.hotspot_count, t.hotspot_amp_mbps, t.hotspot_sigma_m,
                             t.temporal_profile, t.walk_step_m)

    def service(self) -> ServiceParams:
        return ServiceParams(self.traffic.node_capacity_mbps, self.traffic.serving_radius_m)

    def validate(self) -> "ExperimentConfig":
        """Build every domain object once so that bad values fail before any trial runs."""
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        s = self.scenario
        if s.n_users < 0:
            raise ConfigError("n_users must be non-negative")
        if not 0 <= s.user_height_m < s.site_height_m:
            raise ConfigError("user height must be non-negative and below the site height")
        if not s.user_height_m < self.platform.altitude_m:
            raise ConfigError("platform altitude must exceed the user height")
        for build in (self.area, self.atg_params, self.umi_params, self.rule, self.power, self.battery,
                      self.day_plan, self.traffic_params, self.service):
            build()
        if any(k < 1 for k in self.coverage.rabs_k):
            raise ConfigError("rabs_k entries must be >= 1")
        if any(n < 1 for n in self.energy.rabs_n):
            raise ConfigError("rabs_n entries must be >= 1")
        if not 0 < self.energy.tether_delivery_eff <= 1:
            raise ConfigError("tether_delivery_eff must lie in (0, 1]")
        if self.traffic.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if any(len(p) != 2 or min(p) < 1 for p in self.traffic.k_pairs):
            raise ConfigError("k_pairs must be [k_rabs, k_micro] pairs with both >= 1")
        return self

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return _jsonable(dataclasses.asdict(self))

    def config_hash(self) -> str:
        """Digest of everything that affects results (not the output location)."""
        d = self.to_dict()
        d.pop("out_dir")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data, "config")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def with_overrides(self, trials=None, seed=None, out_dir=None) -> "ExperimentConfig":
        out = os.environ.get(OUT_DIR_ENV) or self.out_dir
        if out_dir is not None:
            out = out_dir
        return dataclasses.replace(
            self,
            trials=self.trials if trials is None else trials,
            master_seed=self.master_seed if seed is None else seed,
            out_dir=out,
        )


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _freeze(x):
    if isinstance(x, list):
        return tuple(_freeze(v) for v in x)
    return x


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = fields[name].default_factory() if fields[name].default_factory is not dataclasses.MISSING \
            else fields[name].default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{path}.{name}")
        else:
            if isinstance(default, (int, float)) and not isinstance(default, bool):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{path}.{name}: expected a number, got {value!r}")
                if isinstance(default, int) and not isinstance(default, bool) and float(value) != int(value):
                    raise ConfigError(f"{path}.{name}: expected an integer, got {value!r}")
                value = type(default)(value)
            elif isinstance(default, str) and not isinstance(value, str):
                raise ConfigError(f"{path}.{name}: expected a string, got {value!r}")
            elif isinstance(default, tuple) and not isinstance(value, list):
                raise ConfigError(f"{path}.{name}: expected a list, got {value!r}")
            kwargs[name] = _freeze(value)
    return cls(**kwargs)
