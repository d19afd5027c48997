"""Path-loss models and the coverage-radius solver.

Two mean (probability-weighted) path-loss models are provided:

* an air-to-ground model for high-altitude platforms, with a sigmoid
  line-of-sight probability in the elevation angle and fixed excess losses
  on top of free-space loss;
* the 3GPP urban micro street-canyon model for low-altitude nodes
  (perched RABS, lamppost micro cells).

Both are monotone in horizontal distance at fixed heights, which lets the
coverage test collapse to a disk of radius :func:`coverage_radius`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConfigError, DegenerateCoverageWarning, DomainError
from .scenario import DEFAULT_USER_HEIGHT_M, LinkGeometry

SPEED_OF_LIGHT = 299_792_458.0

BISECTION_TOL_M = 0.1
BISECTION_MAX_ITER = 200
_MIN_D2D = 1e-3  # radius search starts here; UMi is undefined at d2d == 0


@dataclass(frozen=True)
class AtgParams:
    """Air-to-ground environment constants (urban set by default)."""

    a: float = 9.61
    b: float = 0.16
    eta_los_db: float = 1.0
    eta_nlos_db: float = 20.0
    carrier_hz: float = 2e9

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigError("sigmoid parameters a, b must be positive")
        if not 0 <= self.eta_los_db <= self.eta_nlos_db:
            raise ConfigError("need 0 <= eta_los_db <= eta_nlos_db")
        if not self.carrier_hz > 0:
            raise ConfigError("carrier_hz must be positive")


@dataclass(frozen=True)
class UmiParams:
    carrier_hz: float = 2e9
    bs_height_m: float = 7.0
    ut_height_m: float = DEFAULT_USER_HEIGHT_M

    def __post_init__(self):
        if not self.carrier_hz > 0:
            raise ConfigError("carrier_hz must be positive")
        if not self.bs_height_m > self.ut_height_m:
            raise ConfigError("bs_height_m must exceed ut_height_m")


@dataclass(frozen=True)
class CoverageRule:
    """A user is covered when its mean path loss does not exceed ``threshold_db``.

    ``fade_margin_db`` is an optional shadowing allowance subtracted from the
    threshold; it is zero by default so coverage stays a pure function of
    geometry.
    """

    threshold_db: float = 118.0
    fade_margin_db: float = 0.0

    def __post_init__(self):
        if not self.threshold_db > 0:
            raise ConfigError("threshold_db must be positive")
        if self.fade_margin_db < 0:
            raise ConfigError("fade_margin_db must be non-negative")

    @property
    def effective_db(self) -> float:
        return self.threshold_db - self.fade_margin_db


def free_space_path_loss(d3d, carrier_hz: float):
    return 20.0 * np.log10(4.0 * math.pi * carrier_hz * np.asarray(d3d, dtype=float) / SPEED_OF_LIGHT)


def atg_los_probability(elevation_deg, p: AtgParams = AtgParams()):
    """Sigmoid LoS probability ``1 / (1 + a exp(-b (theta - a)))``, theta in degrees."""
    theta = np.asarray(elevation_deg, dtype=float)
    out = 1.0 / (1.0 + p.a * np.exp(-p.b * (theta - p.a)))
    return float(out) if out.ndim == 0 else out


def atg_mean_path_loss(g: LinkGeometry, p: AtgParams = AtgParams()):
    d3d = np.asarray(g.d3d, dtype=float)
    if np.any(d3d <= 0):
        raise DomainError("air-to-ground path loss needs a positive slant distance")
    p_los = atg_los_probability(g.elevation_deg, p)
    pl = free_space_path_loss(d3d, p.carrier_hz) + p_los * p.eta_los_db + (1.0 - p_los) * p.eta_nlos_db
    return float(pl) if np.ndim(pl) == 0 else pl


def umi_los_probability(d2d):
    d = np.asarray(d2d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        far = 18.0 / d + np.exp(-d / 36.0) * (1.0 - 18.0 / d)
    out = np.where(d <= 18.0, 1.0, far)
    return float(out) if out.ndim == 0 else out


def umi_breakpoint_distance(p: UmiParams) -> float:
    # effective environment height of 1 m
    return 4.0 * (p.bs_height_m - 1.0) * (p.ut_height_m - 1.0) * p.carrier_hz / SPEED_OF_LIGHT


def umi_los_path_loss(g: LinkGeometry, p: UmiParams = UmiParams()):
    d2d = np.asarray(g.d2d, dtype=float)
    d3d = np.asarray(g.d3d, dtype=float)
    f_ghz = p.carrier_hz / 1e9
    d_bp = umi_breakpoint_distance(p)
    near = 32.4 + 21.0 * np.log10(d3d) + 20.0 * np.log10(f_ghz)
    far = (32.4 + 40.0 * np.log10(d3d) + 20.0 * np.log10(f_ghz)
           - 9.5 * np.log10(d_bp**2 + (p.bs_height_m - p.ut_height_m) ** 2))
    return np.where(d2d <= d_bp, near, far)


def umi_nlos_path_loss(g: LinkGeometry, p: UmiParams = UmiParams()):
    """NLoS branch, floored by the LoS branch."""
    d3d = np.asarray(g.d3d, dtype=float)
    f_ghz = p.carrier_hz / 1e9
    nlos = 22.4 + 35.3 * np.log10(d3d) + 21.3 * np.log10(f_ghz) - 0.3 * (p.ut_height_m - 1.5)
    return np.maximum(umi_los_path_loss(g, p), nlos)


def umi_mean_path_loss(g: LinkGeometry, p: UmiParams = UmiParams()):
    d2d = np.asarray(g.d2d, dtype=float)
    if np.any(d2d <= 0):
        raise DomainError("urban micro path loss is undefined at zero horizontal distance")
    p_los = umi_los_probability(d2d)
    pl = p_los * umi_los_path_loss(g, p) + (1.0 - p_los) * umi_nlos_path_loss(g, p)
    return float(pl) if np.ndim(pl) == 0 else pl


def _link(d2d, tx_height: float, rx_height: float) -> LinkGeometry:
    d2d = np.asarray(d2d, dtype=float)
    dh = tx_height - rx_height
    return LinkGeometry(d2d, np.hypot(d2d, dh), np.degrees(np.arctan2(dh, d2d)))


class AirToGroundChannel:
    """Callable evaluator ``path_loss(d2d, tx_height, rx_height)`` for high platforms."""

    def __init__(self, params: AtgParams = AtgParams()):
        self.params = params

    def path_loss(self, d2d, tx_height: float, rx_height: float = DEFAULT_USER_HEIGHT_M):
        return atg_mean_path_loss(_link(d2d, tx_height, rx_height), self.params)

    def __repr__(self):
        return f"AirToGroundChannel({self.params!r})"


class UrbanMicroChannel:
    """Street-canyon evaluator; the heights passed to ``path_loss`` override the params."""

    def __init__(self, params: UmiParams = UmiParams()):
        self.params = params

    def path_loss(self, d2d, tx_height: float | None = None, rx_height: float | None = None):
        p = self.params
        if tx_height is not None or rx_height is not None:
            p = replace(p,
                        bs_height_m=p.bs_height_m if tx_height is None else tx_height,
                        ut_height_m=p.ut_height_m if rx_height is None else rx_height)
        return umi_mean_path_loss(_link(d2d, p.bs_height_m, p.ut_height_m), p)

    def __repr__(self):
        return f"UrbanMicroChannel({self.params!r})"


def coverage_radius(model, rule: CoverageRule, tx_height: float,
                    rx_height: float = DEFAULT_USER_HEIGHT_M) -> float:
    """Largest horizontal distance at which the mean path loss stays within the rule.

    Solved by bisection to 0.1 m. If the threshold is already exceeded right
    below the transmitter, 0.0 is returned together with a
    :class:`DegenerateCoverageWarning`.
    """
    threshold = rule.effective_db

    def pl(d):
        return float(model.path_loss(d, tx_height, rx_height))

    lo = _MIN_D2D
    if pl(lo) > threshold:
        warnings.warn(
            f"path loss {pl(lo):.2f} dB at the foot of the transmitter already exceeds "
            f"{threshold:.2f} dB", DegenerateCoverageWarning, stacklevel=2)
        return 0.0
    hi = 1.0
    while pl(hi) <= threshold:
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            raise DomainError("path loss never exceeds the threshold; model is not monotone increasing")
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo <= BISECTION_TOL_M:
            break
        mid = 0.5 * (lo + hi)
        if pl(mid) <= threshold:
            lo = mid
        else:
            hi = mid
    return lo
