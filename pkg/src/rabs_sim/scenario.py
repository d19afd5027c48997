"""Simulation world: service area, user drops, the lamppost grid and seeding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import ConfigError

DEFAULT_USER_HEIGHT_M = 1.5

# Sub-stream identifiers so that users and traffic of the same trial never share draws.
STREAM_USERS = 0
STREAM_TRAFFIC = 1


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class AreaSpec:
    width_m: float = 2000.0
    height_m: float = 2000.0
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.width_m > 0 and self.height_m > 0):
            raise ConfigError(f"area dimensions must be positive, got {self.width_m} x {self.height_m}")

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        x0, y0 = self.origin
        return (
            (p[:, 0] >= x0) & (p[:, 0] <= x0 + self.width_m)
            & (p[:, 1] >= y0) & (p[:, 1] <= y0 + self.height_m)
        )


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one Monte Carlo trial.

    The per-trial generator is derived by hashing ``(master_seed, trial_index)``
    through :class:`numpy.random.SeedSequence`, so trials can be generated in
    any order, or in parallel, and still produce identical draws.
    """

    master_seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.trial_index < 0:
            raise ConfigError("trial_index must be non-negative")

    def rng(self, stream: int = STREAM_USERS) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.trial_index, stream))
        return np.random.default_rng(ss)


@dataclass(frozen=True)
class UserSet:
    positions: np.ndarray
    user_height_m: float = DEFAULT_USER_HEIGHT_M

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions).reshape(-1, 2))

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class SiteGrid:
    spacing_m: float
    site_height_m: float
    sites: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "sites", _frozen(self.sites).reshape(-1, 3))

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def xy(self) -> np.ndarray:
        return self.sites[:, :2]


class LinkGeometry(NamedTuple):
    d2d: float | np.ndarray
    d3d: float | np.ndarray
    elevation_deg: float | np.ndarray


def generate_users(area: AreaSpec, n: int, seed: SeedSpec,
                   user_height_m: float = DEFAULT_USER_HEIGHT_M) -> UserSet:
    """Drop ``n`` users uniformly over the area."""
    if n < 0:
        raise ConfigError("user count must be non-negative")
    rng = seed.rng(STREAM_USERS)
    xy = rng.uniform(0.0, 1.0, size=(n, 2)) * (area.width_m, area.height_m) + area.origin
    return UserSet(xy, user_height_m)


def generate_site_grid(area: AreaSpec, spacing: float, site_height: float) -> SiteGrid:
    """Regular grid of candidate sites, both boundary lines included."""
    if not spacing > 0 or spacing > min(area.width_m, area.height_m):
        raise ConfigError(f"grid spacing {spacing} invalid for a {area.width_m} x {area.height_m} area")
    # small slack so 2000/100 does not lose the last line to rounding
    nx = int(math.floor(area.width_m / spacing + 1e-9)) + 1
    ny = int(math.floor(area.height_m / spacing + 1e-9)) + 1
    xs = area.origin[0] + spacing * np.arange(nx)
    ys = area.origin[1] + spacing * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    sites = np.column_stack([gx.ravel(), gy.ravel(), np.full(nx * ny, float(site_height))])
    return SiteGrid(spacing, float(site_height), sites)


def geometry(tx, rx_2d, rx_height: float) -> LinkGeometry:
    """Horizontal distance, slant distance and elevation angle of a link.

    ``tx`` is ``(x, y, z)``; ``rx_2d`` may be a single point or an ``(n, 2)``
    array, in which case array-valued fields are returned.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx_2d, dtype=float)
    dh = tx[2] - rx_height
    d2d = np.hypot(rx[..., 0] - tx[0], rx[..., 1] - tx[1])
    d3d = np.hypot(d2d, dh)
    elev = np.degrees(np.arctan2(dh, d2d))
    if np.ndim(d2d) == 0:
        return LinkGeometry(float(d2d), float(d3d), float(elev))
    return LinkGeometry(d2d, d3d, elev)
