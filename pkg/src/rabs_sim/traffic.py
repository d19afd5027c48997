"""Spatio-temporal demand over the lamppost grid and day-long offloading.

Demand at each candidate location is a uniform base level plus a few
Gaussian hotspots that drift across the area in a seeded random walk and
wax and wane over the day. RABS are re-placed every epoch (hour) on that
epoch's demand; micro base stations are placed once on the day-averaged
demand and never move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError
from .scenario import STREAM_TRAFFIC, SeedSpec, SiteGrid

HOURS_PER_DAY = 24.0
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class TrafficParams:
    """Demand model knobs.

    ``temporal_profile`` is ``"raised_cosine"`` (each hotspot peaks at a
    random hour), ``"constant"``, or an explicit ``(hotspot_count, epochs)``
    weight array. ``hotspot_centers`` pins the initial hotspot positions
    instead of drawing them.
    """

    base_mbps: float = 5.0
    hotspot_count: int = 3
    hotspot_amp_mbps: float = 400.0
    hotspot_sigma_m: float = 200.0
    temporal_profile: str | tuple = "raised_cosine"
    walk_step_m: float = 500.0
    hotspot_centers: tuple | None = None

    def __post_init__(self):
        if min(self.base_mbps, self.hotspot_count, self.hotspot_amp_mbps, self.walk_step_m) < 0:
            raise ConfigError("traffic parameters must be non-negative")
        if not self.hotspot_sigma_m > 0:
            raise ConfigError("hotspot_sigma_m must be positive")
        if isinstance(self.temporal_profile, str) and self.temporal_profile not in ("raised_cosine", "constant"):
            raise ConfigError(f"unknown temporal_profile {self.temporal_profile!r}")
        if self.hotspot_centers is not None and np.shape(self.hotspot_centers) != (self.hotspot_count, 2):
            raise ConfigError("hotspot_centers must have shape (hotspot_count, 2)")


@dataclass(frozen=True)
class ServiceParams:
    node_capacity_mbps: float = 500.0
    serving_radius_m: float = 300.0

    def __post_init__(self):
        if not (self.node_capacity_mbps > 0 and self.serving_radius_m > 0):
            raise ConfigError("node capacity and serving radius must be positive")


@dataclass(frozen=True)
class TrafficField:
    demand: np.ndarray  # (locations, epochs), Mbps
    locations: SiteGrid = field(repr=False)

    def __post_init__(self):
        d = np.array(self.demand, dtype=float)
        if d.ndim != 2 or d.shape[0] != len(self.locations):
            raise ConfigError(f"demand shape {d.shape} does not match {len(self.locations)} locations")
        if np.any(d < 0):
            raise ConfigError("demand must be non-negative")
        d.flags.writeable = False
        object.__setattr__(self, "demand", d)

    @property
    def epochs(self) -> int:
        return self.demand.shape[1]

    def averaged(self) -> "TrafficField":
        return TrafficField(self.demand.mean(axis=1, keepdims=True), self.locations)


@dataclass(frozen=True)
class DeploymentPlan:
    scheme: str
    k: int
    sites: tuple[tuple[int, ...], ...]
    served_mbps: np.ndarray

    @property
    def cumulative_mbps(self) -> np.ndarray:
        return np.cumsum(self.served_mbps)

    @property
    def total_mbps(self) -> float:
        return float(self.cumulative_mbps[-1]) if len(self.served_mbps) else 0.0

    @property
    def is_static(self) -> bool:
        return len(set(self.sites)) <= 1


def _reflect(x, lo, hi):
    span = hi - lo
    if span <= 0:
        return np.full_like(x, lo)
    y = np.mod(x - lo, 2 * span)
    return lo + span - np.abs(y - span)


def _profile_weights(params: TrafficParams, epochs: int, rng: np.random.Generator) -> np.ndarray:
    h = params.hotspot_count
    prof = params.temporal_profile
    if isinstance(prof, str):
        if prof == "constant":
            return np.ones((h, epochs))
        peak = rng.uniform(0.0, HOURS_PER_DAY, size=h)
        t = np.arange(epochs)
        return 0.5 * (1.0 + np.cos(2 * np.pi * (t[None, :] - peak[:, None]) / HOURS_PER_DAY))
    w = np.asarray(prof, dtype=float)
    if w.shape != (h, epochs):
        raise ConfigError(f"explicit temporal_profile must have shape {(h, epochs)}, got {w.shape}")
    return w


def generate_traffic(grid: SiteGrid, params: TrafficParams = TrafficParams(), epochs: int = 24,
                     seed: SeedSpec = SeedSpec()) -> TrafficField:
    if epochs < 1:
        raise ConfigError("need at least one epoch")
    rng = seed.rng(STREAM_TRAFFIC)
    xy = grid.xy
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    h = params.hotspot_count
    if params.hotspot_centers is not None:
        centers = np.array(params.hotspot_centers, dtype=float).reshape(h, 2)
    else:
        centers = lo + rng.uniform(size=(h, 2)) * (hi - lo)
    weights = _profile_weights(params, epochs, rng)

    demand = np.empty((len(xy), epochs))
    two_sigma2 = 2.0 * params.hotspot_sigma_m ** 2
    for t in range(epochs):
        if t > 0 and params.walk_step_m > 0:
            angle = rng.uniform(0.0, 2 * np.pi, size=h)
            centers = centers + params.walk_step_m * np.column_stack([np.cos(angle), np.sin(angle)])
            centers = np.column_stack([_reflect(centers[:, 0], lo[0], hi[0]),
                                       _reflect(centers[:, 1], lo[1], hi[1])])
        d2 = ((xy[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        bumps = params.hotspot_amp_mbps * weights[None, :, t] * np.exp(-d2 / two_sigma2)
        demand[:, t] = params.base_mbps + bumps.sum(axis=1)
    return TrafficField(demand, grid)


def _sq_dist(xy: np.ndarray) -> np.ndarray:
    diff = xy[:, None, :] - xy[None, :, :]
    return (diff ** 2).sum(axis=-1)


def _capped_totals(demand: np.ndarray, slots: np.ndarray, n_slots: int, cap: float) -> np.ndarray:
    """Served traffic for each row of a location->slot assignment (-1 = unserved).

    Loads accumulate in location order and site totals use ``math.fsum``, so a
    row evaluated alone or inside a batch gives bit-identical results.
    """
    m = slots.shape[0]
    valid = slots >= 0
    rows = np.broadcast_to(np.arange(m)[:, None], slots.shape)
    weights = np.broadcast_to(demand, slots.shape)
    loads = np.bincount(rows[valid] * n_slots + slots[valid], weights=weights[valid],
                        minlength=m * n_slots).reshape(m, n_slots)
    return np.array([math.fsum(r) for r in np.minimum(cap, loads)])


def _served(demand: np.ndarray, d2: np.ndarray, sites, svc: ServiceParams) -> float:
    """Canonical evaluation: nearest open site within range, lowest index on ties, capacity cap per site."""
    chosen = sorted(set(int(s) for s in sites))
    if not chosen:
        return 0.0
    dist = d2[:, chosen]
    dist = np.where(dist <= svc.serving_radius_m ** 2, dist, np.inf)
    nearest = np.argmin(dist, axis=1)  # first minimum => lowest site index
    reachable = np.isfinite(dist[np.arange(len(dist)), nearest])
    slots = np.where(reachable, nearest, -1)[None, :]
    return float(_capped_totals(demand, slots, len(chosen), svc.node_capacity_mbps)[0])


def served_traffic(sites, field: TrafficField, epoch: int, svc: ServiceParams = ServiceParams()) -> float:
    """Traffic served in ``epoch`` by nodes on the given location indices."""
    sites = list(sites)
    if any(not 0 <= int(s) < len(field.locations) for s in sites):
        raise ConfigError("site index outside the location grid")
    return _served(field.demand[:, epoch], _sq_dist(field.locations.xy), sites, svc)


def _greedy_capacitated(demand: np.ndarray, d2: np.ndarray, k: int, svc: ServiceParams) -> tuple[int, ...]:
    """Greedy k-site selection maximising capped served traffic.

    Marginal values of all candidates are computed at once; candidates within
    a relative 1e-9 of the best are re-scored with the canonical evaluator
    so that round-off never decides between them.
    """
    n_loc, n_sites = d2.shape
    if k < 1:
        raise ConfigError("k must be at least 1")
    k = min(k, n_sites)
    cap = svc.node_capacity_mbps
    in_range = d2 <= svc.serving_radius_m ** 2
    site_idx = np.arange(n_sites)
    cur_d2 = np.full(n_loc, np.inf)
    cur_site = np.full(n_loc, n_sites)
    chosen: list[int] = []
    for _ in range(k):
        steal = in_range & ((d2 < cur_d2[:, None]) | ((d2 == cur_d2[:, None]) & (site_idx[None, :] < cur_site[:, None])))
        stolen = demand @ steal
        value = np.minimum(cap, stolen)
        if chosen:
            onehot = cur_site[:, None] == np.asarray(chosen)[None, :]
            owned = demand[:, None] * onehot
            loads = owned.sum(axis=0)
            loss = owned.T @ steal  # (chosen, candidates)
            value = value + np.minimum(cap, loads[:, None] - loss).sum(axis=0)
        value[chosen] = -np.inf
        best = value.max()
        near = np.flatnonzero(value >= best - _TIE_RTOL * max(1.0, abs(best)))
        if len(near) > 1:
            slot_of = {site: i for i, site in enumerate(chosen)}
            base = np.array([slot_of.get(int(c), -1) for c in cur_site])
            slots = np.where(steal[:, near].T, len(chosen), base[None, :])
            scores = _capped_totals(demand, slots, len(chosen) + 1, cap)
            s = int(near[int(np.argmax(scores))])
        else:
            s = int(near[0])
        chosen.append(s)
        grab = steal[:, s]
        cur_d2[grab] = d2[grab, s]
        cur_site[grab] = s
    return tuple(chosen)


def optimize_rabs_epoch(field: TrafficField, epoch: int, k: int, svc: ServiceParams = ServiceParams()) -> tuple[int, ...]:
    """Greedy RABS sites for one epoch's demand (exhaustive for k = 1)."""
    return _greedy_capacitated(field.demand[:, epoch], _sq_dist(field.locations.xy), k, svc)


def place_micro_greedy(field: TrafficField, k: int, svc: ServiceParams = ServiceParams()) -> tuple[int, ...]:
    """Static micro BS sites chosen greedily on the day-averaged demand."""
    return _greedy_capacitated(field.demand.mean(axis=1), _sq_dist(field.locations.xy), k, svc)


def plan_rabs_day(field: TrafficField, k: int, svc: ServiceParams = ServiceParams()) -> DeploymentPlan:
    """Re-optimise ``k`` RABS sites every epoch; relocation is treated as instantaneous."""
    d2 = _sq_dist(field.locations.xy)
    sites, served = [], []
    for t in range(field.epochs):
        s = _greedy_capacitated(field.demand[:, t], d2, k, svc)
        sites.append(s)
        served.append(_served(field.demand[:, t], d2, s, svc))
    return DeploymentPlan("rabs", k, tuple(sites), np.array(served))


def plan_micro_day(field: TrafficField, k: int, svc: ServiceParams = ServiceParams()) -> DeploymentPlan:
    d2 = _sq_dist(field.locations.xy)
    sites = _greedy_capacitated(field.demand.mean(axis=1), d2, k, svc)
    served = [_served(field.demand[:, t], d2, sites, svc) for t in range(field.epochs)]
    return DeploymentPlan("micro", k, (sites,) * field.epochs, np.array(served))


def simulate_day(field: TrafficField, k_rabs: int, k_micro: int,
                 svc: ServiceParams = ServiceParams()) -> dict[str, DeploymentPlan]:
    return {"rabs": plan_rabs_day(field, k_rabs, svc), "micro": plan_micro_day(field, k_micro, svc)}


# -- estimator API -----------------------------------------------------------


class _PlannerBase(BaseEstimator):
    def _grid(self):
        if self.locations is None:
            raise ConfigError("planner needs candidate locations")
        if isinstance(self.locations, SiteGrid):
            return self.locations
        xy = np.asarray(self.locations, dtype=float).reshape(-1, 2)
        return SiteGrid(0.0, 0.0, np.column_stack([xy, np.zeros(len(xy))]))

    def _svc(self):
        return ServiceParams(self.node_capacity_mbps, self.serving_radius_m)

    def _field(self, X) -> TrafficField:
        X = check_array(X, dtype=float)
        grid = self._grid()
        if X.shape[1] != len(grid):
            raise ValueError(f"expected {len(grid)} location columns, got {X.shape[1]}")
        return TrafficField(X.T, grid)

    def score(self, X, y=None):
        """Total traffic served over all epochs (rows) of ``X``."""
        return float(np.sum(self.predict(X)))


class StaticSitePlanner(_PlannerBase):
    """Fixed sites chosen on the row-averaged demand; ``X`` is (epochs, locations)."""

    def __init__(self, k=1, locations=None, node_capacity_mbps=500.0, serving_radius_m=300.0):
        self.k = k
        self.locations = locations
        self.node_capacity_mbps = node_capacity_mbps
        self.serving_radius_m = serving_radius_m

    def fit(self, X, y=None):
        f = self._field(X)
        self.sites_ = place_micro_greedy(f, self.k, self._svc())
        self.n_features_in_ = f.demand.shape[0]
        return self

    def predict(self, X):
        """Served traffic per row of ``X`` at the fitted sites."""
        check_is_fitted(self, "sites_")
        f = self._field(X)
        return np.array([served_traffic(self.sites_, f, t, self._svc()) for t in range(f.epochs)])


class EpochwiseSitePlanner(_PlannerBase):
    """Sites re-optimised for every epoch (row) of ``X``.

    Prediction on a new demand matrix re-optimises on it; the fitted
    ``sites_`` record the plan for the training matrix.
    """

    def __init__(self, k=1, locations=None, node_capacity_mbps=500.0, serving_radius_m=300.0):
        self.k = k
        self.locations = locations
        self.node_capacity_mbps = node_capacity_mbps
        self.serving_radius_m = serving_radius_m

    def fit(self, X, y=None):
        f = self._field(X)
        self.sites_ = tuple(optimize_rabs_epoch(f, t, self.k, self._svc()) for t in range(f.epochs))
        self.n_features_in_ = f.demand.shape[0]
        return self

    def predict(self, X):
        check_is_fitted(self, "sites_")
        f = self._field(X)
        svc = self._svc()
        return np.array([served_traffic(optimize_rabs_epoch(f, t, self.k, svc), f, t, svc)
                         for t in range(f.epochs)])
