"""Coverage-maximising placement.

Coverage is a disk test: a user is covered by a node when their horizontal
distance is within the node's coverage radius (see
:func:`rabs_sim.channel.coverage_radius`). Three problems are solved here:

* one freely placed disk (hovering ABS), exactly, by candidate enumeration;
* one disk whose centre is confined to a feasible disk (tethered and
  laser-powered ABS), heuristically, by projecting the same candidates;
* ``k`` disks restricted to a finite site grid (perched RABS), greedily,
  with an exhaustive solver kept for validating small instances.

The module also exposes scikit-learn style estimators wrapping these
solvers, so a placement can be fitted on one user drop and scored on
another.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError
from .platform import WHOLE_PLANE, Disk
from .scenario import SiteGrid, UserSet

# Slack on the boundary test, absorbing round-off of circle-intersection candidates.
BOUNDARY_SLACK_M = 1e-9
EXACT_SUBSET_LIMIT = 10**6
_CHUNK = 4096


@dataclass(frozen=True)
class Placement:
    positions: np.ndarray
    covered: np.ndarray
    n_users: int
    site_indices: tuple[int, ...] | None = None
    marginal_gains: tuple[int, ...] = field(default=(), repr=False)

    @property
    def coverage_fraction(self) -> float:
        return len(self.covered) / self.n_users if self.n_users else 0.0

    @property
    def n_covered(self) -> int:
        return len(self.covered)


def _points(users) -> np.ndarray:
    if isinstance(users, UserSet):
        return users.positions
    return np.asarray(users, dtype=float).reshape(-1, 2)


def _sites_xy(grid) -> np.ndarray:
    if isinstance(grid, SiteGrid):
        return grid.xy
    return np.asarray(grid, dtype=float).reshape(len(grid), -1)[:, :2]


def _check_radius(radius: float):
    if not radius > 0:
        raise ConfigError(f"coverage radius must be positive, got {radius}")


def coverage_matrix(centers, users, radius: float) -> np.ndarray:
    """Boolean ``(n_centers, n_users)`` matrix of disk membership."""
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    u = _points(users)
    dx = c[:, None, 0] - u[None, :, 0]
    dy = c[:, None, 1] - u[None, :, 1]
    return np.hypot(dx, dy) <= radius + BOUNDARY_SLACK_M


def covered_users(position, radius: float, users) -> np.ndarray:
    """Indices of users within ``radius`` of ``position`` (boundary inclusive)."""
    _check_radius(radius)
    return np.flatnonzero(coverage_matrix(position, users, radius)[0])


def disk_candidates(users, radius: float) -> np.ndarray:
    """Every user position plus both intersection points of each pair of user-centred circles.

    Some optimal disk can always be translated until its boundary touches two
    users (or it contains a single user), so the best of these candidates is
    a global optimum.
    """
    u = _points(users)
    if len(u) < 2:
        return u.copy()
    i, j = np.triu_indices(len(u), 1)
    p, q = u[i], u[j]
    d = np.hypot(*(q - p).T)
    keep = (d > 0) & (d <= 2 * radius)
    p, q, d = p[keep], q[keep], d[keep]
    mid = 0.5 * (p + q)
    h = np.sqrt(np.maximum(radius**2 - (0.5 * d) ** 2, 0.0))
    normal = np.column_stack([-(q - p)[:, 1], (q - p)[:, 0]]) / d[:, None]
    return np.vstack([u, mid + h[:, None] * normal, mid - h[:, None] * normal])


def _best_candidate(candidates: np.ndarray, users: np.ndarray, radius: float) -> int:
    best_i, best_n = 0, -1
    for start in range(0, len(candidates), _CHUNK):
        counts = coverage_matrix(candidates[start:start + _CHUNK], users, radius).sum(axis=1)
        i = int(np.argmax(counts))
        if counts[i] > best_n:
            best_i, best_n = start + i, int(counts[i])
    return best_i


def _single(position, users: np.ndarray, radius: float) -> Placement:
    position = np.asarray(position, dtype=float).reshape(1, 2)
    return Placement(position, covered_users(position[0], radius, users), len(users))


def best_free_disk(users, radius: float) -> Placement:
    """Position of one disk maximising the number of covered users (exact)."""
    _check_radius(radius)
    u = _points(users)
    if len(u) == 0:
        raise ConfigError("need at least one user")
    cand = disk_candidates(u, radius)
    return _single(cand[_best_candidate(cand, u, radius)], u, radius)


def best_constrained_disk(users, radius: float, feasible: Disk) -> Placement:
    """Best disk whose centre must lie in ``feasible``.

    Candidates of the unconstrained problem are projected onto the feasible
    disk, and the disk centre is added; the result is not guaranteed optimal
    but dominates every candidate already inside the region.
    """
    _check_radius(radius)
    u = _points(users)
    if len(u) == 0:
        raise ConfigError("need at least one user")
    if math.isinf(feasible.radius):
        return best_free_disk(u, radius)
    cand = np.vstack([feasible.project(disk_candidates(u, radius)), np.asarray(feasible.center, float)])
    return _single(cand[_best_candidate(cand, u, radius)], u, radius)


def _clamp_k(k: int, n_sites: int) -> int:
    if k < 1:
        raise ConfigError("k must be at least 1")
    if k > n_sites:
        warnings.warn(f"k={k} exceeds the {n_sites} available sites; clamping", stacklevel=3)
        return n_sites
    return k


def select_sites_greedy(users, radius: float, grid, k: int) -> Placement:
    """Greedy maximum coverage over a finite site set.

    Each step adds the site covering the most still-uncovered users, lowest
    site index on ties. Stops early once every user is covered or no site
    adds coverage.
    """
    _check_radius(radius)
    u = _points(users)
    xy = _sites_xy(grid)
    k = _clamp_k(k, len(xy))
    cov = coverage_matrix(xy, u, radius)
    covered = np.zeros(len(u), dtype=bool)
    chosen, gains = [], []
    for _ in range(k):
        if covered.all():
            break
        gain = (cov & ~covered).sum(axis=1)
        s = int(np.argmax(gain))
        if gain[s] == 0:
            break
        chosen.append(s)
        gains.append(int(gain[s]))
        covered |= cov[s]
    return Placement(xy[chosen].reshape(-1, 2), np.flatnonzero(covered), len(u),
                     site_indices=tuple(chosen), marginal_gains=tuple(gains))


def greedy_coverage_curve(users, radius: float, grid, k_max: int) -> np.ndarray:
    """Covered-user counts of the greedy solution for k = 1..k_max.

    Greedy solutions are nested in k, so one run yields the whole curve.
    """
    gains = select_sites_greedy(users, radius, grid, k_max).marginal_gains
    curve = np.zeros(k_max, dtype=int)
    if gains:
        curve[:len(gains)] = np.cumsum(gains)
        curve[len(gains):] = curve[len(gains) - 1]
    return curve


def select_sites_exact(users, radius: float, grid, k: int) -> Placement:
    """Optimal k-site coverage by exhaustive subset enumeration (small instances only)."""
    _check_radius(radius)
    u = _points(users)
    xy = _sites_xy(grid)
    k = _clamp_k(k, len(xy))
    n_subsets = math.comb(len(xy), k)
    if n_subsets > EXACT_SUBSET_LIMIT:
        raise ConfigError(f"C({len(xy)}, {k}) = {n_subsets} subsets exceeds the limit of {EXACT_SUBSET_LIMIT}")
    cov = coverage_matrix(xy, u, radius)
    masks = [sum(1 << int(i) for i in np.flatnonzero(row)) for row in cov]
    best, best_n = None, -1
    for combo in itertools.combinations(range(len(xy)), k):
        m = 0
        for s in combo:
            m |= masks[s]
        n = bin(m).count("1")
        if n > best_n:
            best, best_n = combo, n
            if n == len(u):
                break
    covered = np.flatnonzero(cov[list(best)].any(axis=0)) if len(u) else np.array([], dtype=int)
    return Placement(xy[list(best)].reshape(-1, 2), covered, len(u), site_indices=tuple(best))


# -- estimator API -----------------------------------------------------------


class _DiskPlacerMixin:
    def _validate(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected (n_users, 2) user coordinates, got {X.shape}")
        return X

    def predict(self, X):
        """1 for users covered by the fitted placement, else 0."""
        check_is_fitted(self, "positions_")
        X = self._validate(X)
        return coverage_matrix(self.positions_, X, self.radius).any(axis=0).astype(int)

    def score(self, X, y=None):
        """Fraction of the users in ``X`` covered by the fitted placement."""
        return float(self.predict(X).mean())

    def _store(self, placement: Placement):
        self.placement_ = placement
        self.positions_ = placement.positions
        self.covered_ = placement.covered
        self.coverage_fraction_ = placement.coverage_fraction
        self.n_features_in_ = 2
        return self


class FreeDiskPlacer(_DiskPlacerMixin, BaseEstimator):
    """Place one unconstrained coverage disk on the users in ``X``."""

    def __init__(self, radius=1000.0):
        self.radius = radius

    def fit(self, X, y=None):
        return self._store(best_free_disk(self._validate(X), self.radius))


class ConstrainedDiskPlacer(_DiskPlacerMixin, BaseEstimator):
    """Place one coverage disk whose centre stays within ``region_radius`` of ``center``."""

    def __init__(self, radius=1000.0, center=(0.0, 0.0), region_radius=math.inf):
        self.radius = radius
        self.center = center
        self.region_radius = region_radius

    def fit(self, X, y=None):
        if self.region_radius < 0:
            raise ConfigError("region_radius must be non-negative")
        region = Disk(tuple(self.center), self.region_radius) if np.isfinite(self.region_radius) else WHOLE_PLANE
        return self._store(best_constrained_disk(self._validate(X), self.radius, region))


class SiteSelector(_DiskPlacerMixin, BaseEstimator):
    """Choose ``k`` sites from ``sites`` to cover the users in ``X``.

    ``method`` is ``"greedy"`` or ``"exact"``.
    """

    def __init__(self, radius=350.0, sites=None, k=1, method="greedy"):
        self.radius = radius
        self.sites = sites
        self.k = k
        self.method = method

    def fit(self, X, y=None):
        if self.sites is None:
            raise ConfigError("SiteSelector needs candidate sites")
        solver = {"greedy": select_sites_greedy, "exact": select_sites_exact}.get(self.method)
        if solver is None:
            raise ConfigError(f"unknown method {self.method!r}")
        placement = solver(self._validate(X), self.radius, self.sites, self.k)
        self.site_indices_ = placement.site_indices
        return self._store(placement)
