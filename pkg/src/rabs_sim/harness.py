"""Monte Carlo driver for the coverage, energy and traffic experiments.

Every trial draws from its own seeded stream, so trials can be farmed out to
worker processes; results are merged in trial order and written by a single
writer, giving byte-identical CSVs regardless of the worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from .channel import AirToGroundChannel, UrbanMicroChannel, coverage_radius
from .config import ExperimentConfig
from .energy import day_energy, efficiency_ratio
from .placement import best_constrained_disk, best_free_disk, greedy_coverage_curve
from .platform import Rabs, feasible_horizontal_region
from .scenario import SeedSpec, generate_site_grid, generate_users
from .traffic import generate_traffic, plan_micro_day, plan_rabs_day

log = logging.getLogger(__name__)

COVERAGE_COLUMNS = ["trial", "platform", "k", "covered", "coverage_fraction", "config_hash", "seed"]
ENERGY_COLUMNS = ["platform", "n", "gripper_w", "propulsion_wh", "grasp_wh", "comm_wh", "overhead_wh",
                  "total_wh", "recharges", "recharges_per_unit", "config_hash", "seed"]
TRAFFIC_COLUMNS = ["trial", "scheme", "k", "epoch", "served_mbps", "cumulative_mbps", "config_hash", "seed"]
SUMMARY_COLUMNS = ["mean", "std", "ci95", "n", "single_sample"]

# Reported values from the traffic study; recorded in the metadata for comparison only.
TRAFFIC_TARGETS = {"1/1": 4.0, "1/4": 1.1}


@dataclass(frozen=True)
class AggregateReport:
    mean: float
    std: float
    ci95: float
    n: int
    single_sample: bool

    def as_row(self) -> dict:
        return {"mean": self.mean, "std": self.std, "ci95": self.ci95, "n": self.n,
                "single_sample": int(self.single_sample)}


def aggregate(samples) -> AggregateReport:
    """Mean, sample standard deviation and 95 % normal-approximation half-width."""
    x = np.asarray(list(samples), dtype=float)
    if x.size == 0:
        raise ValueError("cannot aggregate an empty sample set")
    if x.size == 1:
        return AggregateReport(float(x[0]), 0.0, 0.0, 1, True)
    mean = float(np.mean(x))
    # keep the mean inside the sample range under round-off
    mean = min(max(mean, float(x.min())), float(x.max()))
    std = float(np.std(x, ddof=1))
    return AggregateReport(mean, std, 1.96 * std / math.sqrt(x.size), int(x.size), False)


def _map_trials(fn, trials: int, workers: int):
    if workers <= 1 or trials == 1:
        return [fn(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials), chunksize=max(1, trials // (4 * workers))))


# -- coverage ----------------------------------------------------------------


@dataclass(frozen=True)
class CoverageRadii:
    aerial_m: float
    rabs_m: float


def coverage_radii(cfg: ExperimentConfig) -> CoverageRadii:
    rule = cfg.rule()
    h_user = cfg.scenario.user_height_m
    aerial = coverage_radius(AirToGroundChannel(cfg.atg_params()), rule, cfg.platform.altitude_m, h_user)
    rabs = coverage_radius(UrbanMicroChannel(cfg.umi_params()), rule, cfg.scenario.site_height_m, h_user)
    return CoverageRadii(aerial, rabs)


def _coverage_trial(cfg: ExperimentConfig, radii: CoverageRadii, trial: int) -> list[dict]:
    seed = SeedSpec(cfg.master_seed, trial)
    users = generate_users(cfg.area(), cfg.scenario.n_users, seed, cfg.scenario.user_height_m)
    n = len(users)
    rows = []

    def row(platform, k, covered):
        rows.append({"trial": trial, "platform": platform, "k": k, "covered": int(covered),
                     "coverage_fraction": covered / n if n else 0.0})

    if n:
        row("hovering", 1, best_free_disk(users, radii.aerial_m).n_covered)
        row("tethered", 1, best_constrained_disk(users, radii.aerial_m,
                                                 feasible_horizontal_region(cfg.tethered())).n_covered)
        row("laser", 1, best_constrained_disk(users, radii.aerial_m,
                                              feasible_horizontal_region(cfg.laser())).n_covered)
    else:
        for p in ("hovering", "tethered", "laser"):
            row(p, 1, 0)
    grid = generate_site_grid(cfg.area(), cfg.scenario.grid_spacing_m, cfg.scenario.site_height_m)
    ks = sorted(set(cfg.coverage.rabs_k))
    curve = greedy_coverage_curve(users, radii.rabs_m, grid, min(max(ks), len(grid))) if n else None
    for k in ks:
        row("rabs", k, 0 if curve is None else curve[min(k, len(curve)) - 1])
    return rows


def run_coverage_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[list[dict], list[dict]]:
    """Per-trial coverage rows and per-(platform, k) summary rows."""
    cfg.validate()
    radii = coverage_radii(cfg)
    # raises on empty regions before any trial runs
    feasible_horizontal_region(cfg.tethered())
    feasible_horizontal_region(cfg.laser())
    Rabs(generate_site_grid(cfg.area(), cfg.scenario.grid_spacing_m, cfg.scenario.site_height_m))
    log.info("coverage radii: aerial %.1f m, rabs %.1f m", radii.aerial_m, radii.rabs_m)
    per_trial = _map_trials(partial(_coverage_trial, cfg, radii), cfg.trials, workers)
    rows = [r for trial_rows in per_trial for r in trial_rows]
    _stamp(rows, cfg)

    groups: dict[tuple, list[float]] = {}
    for r in rows:
        groups.setdefault((r["platform"], r["k"]), []).append(r["coverage_fraction"])
    summary = [{"platform": p, "k": k, **aggregate(v).as_row()} for (p, k), v in groups.items()]
    _stamp(summary, cfg)
    return rows, summary


# -- energy ------------------------------------------------------------------


def run_energy_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    """Day ledgers for each platform and efficiency ratios against each RABS swarm."""
    cfg.validate()
    plan = cfg.day_plan()
    battery = cfg.battery()
    kw = dict(battery=battery, tether_delivery_eff=cfg.energy.tether_delivery_eff,
              hover_return_w=cfg.energy.hover_return_w)
    grid = generate_site_grid(cfg.area(), cfg.scenario.grid_spacing_m, cfg.scenario.site_height_m)
    feasible_horizontal_region(cfg.laser())
    references = [day_energy(kind, 1, cfg.power(), plan, **kw)
                  for kind in (cfg.hovering(), cfg.tethered(), cfg.laser())]
    swarms = [day_energy(Rabs(grid), n, cfg.power(float(g)), plan, **kw)
              for n in cfg.energy.rabs_n for g in cfg.energy.gripper_w]

    rows = [{
        "platform": e.platform, "n": e.n, "gripper_w": e.gripper_w,
        "propulsion_wh": e.propulsion_wh, "grasp_wh": e.grasp_wh, "comm_wh": e.comm_wh,
        "overhead_wh": e.delivery_overhead_wh, "total_wh": e.total_wh,
        "recharges": "" if e.recharge_count is None else e.recharge_count,
        "recharges_per_unit": "" if e.recharges_per_unit is None else e.recharges_per_unit,
    } for e in references + swarms]
    ratios = [{"reference": ref.platform, "rabs_n": s.n, "gripper_w": s.gripper_w,
               "flight_speed_mps": plan.flight_speed_mps, "ratio": efficiency_ratio(ref, s)}
              for s in swarms for ref in references]
    _stamp(rows, cfg)
    _stamp(ratios, cfg)
    return rows, ratios


# -- traffic -----------------------------------------------------------------


def _traffic_trial(cfg: ExperimentConfig, trial: int) -> dict:
    grid = generate_site_grid(cfg.area(), cfg.scenario.grid_spacing_m, cfg.scenario.site_height_m)
    field = generate_traffic(grid, cfg.traffic_params(), cfg.traffic.epochs, SeedSpec(cfg.master_seed, trial))
    svc = cfg.service()
    rabs = {k: plan_rabs_day(field, k, svc) for k in sorted({p[0] for p in cfg.traffic.k_pairs})}
    micro = {k: plan_micro_day(field, k, svc) for k in sorted({p[1] for p in cfg.traffic.k_pairs})}
    rows = []
    for plans in (rabs, micro):
        for k, plan in plans.items():
            for t, (s, c) in enumerate(zip(plan.served_mbps, plan.cumulative_mbps)):
                rows.append({"trial": trial, "scheme": plan.scheme, "k": k, "epoch": t,
                             "served_mbps": float(s), "cumulative_mbps": float(c)})
    totals = {("rabs", k): p.total_mbps for k, p in rabs.items()}
    totals.update({("micro", k): p.total_mbps for k, p in micro.items()})
    return {"rows": rows, "totals": totals}


def run_traffic_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[list[dict], list[dict], dict]:
    """Per-epoch rows, summary rows and a metadata dict with achieved ratios."""
    cfg.validate()
    results = _map_trials(partial(_traffic_trial, cfg), cfg.trials, workers)
    rows = [r for res in results for r in res["rows"]]
    _stamp(rows, cfg)

    summary, meta_ratios = [], {}
    for kr, km in cfg.traffic.k_pairs:
        ratios = [res["totals"][("rabs", kr)] / res["totals"][("micro", km)]
                  if res["totals"][("micro", km)] > 0 else math.inf for res in results]
        agg = aggregate(ratios)
        summary.append({"quantity": "final_ratio", "k_rabs": kr, "k_micro": km, **agg.as_row()})
        meta_ratios[f"{kr}/{km}"] = {"mean": agg.mean, "ci95": agg.ci95,
                                     "reported_target": TRAFFIC_TARGETS.get(f"{kr}/{km}"),
                                     "binding": False}
    for scheme in ("rabs", "micro"):
        for k in sorted({key[1] for key in results[0]["totals"] if key[0] == scheme}):
            agg = aggregate(res["totals"][(scheme, k)] for res in results)
            summary.append({"quantity": f"{scheme}_total_mbps", "k_rabs": k if scheme == "rabs" else "",
                            "k_micro": k if scheme == "micro" else "", **agg.as_row()})
    _stamp(summary, cfg)
    meta = {"config_hash": cfg.config_hash(), "seed": cfg.master_seed, "trials": cfg.trials,
            "ratios": meta_ratios}
    return rows, summary, meta


# -- output ------------------------------------------------------------------


def _stamp(rows: list[dict], cfg: ExperimentConfig):
    h = cfg.config_hash()
    for r in rows:
        r["config_hash"] = h
        r["seed"] = cfg.master_seed


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path: Path, rows: list[dict], columns: list[str] | None = None):
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = columns or list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: _fmt(r.get(c, "")) for c in columns})


GNUPLOT = {
    "coverage": """set datafile separator ','
set key autotitle columnhead
set xlabel 'number of RABS'
set ylabel 'mean coverage'
set yrange [0:1.05]
plot '< grep ^rabs coverage_summary.csv' using 2:3:5 with yerrorlines title 'RABS', \\
     '< grep ^hovering coverage_summary.csv' using (10):3 with points title 'hovering', \\
     '< grep ^laser coverage_summary.csv' using (8):3 with points title 'laser', \\
     '< grep ^tethered coverage_summary.csv' using (1):3 with points title 'tethered'
""",
    "energy": """set datafile separator ','
set style data histograms
set style fill solid
set ylabel 'energy over the horizon (Wh)'
set logscale y
plot 'energy.csv' every ::1 using 8:xtic(stringcolumn(1).'/'.stringcolumn(2).'/'.stringcolumn(3)) notitle
""",
    "traffic": """set datafile separator ','
set xlabel 'epoch (h)'
set ylabel 'cumulative served traffic (Mbps.h), trial 0'
plot '< awk -F, \\'$1==0 && $2=="rabs"\\' traffic.csv' using 4:6 with lines title 'RABS', \\
     '< awk -F, \\'$1==0 && $2=="micro"\\' traffic.csv' using 4:6 with lines title 'micro BS'
""",
}


def run_and_write(experiment: str, cfg: ExperimentConfig, workers: int = 1, emit_gnuplot: bool = False) -> Path:
    out = Path(cfg.out_dir)
    if experiment == "coverage":
        rows, summary = run_coverage_experiment(cfg, workers)
        write_csv(out / "coverage.csv", rows, COVERAGE_COLUMNS)
        write_csv(out / "coverage_summary.csv", summary,
                  ["platform", "k", *SUMMARY_COLUMNS, "config_hash", "seed"])
    elif experiment == "energy":
        rows, ratios = run_energy_experiment(cfg)
        write_csv(out / "energy.csv", rows, ENERGY_COLUMNS)
        write_csv(out / "energy_summary.csv", ratios)
    elif experiment == "traffic":
        rows, summary, meta = run_traffic_experiment(cfg, workers)
        write_csv(out / "traffic.csv", rows, TRAFFIC_COLUMNS)
        write_csv(out / "traffic_summary.csv", summary,
                  ["quantity", "k_rabs", "k_micro", *SUMMARY_COLUMNS, "config_hash", "seed"])
        (out / "traffic_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    if emit_gnuplot:
        (out / f"{experiment}.gp").write_text(GNUPLOT[experiment])
    return out
