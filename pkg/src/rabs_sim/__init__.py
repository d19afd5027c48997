"""Monte Carlo study of robotic aerial base stations (RABS).

Compares perching RABS against hovering, tethered and laser-powered aerial
base stations on coverage and day-long energy, and against static micro
base stations on traffic offloading.
"""

from .channel import (AirToGroundChannel, AtgParams, CoverageRule, UmiParams, UrbanMicroChannel,
                      atg_los_probability, atg_mean_path_loss, coverage_radius, umi_mean_path_loss)
from .config import ExperimentConfig
from .energy import DayPlan, LedgerEntry, day_energy, efficiency_ratio, recharge_count
from .exceptions import (ConfigError, DegenerateCoverageWarning, DomainError, EmptyRegionError,
                         ExtrapolationWarning, InfeasibleError)
from .harness import aggregate, run_coverage_experiment, run_energy_experiment, run_traffic_experiment
from .placement import (ConstrainedDiskPlacer, FreeDiskPlacer, Placement, SiteSelector, best_constrained_disk,
                        best_free_disk, covered_users, select_sites_exact, select_sites_greedy)
from .platform import (Battery, Disk, GripperSpec, Hovering, LaserLinkParams, LaserPowered, MicroBS,
                       PowerProfile, Rabs, Tethered, critical_charging_distance, feasible_horizontal_region,
                       flight_endurance, gripper_holding_force, noise_at_distance)
from .scenario import (AreaSpec, LinkGeometry, SeedSpec, SiteGrid, UserSet, generate_site_grid, generate_users,
                       geometry)
from .traffic import (DeploymentPlan, EpochwiseSitePlanner, ServiceParams, StaticSitePlanner, TrafficField,
                      TrafficParams, generate_traffic, optimize_rabs_epoch, place_micro_greedy, served_traffic,
                      simulate_day)

__version__ = "0.1.0"
