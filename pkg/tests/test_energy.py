import pytest
from hypothesis import given
from hypothesis import strategies as st

from rabs_sim.energy import DayPlan, day_energy, efficiency_ratio, recharge_count
from rabs_sim.exceptions import ConfigError
from rabs_sim.platform import Battery, Hovering, LaserPowered, MicroBS, PowerProfile, Rabs, Tethered
from rabs_sim.scenario import AreaSpec, generate_site_grid

GRID = generate_site_grid(AreaSpec(), 100, 7)
NEUTRAL = PowerProfile(grasp_w=0.0)
NOMINAL = PowerProfile(grasp_w=5.0)


def test_hovering_day():
    e = day_energy(Hovering(), 1, NEUTRAL)
    assert e.total_wh == (170 + 2) * 24 == 4128
    assert e.recharge_count == 41


def test_rabs_day():
    e = day_energy(Rabs(GRID), 8, NEUTRAL)
    assert e.total_wh == pytest.approx(8 * (48 + 12 * (500 / 10) * 162 / 3600))
    assert e.total_wh == pytest.approx(600.0)
    assert e.recharges_per_unit == 0


def test_rabs_stationary_lower_bound():
    e = day_energy(Rabs(GRID), 6, NEUTRAL, DayPlan(relocation_fraction=0.0))
    assert e.total_wh == 6 * 2 * 24


def test_gripper_difference():
    plan = DayPlan()
    diff = day_energy(Rabs(GRID), 10, NOMINAL, plan).total_wh - day_energy(Rabs(GRID), 10, NEUTRAL, plan).total_wh
    assert diff == pytest.approx(10 * 5 * 24)


def test_reference_platforms():
    assert day_energy(Tethered(), 1, NEUTRAL).total_wh == pytest.approx(5160.0)
    assert day_energy(LaserPowered(), 1, NEUTRAL).total_wh == pytest.approx(19200.0)
    assert day_energy(Tethered(), 1, NEUTRAL).recharge_count is None


def test_ratios():
    r8 = day_energy(Rabs(GRID), 8, NEUTRAL)
    r10 = day_energy(Rabs(GRID), 10, NEUTRAL)
    assert efficiency_ratio(day_energy(LaserPowered(), 1, NEUTRAL), r8) == pytest.approx(32.0)
    assert efficiency_ratio(day_energy(Tethered(), 1, NEUTRAL), r10) == pytest.approx(6.88)
    assert efficiency_ratio(day_energy(Hovering(), 1, NEUTRAL), r10) == pytest.approx(5.504)


def test_recharge_count():
    b = Battery()
    assert recharge_count(4128, b) == 41
    assert recharge_count(50, b) == 0
    assert recharge_count(2 * b.energy_wh, b) == 2


def test_errors():
    with pytest.raises(ConfigError):
        DayPlan(flight_speed_mps=0)
    with pytest.raises(ConfigError):
        day_energy(Hovering(), 0, NEUTRAL)
    with pytest.raises(ConfigError):
        day_energy(MicroBS(GRID), 1, NEUTRAL)


KINDS = [Hovering(), Tethered(), LaserPowered(), Rabs(GRID)]


@pytest.mark.parametrize("kind", KINDS)
@given(n=st.integers(1, 30), grasp=st.floats(0, 10), frac=st.floats(0, 1))
def test_ledger_additive_and_non_negative(kind, n, grasp, frac):
    e = day_energy(kind, n, PowerProfile(grasp_w=grasp), DayPlan(relocation_fraction=frac))
    parts = [e.propulsion_wh, e.grasp_wh, e.comm_wh, e.delivery_overhead_wh]
    assert min(parts) >= 0
    assert e.total_wh == pytest.approx(sum(parts), rel=1e-9)


@given(n=st.integers(1, 30), grasp=st.floats(0, 10), frac=st.floats(0, 0.9), dist=st.floats(0, 2000),
       speed=st.floats(1, 30))
def test_rabs_monotonicity(n, grasp, frac, dist, speed):
    def total(**kw):
        args = dict(n=n, grasp=grasp, frac=frac, dist=dist, speed=speed)
        args.update(kw)
        return day_energy(Rabs(GRID), args["n"], PowerProfile(grasp_w=args["grasp"]),
                          DayPlan(24, args["frac"], args["dist"], args["speed"])).total_wh
    base = total()
    assert total(grasp=grasp + 1) >= base
    assert total(frac=frac + 0.1) >= base
    assert total(dist=dist + 10) >= base
    assert total(n=n + 1) >= base
    assert total(speed=speed + 1) <= base


@given(st.integers(1, 20))
def test_other_platforms_exceed_comm_floor(n):
    floor = day_energy(Rabs(GRID), n, NEUTRAL, DayPlan(relocation_fraction=0)).total_wh
    for kind in (Hovering(), Tethered(), LaserPowered()):
        assert day_energy(kind, n, NEUTRAL).total_wh > floor
