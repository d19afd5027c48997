import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rabs_sim.channel import (AirToGroundChannel, AtgParams, CoverageRule, UmiParams, UrbanMicroChannel,
                              atg_los_probability, atg_mean_path_loss, coverage_radius, umi_los_path_loss,
                              umi_los_probability, umi_mean_path_loss, umi_nlos_path_loss)
from rabs_sim.exceptions import ConfigError, DegenerateCoverageWarning, DomainError
from rabs_sim.scenario import geometry

URBAN = AtgParams()
# Dense 1 cm sampling of the closed forms, computed outside the package.
ATG_RADIUS_100M = 1052.36
UMI_RADIUS_7M = 352.89


def test_los_probability_examples():
    assert atg_los_probability(90.0, URBAN) == pytest.approx(1 / (1 + 9.61 * math.exp(-12.8624)), rel=1e-12)
    assert atg_los_probability(90.0, URBAN) == pytest.approx(0.99997, abs=1e-5)
    assert atg_los_probability(9.61, URBAN) == pytest.approx(1 / 10.61)
    assert atg_los_probability(5.71, URBAN) == pytest.approx(0.0528, abs=1e-4)


@given(st.floats(0.01, 89.9), st.floats(0.001, 0.09))
def test_los_probability_increasing(theta, step):
    lo = atg_los_probability(theta, URBAN)
    hi = atg_los_probability(theta + step, URBAN)
    assert 0 < lo < hi < 1


def test_atg_overhead():
    pl = atg_mean_path_loss(geometry((0, 0, 100), (0, 0), 0), URBAN)
    fspl = 20 * math.log10(4 * math.pi * 2e9 * 100 / 299_792_458.0)
    assert fspl == pytest.approx(78.46, abs=0.01)
    assert pl == pytest.approx(79.47, abs=0.01)


def test_atg_one_km():
    assert atg_mean_path_loss(geometry((0, 0, 100), (1000, 0), 0), URBAN) == pytest.approx(117.5, abs=0.2)


def test_atg_doubling_adds_six_db_to_fspl():
    # zero excess losses isolate the free-space term
    p = AtgParams(eta_los_db=0.0, eta_nlos_db=0.0)
    a = atg_mean_path_loss(geometry((0, 0, 100), (300, 0), 0), p)
    g = geometry((0, 0, 200), (600, 0), 0)
    assert atg_mean_path_loss(g, p) - a == pytest.approx(20 * math.log10(2))


def test_atg_zero_distance_domain_error():
    with pytest.raises(DomainError):
        atg_mean_path_loss(geometry((0, 0, 0), (0, 0), 0), URBAN)


def test_atg_strictly_increasing_on_grid():
    ch = AirToGroundChannel()
    pl = ch.path_loss(np.linspace(0, 5000, 5001), 100.0)
    assert np.all(np.diff(pl) > 0)


def test_umi_300m():
    pl = umi_mean_path_loss(geometry((0, 0, 7), (300, 0), 1.5), UmiParams())
    assert 114 - 1 <= pl <= 115 + 1
    assert pl == pytest.approx(115.358, abs=1e-3)


def test_umi_los_clamp():
    assert umi_los_probability(18.0) == 1.0
    assert umi_los_probability(5.0) == 1.0
    assert umi_los_probability(19.0) < 1.0


@given(st.floats(0.5, 3000))
def test_umi_between_branches(d):
    g = geometry((0, 0, 7), (d, 0), 1.5)
    p = UmiParams()
    pl = umi_mean_path_loss(g, p)
    assert umi_los_path_loss(g, p) - 1e-9 <= pl <= umi_nlos_path_loss(g, p) + 1e-9


def test_umi_monotone():
    pl = UrbanMicroChannel().path_loss(np.linspace(0.1, 3000, 30000))
    assert np.all(np.diff(pl) >= -1e-12)


def test_umi_zero_distance_domain_error():
    with pytest.raises(DomainError):
        umi_mean_path_loss(geometry((0, 0, 7), (0, 0), 1.5))


def test_umi_continuous_at_breakpoint():
    p = UmiParams()
    d_bp = 4 * 6 * 0.5 * 2e9 / 299_792_458.0
    below = umi_los_path_loss(geometry((0, 0, 7), (d_bp, 0), 1.5), p)
    above = umi_los_path_loss(geometry((0, 0, 7), (d_bp + 1e-9, 0), 1.5), p)
    assert float(above) == pytest.approx(float(below), abs=1e-6)


def test_atg_radius_matches_dense_sampling():
    r = coverage_radius(AirToGroundChannel(), CoverageRule(118.0), 100.0)
    assert r == pytest.approx(ATG_RADIUS_100M, abs=0.15)


def test_umi_radius_matches_dense_sampling():
    r = coverage_radius(UrbanMicroChannel(), CoverageRule(118.0), 7.0)
    assert 300 <= r <= 420
    assert r == pytest.approx(UMI_RADIUS_7M, abs=0.15)


@pytest.mark.parametrize("model,h", [(AirToGroundChannel(), 100.0), (UrbanMicroChannel(), 7.0)])
@pytest.mark.parametrize("r_star", [50.0, 250.0, 777.7])
def test_radius_inverse_identity(model, h, r_star):
    threshold = float(model.path_loss(r_star, h))
    assert coverage_radius(model, CoverageRule(threshold), h) == pytest.approx(r_star, abs=0.1)


@pytest.mark.parametrize("model,h", [(AirToGroundChannel(), 100.0), (UrbanMicroChannel(), 7.0)])
@given(t=st.floats(95, 140))
def test_radius_bracket_property(model, h, t):
    r = coverage_radius(model, CoverageRule(t), h)
    assert model.path_loss(r, h) <= t < model.path_loss(r + 1.0, h)


@given(st.floats(95, 140), st.floats(0, 10))
def test_radius_monotone_in_threshold(t, dt):
    ch = AirToGroundChannel()
    assert coverage_radius(ch, CoverageRule(t), 100.0) <= coverage_radius(ch, CoverageRule(t + dt), 100.0)


def test_degenerate_radius_flagged():
    with pytest.warns(DegenerateCoverageWarning):
        assert coverage_radius(AirToGroundChannel(), CoverageRule(60.0), 100.0) == 0.0


def test_fade_margin_shrinks_radius():
    ch = UrbanMicroChannel()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert coverage_radius(ch, CoverageRule(118, 3.0), 7.0) < coverage_radius(ch, CoverageRule(118), 7.0)


@pytest.mark.parametrize("bad", [dict(a=0), dict(b=-1), dict(eta_los_db=30), dict(carrier_hz=0)])
def test_atg_param_validation(bad):
    with pytest.raises(ConfigError):
        AtgParams(**bad)


def test_umi_param_validation():
    with pytest.raises(ConfigError):
        UmiParams(bs_height_m=1.0)
    with pytest.raises(ConfigError):
        CoverageRule(0)
