import math

import numpy as np
import pytest
from scipy import stats

from adacomp.netmodel import (
    ConfigurationError,
    NetworkConfig,
    TierParams,
    associate,
    average_power,
    sample_realization,
    sample_tier_distances,
    select_coordination_set,
)


def _tier(tid=0, density=1e-4, power=1.0, antennas=4, alpha=4.0, bits=6):
    return TierParams(tid, density, power, antennas, alpha, bits)


def test_tier_params_validation():
    with pytest.raises(ConfigurationError):
        _tier(alpha=2.0)            # path loss must exceed 2
    with pytest.raises(ConfigurationError):
        _tier(density=0.0)
    with pytest.raises(ConfigurationError):
        _tier(power=-1.0)
    with pytest.raises(ConfigurationError):
        TierParams(0, 1e-4, 1.0, 0, 4.0, 6)
    with pytest.raises(ConfigurationError):
        TierParams(0, 1e-4, 1.0, 4, 4.0, -1)


def test_network_config_validation():
    t = _tier()
    with pytest.raises(ConfigurationError):
        NetworkConfig(tiers=(), sim_radius=100.0)
    with pytest.raises(ConfigurationError) as e:
        NetworkConfig(tiers=(t,), sim_radius=100.0, coord_set_size=4)
    assert "zero-forcing infeasible" in str(e.value)
    with pytest.raises(ConfigurationError):
        NetworkConfig(tiers=(t,), sim_radius=100.0, serving_tier=3)
    with pytest.raises(ConfigurationError):
        NetworkConfig(tiers=(t,), sim_radius=100.0, coord_set_size=1,
                      coord_members=((0, 1), (0, 2)))
    with pytest.raises(ConfigurationError):
        NetworkConfig(tiers=(t,), sim_radius=100.0, cos_gain_model="other")


def test_poisson_count_mean():
    # points on the disk are Poisson with mean density*pi*R^2
    tier = _tier(density=5e-4)
    radius = 200.0
    expect = tier.density * math.pi * radius**2
    rng = np.random.default_rng(42)
    counts = [len(sample_tier_distances(tier, radius, rng)) for _ in range(2000)]
    se = math.sqrt(expect / 2000)
    assert abs(np.mean(counts) - expect) < 4 * se


def test_distances_sorted_and_bounded():
    tier = _tier(density=1e-3)
    rng = np.random.default_rng(7)
    for _ in range(20):
        r = sample_tier_distances(tier, 100.0, rng)
        assert np.all(np.diff(r) >= 0)
        assert r.size == 0 or (r[0] > 0 and r[-1] <= 100.0)


def test_nearest_distance_law():
    # nearest-BS distance has cdf 1 - exp(-lam*pi*r^2); truncation at R is
    # negligible at lam*pi*R^2 ~ 78
    tier = _tier(density=1e-4)
    radius = 500.0
    rng = np.random.default_rng(2024)
    nearest = []
    while len(nearest) < 400:
        r = sample_tier_distances(tier, radius, rng)
        if r.size:
            nearest.append(r[0])
    lam_pi = tier.density * math.pi
    stat = stats.kstest(nearest, lambda r: 1.0 - np.exp(-lam_pi * np.asarray(r) ** 2))
    assert stat.pvalue > 0.01


def test_nearest_distance_density_scaling():
    # mean nearest distance is 1/(2 sqrt(lam)); quadrupling density halves it
    rng = np.random.default_rng(5)
    means = []
    for density in (1e-4, 4e-4):
        tier = _tier(density=density)
        vals = [sample_tier_distances(tier, 600.0, rng)[0] for _ in range(3000)]
        means.append(np.mean(vals))
        assert abs(means[-1] - 0.5 / math.sqrt(density)) < 1.5
    assert abs(means[0] / means[1] - 2.0) < 0.1


def test_association_picks_strongest_average_power():
    # 40/500^4 = 6.4e-10, 5/200^3.5 = 4.419e-8, 0.5/60^3 = 2.315e-6
    tiers = (
        TierParams(0, 1e-6, 40.0, 8, 4.0, 21),
        TierParams(1, 5e-6, 5.0, 4, 3.5, 9),
        TierParams(2, 2e-5, 0.5, 2, 3.0, 3),
    )
    config = NetworkConfig(tiers=tiers, sim_radius=1e4)
    assert associate(config, np.array([500.0, 200.0, 60.0])) == 2
    assert abs(average_power(tiers[2], 60.0) - 2.31481481e-6) < 1e-13
    # empty tiers are skipped; all empty is an error
    assert associate(config, np.array([500.0, math.inf, math.inf])) == 0
    with pytest.raises(ConfigurationError):
        associate(config, np.array([math.inf] * 3))


def test_association_tie_breaks_low_tier():
    t = _tier()
    config = NetworkConfig(tiers=(t, TierParams(1, 1e-4, 1.0, 4, 4.0, 6)),
                           sim_radius=100.0)
    assert associate(config, np.array([10.0, 10.0])) == 0


def test_coordination_set_selection():
    # tier powers 10 and 1, alpha 4: candidates are
    # (0,2): 10/150^4 = 1.975e-8, (0,3): 6.25e-9, (1,1): 2.441e-8, (1,2): 4.82e-9
    tiers = (TierParams(0, 1e-4, 10.0, 8, 4.0, 6), TierParams(1, 1e-4, 1.0, 8, 4.0, 6))
    config = NetworkConfig(tiers=tiers, sim_radius=1e3, coord_set_size=2)
    distances = [np.array([100.0, 150.0, 200.0]), np.array([80.0, 120.0])]
    members = select_coordination_set(config, distances, serving_tier=0, size=2)
    assert members == ((1, 1), (0, 2))
    assert select_coordination_set(config, distances, 0, 0) == ()
    with pytest.raises(ConfigurationError):
        select_coordination_set(config, [np.array([100.0]), np.array([])], 0, 2)


def test_sample_realization_structure():
    tiers = (TierParams(0, 1e-4, 10.0, 8, 4.0, 6), TierParams(1, 2e-4, 1.0, 4, 3.5, 3))
    config = NetworkConfig(tiers=tiers, sim_radius=400.0, coord_set_size=2)
    rng = np.random.default_rng(1)
    real = sample_realization(config, rng)
    assert real.serving_distance == real.distances[real.serving_tier][0]
    assert len(real.coord_set) == 2
    assert (real.serving_tier, 1) not in real.coord_set
    # members really are the strongest non-serving stations
    again = select_coordination_set(config, real.distances, real.serving_tier, 2)
    assert real.coord_set == again


def test_sample_realization_pinned_serving_tier():
    tiers = (TierParams(0, 2e-6, 10.0, 8, 4.0, 6), TierParams(1, 2e-4, 1.0, 4, 3.5, 3))
    config = NetworkConfig(tiers=tiers, sim_radius=300.0, serving_tier=0)
    rng = np.random.default_rng(3)
    for _ in range(10):
        real = sample_realization(config, rng)
        assert real.serving_tier == 0
        assert real.distances[0].size >= 1   # resampled until present


def test_sample_realization_fixed_members():
    tiers = (TierParams(0, 1e-4, 10.0, 8, 4.0, 6), TierParams(1, 1e-4, 1.0, 4, 3.5, 3))
    config = NetworkConfig(tiers=tiers, sim_radius=400.0, coord_set_size=1,
                           serving_tier=0, coord_members=((1, 2),))
    rng = np.random.default_rng(9)
    real = sample_realization(config, rng)
    assert real.coord_set == ((1, 2),)
    assert real.distances[1].size >= 2


def test_sample_realization_infeasible_antennas():
    # association can land on a tier with too few antennas for the set
    tiers = (TierParams(0, 1e-3, 100.0, 2, 4.0, 6), TierParams(1, 1e-6, 1.0, 8, 3.5, 3))
    config = NetworkConfig(tiers=tiers, sim_radius=400.0, coord_set_size=2)
    with pytest.raises(ConfigurationError):
        sample_realization(config, np.random.default_rng(0))
