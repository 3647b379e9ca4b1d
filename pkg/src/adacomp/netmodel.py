"""Multi-tier cellular deployment geometry.

Each tier is a homogeneous planar Poisson point process observed from a
reference user at the origin. Only base-station distances matter for the
downlink SIR, so a realization stores the ascending distance sequence per
tier rather than planar coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Raised when a network description cannot be simulated as given."""


@dataclass(frozen=True)
class TierParams:
    """Static parameters of one deployment tier.

    Every base station in a tier shares the same transmit power, antenna
    count, path-loss exponent and feedback budget.
    """

    tier_id: int
    density: float          # BS per m^2
    power: float            # W
    antennas: int           # transmit antennas per BS
    path_loss_exp: float    # > 2 so far-field interference has finite mean
    feedback_bits: int      # quantization codebook size is 2**feedback_bits

    def __post_init__(self):
        if self.density <= 0.0:
            raise ConfigurationError(f"tier {self.tier_id}: density must be > 0")
        if self.power <= 0.0:
            raise ConfigurationError(f"tier {self.tier_id}: power must be > 0")
        if self.antennas < 1:
            raise ConfigurationError(f"tier {self.tier_id}: antennas must be >= 1")
        if self.path_loss_exp <= 2.0:
            raise ConfigurationError(
                f"tier {self.tier_id}: path_loss_exp must be > 2, got {self.path_loss_exp}"
            )
        if self.feedback_bits < 0:
            raise ConfigurationError(f"tier {self.tier_id}: feedback_bits must be >= 0")


@dataclass(frozen=True)
class NetworkConfig:
    """A K-tier network plus the coordination policy applied to it.

    serving_tier pins the serving BS to the nearest member of one tier
    (index into ``tiers``); None selects by max average received power.
    coord_members, when given, fixes the coordination set to explicit
    (tier_index, order_index) pairs with 1-based order (i-th closest in
    its tier); None selects the strongest non-serving interferers.
    """

    tiers: tuple[TierParams, ...]
    sim_radius: float                   # m, observation disk radius
    coord_set_size: int = 0
    serving_tier: int | None = None
    coord_members: tuple[tuple[int, int], ...] | None = None
    cos_gain_model: str = "scaled-exponential"   # or "deterministic"

    def __post_init__(self):
        if not self.tiers:
            raise ConfigurationError("at least one tier is required")
        object.__setattr__(self, "tiers", tuple(self.tiers))
        if self.sim_radius <= 0.0:
            raise ConfigurationError("sim_radius must be > 0")
        if self.coord_set_size < 0:
            raise ConfigurationError("coord_set_size must be >= 0")
        if self.coord_set_size >= max(t.antennas for t in self.tiers):
            raise ConfigurationError(
                "zero-forcing infeasible: coord_set_size must be below the serving "
                "tier's antenna count, and no tier has enough antennas"
            )
        if self.serving_tier is not None:
            if not 0 <= self.serving_tier < len(self.tiers):
                raise ConfigurationError(f"serving_tier {self.serving_tier} out of range")
            if self.tiers[self.serving_tier].antennas < self.coord_set_size + 1:
                raise ConfigurationError(
                    "zero-forcing infeasible: serving tier needs antennas >= coord_set_size + 1"
                )
        if self.coord_members is not None:
            members = tuple((int(k), int(i)) for k, i in self.coord_members)
            object.__setattr__(self, "coord_members", members)
            if len(members) != self.coord_set_size:
                raise ConfigurationError("coord_members length must equal coord_set_size")
            for k, i in members:
                if not 0 <= k < len(self.tiers):
                    raise ConfigurationError(f"coord member tier {k} out of range")
                if i < 1:
                    raise ConfigurationError("coord member order index is 1-based")
        if self.cos_gain_model not in ("scaled-exponential", "deterministic"):
            raise ConfigurationError(f"unknown cos_gain_model {self.cos_gain_model!r}")


@dataclass
class NetworkRealization:
    """One sampled deployment seen from the origin.

    distances[k] is the ascending distance array of tier k. The serving BS
    is (serving_tier, order 1); coord_set lists non-serving coordinated BSs
    as (tier_index, order_index) with 1-based order.
    """

    config: NetworkConfig
    distances: list[np.ndarray]
    serving_tier: int
    serving_distance: float
    coord_set: tuple[tuple[int, int], ...]
    resamples: int = 0
    meta: dict = field(default_factory=dict)

    def distance(self, tier: int, order: int) -> float:
        return float(self.distances[tier][order - 1])


def average_power(tier: TierParams, distance: float) -> float:
    """Mean received power p * r^-alpha used for cell association."""
    return tier.power * distance ** -tier.path_loss_exp


def sample_tier_distances(tier: TierParams, sim_radius: float, rng: np.random.Generator) -> np.ndarray:
    """Ascending distances of one tier's Poisson process on the disk."""
    n = rng.poisson(tier.density * math.pi * sim_radius**2)
    # uniform on the disk: r = R * sqrt(U)
    r = sim_radius * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    r.sort()
    return r


def associate(config: NetworkConfig, nearest: np.ndarray) -> int:
    """Tier index winning the max average received power association.

    nearest[k] is tier k's closest BS distance (inf when the tier is empty
    in the observation disk). Ties break toward the lower tier index.
    """
    best, best_k = -math.inf, None
    for k, tier in enumerate(config.tiers):
        if not math.isfinite(nearest[k]):
            continue
        p = average_power(tier, float(nearest[k]))
        if p > best:
            best, best_k = p, k
    if best_k is None:
        raise ConfigurationError("no base station in the observation disk")
    return best_k


def select_coordination_set(
    config: NetworkConfig,
    distances: list[np.ndarray],
    serving_tier: int,
    size: int,
) -> tuple[tuple[int, int], ...]:
    """The ``size`` strongest non-serving BSs by average received power.

    Ties break by tier index, then by order within the tier. Only a bounded
    candidate pool per tier is examined: average power decreases with
    distance inside a tier, so the top ``size + 1`` per tier suffice.
    """
    candidates = []
    for k, tier in enumerate(config.tiers):
        r = distances[k]
        start = 1 if k == serving_tier else 0   # skip the serving BS itself
        stop = min(len(r), start + size + 1)
        for j in range(start, stop):
            candidates.append((-average_power(tier, float(r[j])), k, j + 1))
    if len(candidates) < size:
        raise ConfigurationError(
            f"coordination set of size {size} requested but only "
            f"{len(candidates)} non-serving BSs realized"
        )
    candidates.sort()
    return tuple((k, order) for _, k, order in candidates[:size])


def sample_realization(config: NetworkConfig, rng: np.random.Generator) -> NetworkRealization:
    """Draw a deployment, pick the serving BS, and form the coordination set.

    Realizations where the required tiers are empty are resampled and the
    resample count recorded.
    """
    resamples = 0
    while True:
        distances = [sample_tier_distances(t, config.sim_radius, rng) for t in config.tiers]
        nearest = np.array([r[0] if len(r) else math.inf for r in distances])
        if config.serving_tier is not None:
            k_star = config.serving_tier
            if not math.isfinite(nearest[k_star]):
                resamples += 1
                continue
        else:
            if not np.isfinite(nearest).any():
                resamples += 1
                continue
            k_star = associate(config, nearest)
        if config.tiers[k_star].antennas < config.coord_set_size + 1:
            raise ConfigurationError(
                f"serving tier {k_star} has {config.tiers[k_star].antennas} antennas; "
                f"coordination of {config.coord_set_size} BSs needs at least "
                f"{config.coord_set_size + 1}"
            )
        if config.coord_members is not None:
            coord = config.coord_members
            ok = all(len(distances[k]) >= i for k, i in coord) and all(
                (k, i) != (k_star, 1) for k, i in coord
            )
            if not ok:
                resamples += 1
                continue
        else:
            try:
                coord = select_coordination_set(
                    config, distances, k_star, config.coord_set_size
                )
            except ConfigurationError:
                resamples += 1
                continue
        return NetworkRealization(
            config=config,
            distances=distances,
            serving_tier=k_star,
            serving_distance=float(nearest[k_star]),
            coord_set=coord,
            resamples=resamples,
        )
