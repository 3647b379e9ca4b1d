"""Overhead-message lifecycle of a coordinated base station.

A coordinated BS learns the victim channel through an overhead message that
is delayed by D and whose content stays valid for the channel lifetime L.
The BS waits at most a window w for the message and then acts on what it
has. With all times in ms:

    silent        w < D            message missed the window, delta = 0
    coordinated   min(L, w) >= D   arrived in time & still valid, delta = 2^(-b/(n-1))
    stale-active  w >= D >= L      arrived in the window but expired, delta = 1

The coordinated case takes precedence on boundaries. Uncoordinated BSs
always have delta = 1. Closed expressions below follow from conditioning on
the lifetime; the Monte Carlo companions re-run the defining experiment
directly so the two paths stay independent checks of each other.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats

from .fading import cos_leakage_scale

QUAD_ABS_TOL = 1e-8
LIFETIME_TAIL_MASS = 1e-12     # Gamma tail truncation point for quadrature


class LinkState(enum.Enum):
    SILENT = "silent"
    COS = "cos"                # coordinated overhead state
    STALE_ACTIVE = "stale-active"
    NOT_COORDINATED = "not-coordinated"


class GammaLifetime:
    """Channel lifetime Gamma(shape, scale = mean/shape), mean in ms."""

    def __init__(self, shape: float, mean_ms: float):
        if shape < 1.0:
            raise ValueError("lifetime shape must be >= 1")
        if mean_ms <= 0.0:
            raise ValueError("lifetime mean must be > 0")
        self.shape = float(shape)
        self.mean_ms = float(mean_ms)
        self._dist = stats.gamma(a=self.shape, scale=self.mean_ms / self.shape)

    def cdf(self, x):
        return self._dist.cdf(x)

    def sf(self, x):
        return self._dist.sf(x)

    def pdf(self, x):
        return self._dist.pdf(x)

    def mean(self) -> float:
        return self.mean_ms

    def tail_point(self, mass: float = LIFETIME_TAIL_MASS) -> float:
        """Quadrature upper limit: beyond it less than ``mass`` survives."""
        return float(self._dist.ppf(1.0 - mass))

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, self.mean_ms / self.shape, size=size)

    def ppf(self, q):
        return self._dist.ppf(q)

    def __repr__(self):
        return f"GammaLifetime(shape={self.shape}, mean_ms={self.mean_ms})"


class DelaySpec:
    """Interface for message-delay laws: cdf, mean, sampling, and the
    integrated CDF used by the time-fraction quadrature. Subclasses with a
    closed-form integral override cdf_integral."""

    def cdf(self, x):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    def cdf_integral(self, y: float) -> float:
        """int_0^y F_D(x) dx, numeric fallback."""
        if y <= 0.0:
            return 0.0
        val, _ = integrate.quad(self.cdf, 0.0, y, epsabs=QUAD_ABS_TOL, limit=200)
        return val


class UniformDelay(DelaySpec):
    """Delay uniform on [0, high] ms; high = 0 degenerates to no delay."""

    def __init__(self, high_ms: float, low_ms: float = 0.0):
        if high_ms < low_ms or low_ms < 0.0:
            raise ValueError("need 0 <= low_ms <= high_ms")
        self.low_ms = float(low_ms)
        self.high_ms = float(high_ms)

    def cdf(self, x):
        if self.high_ms == self.low_ms:
            return np.where(np.asarray(x, dtype=float) >= self.low_ms, 1.0, 0.0)
        return np.clip(
            (np.asarray(x, dtype=float) - self.low_ms) / (self.high_ms - self.low_ms),
            0.0, 1.0,
        )

    def mean(self) -> float:
        return 0.5 * (self.low_ms + self.high_ms)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.low_ms, self.high_ms, size=size)

    def ppf(self, q):
        return self.low_ms + (self.high_ms - self.low_ms) * np.asarray(q, dtype=float)

    def cdf_integral(self, y: float) -> float:
        a, b = self.low_ms, self.high_ms
        if y <= a:
            return 0.0
        if b == a:
            return y - a
        if y <= b:
            return (y - a) ** 2 / (2.0 * (b - a))
        return (b - a) / 2.0 + (y - b)

    def __repr__(self):
        return f"UniformDelay(high_ms={self.high_ms})"


class DeterministicDelay(DelaySpec):
    """Point-mass delay, mostly for degenerate checks (D = 0)."""

    def __init__(self, value_ms: float):
        if value_ms < 0.0:
            raise ValueError("delay must be >= 0")
        self.value_ms = float(value_ms)

    def cdf(self, x):
        return np.where(np.asarray(x, dtype=float) >= self.value_ms, 1.0, 0.0)

    def mean(self) -> float:
        return self.value_ms

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.value_ms
        return np.full(size, self.value_ms)

    def ppf(self, q):
        return np.full_like(np.asarray(q, dtype=float), self.value_ms)

    def cdf_integral(self, y: float) -> float:
        return max(y - self.value_ms, 0.0)

    def __repr__(self):
        return f"DeterministicDelay({self.value_ms})"


@dataclass(frozen=True)
class DurationModel:
    """Lifetime/delay laws plus the waiting window, all in ms.

    window_ms = inf is the non-adaptive scheme (wait forever).
    """

    lifetime: GammaLifetime
    delay: DelaySpec
    window_ms: float

    def __post_init__(self):
        if self.window_ms < 0.0:
            raise ValueError("window_ms must be >= 0 (inf allowed)")

    def replace_window(self, window_ms: float) -> "DurationModel":
        return DurationModel(self.lifetime, self.delay, window_ms)


def classify(lifetime: float, delay: float, window: float) -> LinkState:
    """State of a coordinated BS for one message; COS wins boundaries."""
    if min(lifetime, window) >= delay:
        return LinkState.COS
    if window < delay:
        return LinkState.SILENT
    return LinkState.STALE_ACTIVE


def classify_arrays(lifetime, delay, window):
    """Vectorized delta factors (not states) for Monte Carlo paths: the
    caller applies the COS leakage scale itself."""
    lifetime = np.asarray(lifetime, dtype=float)
    delay = np.asarray(delay, dtype=float)
    cos = np.minimum(lifetime, window) >= delay
    silent = ~cos & (window < delay)
    return cos, silent


def delta_factor(
    member: bool, state: LinkState | None, feedback_bits: int, antennas: int
) -> float:
    """Interference scale factor of one BS given its overhead state."""
    if not member:
        return 1.0
    if state is LinkState.NOT_COORDINATED:
        return 1.0
    if state is LinkState.SILENT:
        return 0.0
    if state is LinkState.COS:
        return cos_leakage_scale(feedback_bits, antennas)
    if state is LinkState.STALE_ACTIVE:
        return 1.0
    raise ValueError(f"member BS needs a link state, got {state!r}")


def cos_probability(model: DurationModel) -> float:
    """P[min(L, w) >= D] by conditioning on the lifetime.

    P = sf_L(w) F_D(w) + int_0^w F_D(x) f_L(x) dx; the integral is truncated
    where the Gamma survival drops below 1e-12.
    """
    life, delay, w = model.lifetime, model.delay, model.window_ms
    hi = min(w, life.tail_point())
    head = 0.0
    if math.isfinite(w):
        head = float(life.sf(w)) * float(delay.cdf(w))
    if hi <= 0.0:
        integral = 0.0
    else:
        integral, _ = integrate.quad(
            lambda x: float(delay.cdf(x)) * float(life.pdf(x)),
            0.0, hi, epsabs=QUAD_ABS_TOL, limit=200,
        )
    return min(head + integral, 1.0)


def expected_delta(
    model: DurationModel, feedback_bits: int, antennas: int, member: bool = True
) -> float:
    """Mean interference factor E[delta] of one BS.

    For a member this is 2^(-b/(n-1)) P[coordinated] + P[stale-active]; the
    silent state contributes zero. Expectations of the mixed terms are taken
    with the arguments truncated at the window, which is what makes the
    closed form agree with the state machine itself.
    """
    if not member:
        return 1.0
    scale = cos_leakage_scale(feedback_bits, antennas)
    p_cos = cos_probability(model)
    f_d_w = 1.0 if math.isinf(model.window_ms) else float(model.delay.cdf(model.window_ms))
    p_stale = max(f_d_w - p_cos, 0.0)
    return scale * p_cos + p_stale


def cos_time_fraction(model: DurationModel) -> float:
    """Long-run fraction of time a coordinated BS spends usefully coordinated.

    Renewal average of (min(L, w) - D)^+ per lifetime block over E[L]:

        eta = mu * { sf_L(w) * int_0^w F_D + E[ (int_0^L F_D) 1{L <= w} ] }

    evaluated by quadrature against the Gamma lifetime density.
    """
    life, delay, w = model.lifetime, model.delay, model.window_ms
    hi = min(w, life.tail_point())
    head = 0.0
    if math.isfinite(w):
        head = float(life.sf(w)) * delay.cdf_integral(w)
    if hi <= 0.0:
        integral = 0.0
    else:
        integral, _ = integrate.quad(
            lambda y: delay.cdf_integral(float(y)) * float(life.pdf(y)),
            0.0, hi, epsabs=QUAD_ABS_TOL, limit=200,
        )
    return (head + integral) / life.mean()


def cos_time_fraction_mc(
    model: DurationModel, blocks: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Direct renewal-average oracle: sum (min(L_j, w) - D_j)^+ / sum L_j.

    Returns (estimate, standard error) with the ratio-estimator (delta
    method) standard error.
    """
    if blocks < 1:
        raise ValueError("need at least one block")
    life = model.lifetime.sample(rng, size=blocks)
    delay = model.delay.sample(rng, size=blocks)
    covered = np.maximum(np.minimum(life, model.window_ms) - delay, 0.0)
    total = float(life.sum())
    eta = float(covered.sum()) / total
    resid = covered - eta * life
    se = math.sqrt(float(np.mean(resid**2)) / blocks) / float(np.mean(life))
    return eta, se


@dataclass(frozen=True)
class WindowOptimum:
    window_ms: float
    objective: float            # E[delta] per unit COS time fraction
    at_boundary: bool


def optimize_window(
    model: DurationModel,
    feedback_bits: int,
    antennas: int,
    w_lo: float,
    w_hi: float,
    grid_points: int = 200,
) -> WindowOptimum:
    """Window minimizing E[delta(w)] / eta(w) on [w_lo, w_hi].

    Grid scan bracketing plus golden-section refinement. A boundary minimum
    is reported with at_boundary=True rather than refined.
    """
    if not (0.0 <= w_lo < w_hi):
        raise ValueError("need 0 <= w_lo < w_hi")
    ws = np.linspace(w_lo, w_hi, grid_points)

    def objective(w: float) -> float:
        m = model.replace_window(float(w))
        eta = cos_time_fraction(m)
        if eta <= 0.0:
            return math.inf
        return expected_delta(m, feedback_bits, antennas) / eta

    vals = np.array([objective(w) for w in ws])
    if not np.isfinite(vals).any():
        raise ValueError("COS time fraction is zero across the whole window range")
    i = int(np.nanargmin(vals))
    if i in (0, grid_points - 1):
        return WindowOptimum(float(ws[i]), float(vals[i]), at_boundary=True)
    if not (vals[i] < vals[i - 1] and vals[i] < vals[i + 1]):
        # plateau: the grid point is already as good as golden-section gets
        return WindowOptimum(float(ws[i]), float(vals[i]), at_boundary=False)
    w_star = optimize.golden(
        objective, brack=(float(ws[i - 1]), float(ws[i]), float(ws[i + 1])), tol=1e-6
    )
    return WindowOptimum(float(w_star), float(objective(w_star)), at_boundary=False)
