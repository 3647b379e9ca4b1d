"""Scenario execution: config ingestion, seeded sweeps, delimited output.

A run resolves three layers of configuration (scenario defaults, an optional
JSON config file, explicit overrides such as CLI flags), validates the
merged dict with field-path diagnostics, and executes the scenario's sweep.
Each grid point is an independent job seeded with seed XOR point-index, so
worker count cannot change the emitted bytes; rows are aggregated in grid
order. Every emitted number comes from a library operation in the other
modules; this module only orchestrates and serializes.
"""

from __future__ import annotations

import concurrent.futures
import copy
import csv
import functools
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .netmodel import ConfigurationError, NetworkConfig, TierParams
from .overhead import (
    DelaySpec,
    DeterministicDelay,
    DurationModel,
    GammaLifetime,
    UniformDelay,
    cos_time_fraction,
    cos_time_fraction_mc,
    expected_delta,
)
from .sir import (
    BoundInputs,
    GammaPoleError,
    ccdf_lower_bound,
    ccdf_upper_bound,
    estimate_ccdf,
    lower_bound_coefficient,
)
from .throughput import throughput_delay_sweep

SCENARIOS = (
    "time-fraction-sweep",
    "throughput-vs-delay-nonadaptive",
    "throughput-vs-delay-adaptive",
    "ccdf-vs-bounds",
    "custom",
)
CUSTOM_AXES = ("window_ms", "mean_delay_ms", "beta")
CSV_HEADER = ("sweep_value", "metric", "value", "stderr", "flags")


@dataclass
class Diagnostics:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class ResultRow:
    sweep_value: float
    metric: str
    value: float
    stderr: float
    flags: str = ""


@dataclass
class ExperimentSpec:
    """Fully resolved description of one run."""

    scenario: str
    network: NetworkConfig
    lifetime: GammaLifetime
    delay: DelaySpec
    window_ms: float
    sweep: dict
    trials: int
    fading_draws: int
    seed: int
    output_path: str
    workers: int = 1
    fmt: str = "csv"
    figures: bool = True
    raw: dict = field(default_factory=dict)    # resolved config, for the manifest


@dataclass
class RunResult:
    rows: list
    output_path: str
    manifest_path: str
    figure_path: str | None
    manifest: dict


# ---------------------------------------------------------------------------
# config resolution


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _as_float(x):
    # JSON cannot write inf/nan literals; accept their string forms
    return float(x)


def _num(x) -> float:
    """Lenient numeric view for validation; malformed values become nan so
    every range check fails with a diagnostic instead of a traceback."""
    try:
        return float(x)
    except (TypeError, ValueError):
        return math.nan


def _int(x):
    try:
        if isinstance(x, bool):
            return None
        return int(x)
    except (TypeError, ValueError):
        return None


def _expand_grid(grid):
    """Grids are explicit lists or a 'log:lo:hi:n' shorthand."""
    try:
        if isinstance(grid, str):
            kind, lo, hi, n = grid.split(":")
            if kind != "log":
                raise ValueError(f"unknown grid shorthand {grid!r}")
            return [float(v) for v in np.geomspace(float(lo), float(hi), int(n))]
        return [_as_float(v) for v in grid]
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"sweep grid: {e}") from e


def resolve_config(config_path=None, scenario=None, overrides=None) -> dict:
    """Merge scenario defaults <- config file <- explicit overrides."""
    file_cfg = {}
    if config_path is not None:
        with open(config_path) as fh:
            try:
                file_cfg = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigurationError(
                    f"{config_path}:{e.lineno}:{e.colno}: not valid JSON ({e.msg})"
                ) from e
        if not isinstance(file_cfg, dict):
            raise ConfigurationError(f"{config_path}: top level must be an object")
    name = scenario or file_cfg.get("scenario")
    if name is None:
        raise ConfigurationError("no scenario given (flag --scenario or config key)")
    if name not in presets.SCENARIO_DEFAULTS:
        raise ConfigurationError(
            f"scenario: unknown name {name!r}; choose one of {sorted(SCENARIOS)}"
        )
    raw = _merge(presets.scenario_defaults(name), file_cfg)
    raw["scenario"] = name
    for key, val in (overrides or {}).items():
        if val is not None:
            raw[key] = val
    # normalize string-encoded specials and grid shorthands
    dur = raw.get("durations", {})
    if "window_ms" in dur:
        dur["window_ms"] = _as_float(dur["window_ms"])
    sweep = raw.get("sweep", {})
    for key in ("window_grid_ms", "mean_delay_grid_ms", "beta_grid", "grid"):
        if key in sweep and sweep[key] is not None:
            sweep[key] = _expand_grid(sweep[key])
    if raw.get("output") is None:
        raw["output"] = f"{name}.{raw.get('format', 'csv')}"
    return raw


def _check_grid(diag, path, grid, positive=False, nonnegative=False):
    if not isinstance(grid, (list, tuple)) or len(grid) == 0:
        diag.errors.append(f"{path}: sweep grid must be a nonempty list")
        return
    vals = [float(v) for v in grid]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        diag.errors.append(f"{path}: sweep grid must be strictly ascending")
    if positive and any(v <= 0 for v in vals):
        diag.errors.append(f"{path}: values must be > 0")
    if nonnegative and any(v < 0 for v in vals):
        diag.errors.append(f"{path}: values must be >= 0")


def validate_config(raw: dict) -> Diagnostics:
    """Field-path diagnostics for a resolved config dict."""
    diag = Diagnostics()
    err, warn = diag.errors.append, diag.warnings.append

    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        err(f"scenario: unknown name {scenario!r}")
        return diag

    net = raw.get("network", {})
    tiers = net.get("tiers", [])
    if not tiers:
        err("network.tiers: empty tier list")
    antennas = []
    for i, t in enumerate(tiers):
        p = f"network.tiers[{i}]"
        if not isinstance(t, dict):
            err(f"{p}: malformed tier entry")
            continue
        if not _num(t.get("density_per_m2")) > 0:
            err(f"{p}.density_per_m2: must be > 0")
        if not _num(t.get("power_w")) > 0:
            err(f"{p}.power_w: must be > 0")
        n = _int(t.get("antennas"))
        if n is None or n < 1:
            err(f"{p}.antennas: must be an integer >= 1")
        else:
            antennas.append(n)
        if not _num(t.get("path_loss_exp")) > 2.0:
            err(f"{p}.path_loss_exp: must exceed 2")
        fb = _int(t.get("feedback_bits"))
        if fb is None or fb < 0:
            err(f"{p}.feedback_bits: must be an integer >= 0")
    if not _num(net.get("sim_radius_m")) > 0:
        err("network.sim_radius_m: must be > 0")
    size = _int(net.get("coord_set_size", 0))
    if size is None or size < 0:
        err("network.coord_set_size: must be an integer >= 0")
        size = 0
    serving = net.get("serving_tier")
    if serving is not None:
        serving = _int(serving)
        if serving is None or (tiers and not 0 <= serving < len(tiers)):
            err("network.serving_tier: out of range")
            serving = None
    if antennas and len(antennas) == len(tiers) and size >= max(antennas):
        err(
            "network.coord_set_size: zero-forcing infeasible, coordination of "
            f"{size} BSs needs more than {max(antennas)} serving antennas"
        )
    elif serving is not None and len(antennas) == len(tiers):
        if antennas[serving] < size + 1:
            err("network.coord_set_size: zero-forcing infeasible at the serving tier")
    members = net.get("coord_members")
    if members is not None:
        if len(members) != size:
            err("network.coord_members: length must equal coord_set_size")
        for j, pair in enumerate(members):
            p = f"network.coord_members[{j}]"
            k, order = (_int(pair[0]), _int(pair[1])) if len(pair) == 2 else (None, None)
            if k is None or order is None or order < 1:
                err(f"{p}: need [tier_index, order>=1]")
            elif tiers and not 0 <= k < len(tiers):
                err(f"{p}: tier index out of range")
            elif serving is not None and (k, order) == (serving, 1):
                err(f"{p}: the serving BS cannot be a coordination member")
    if net.get("cos_gain_model", "scaled-exponential") not in (
        "scaled-exponential", "deterministic",
    ):
        err("network.cos_gain_model: unknown model name")

    dur = raw.get("durations", {})
    if not _num(dur.get("lifetime_shape")) >= 1.0:
        err("durations.lifetime_shape: must be >= 1")
    if not _num(dur.get("mean_lifetime_ms")) > 0:
        err("durations.mean_lifetime_ms: must be > 0")
    delay = dur.get("delay", {})
    kind = delay.get("kind") if isinstance(delay, dict) else None
    if kind == "uniform":
        lo = _num(delay.get("low_ms", 0.0))
        hi = _num(delay.get("high_ms"))
        if not 0 <= lo <= hi:
            err("durations.delay: need 0 <= low_ms <= high_ms")
    elif kind == "deterministic":
        if not _num(delay.get("value_ms")) >= 0:
            err("durations.delay.value_ms: must be >= 0")
    else:
        err(f"durations.delay.kind: unknown kind {kind!r}")
    if not _num(dur.get("window_ms")) >= 0:
        err("durations.window_ms: must be >= 0 (inf disables the window)")

    trials = _int(raw.get("trials"))
    if trials is None or trials < 1:
        err("trials: must be an integer >= 1")
    fading = _int(raw.get("fading_draws"))
    if fading is None or fading < 1:
        err("fading_draws: must be an integer >= 1")
    seed = raw.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        err("seed: must be an integer in [0, 2^64)")
    workers = _int(raw.get("workers"))
    if workers is None or workers < 1:
        err("workers: must be an integer >= 1")
    if raw.get("format") not in ("csv", "json"):
        err("format: must be csv or json")

    sweep = raw.get("sweep", {})
    if not isinstance(sweep, dict):
        err("sweep: must be an object")
        sweep = {}
    needs_bounds = scenario == "ccdf-vs-bounds"
    if scenario == "time-fraction-sweep":
        _check_grid(diag, "sweep.window_grid_ms", sweep.get("window_grid_ms"), positive=True)
        tier_idx = _int(sweep.get("delta_tier", 0))
        if tier_idx is None or (tiers and not 0 <= tier_idx < len(tiers)):
            err("sweep.delta_tier: out of range")
    elif scenario.startswith("throughput-vs-delay"):
        _check_grid(
            diag, "sweep.mean_delay_grid_ms", sweep.get("mean_delay_grid_ms"),
            nonnegative=True,
        )
    elif scenario == "ccdf-vs-bounds":
        _check_grid(diag, "sweep.beta_grid", sweep.get("beta_grid"), positive=True)
    elif scenario == "custom":
        axis = sweep.get("axis")
        if axis not in CUSTOM_AXES:
            err(f"sweep.axis: must be one of {CUSTOM_AXES}")
        else:
            _check_grid(
                diag, "sweep.grid", sweep.get("grid"),
                positive=axis in ("window_ms", "beta"),
                nonnegative=axis == "mean_delay_ms",
            )
            needs_bounds = axis == "beta"

    if needs_bounds and not diag.errors:
        if serving is None:
            err("network.serving_tier: closed-form bounds need a pinned serving tier")
        elif members is None and size > 0:
            err("network.coord_members: closed-form bounds need fixed membership")
        else:
            a_star = _num(tiers[serving]["path_loss_exp"])
            if abs(0.5 * a_star - round(0.5 * a_star)) < 1e-12:
                warn(
                    f"network.tiers[{serving}].path_loss_exp: Gamma(1 - {a_star}/2) "
                    "pole, upper-bound rows will carry the gamma-pole flag"
                )
            if antennas[serving] - size < 2:
                err(
                    "network.coord_set_size: the lower bound's Markov factor needs "
                    "serving antennas >= coord_set_size + 2"
                )
    return diag


def build_spec(raw: dict) -> ExperimentSpec:
    """Construct the typed spec from a validated config dict."""
    net = raw["network"]
    tiers = tuple(
        TierParams(
            tier_id=i,
            density=float(t["density_per_m2"]),
            power=float(t["power_w"]),
            antennas=int(t["antennas"]),
            path_loss_exp=float(t["path_loss_exp"]),
            feedback_bits=int(t["feedback_bits"]),
        )
        for i, t in enumerate(net["tiers"])
    )
    members = net.get("coord_members")
    network = NetworkConfig(
        tiers=tiers,
        sim_radius=float(net["sim_radius_m"]),
        coord_set_size=int(net.get("coord_set_size", 0)),
        serving_tier=None if net.get("serving_tier") is None else int(net["serving_tier"]),
        coord_members=None if members is None else tuple((int(k), int(i)) for k, i in members),
        cos_gain_model=net.get("cos_gain_model", "scaled-exponential"),
    )
    dur = raw["durations"]
    lifetime = GammaLifetime(float(dur["lifetime_shape"]), float(dur["mean_lifetime_ms"]))
    d = dur["delay"]
    if d["kind"] == "uniform":
        delay = UniformDelay(float(d["high_ms"]), float(d.get("low_ms", 0.0)))
    else:
        delay = DeterministicDelay(float(d["value_ms"]))
    return ExperimentSpec(
        scenario=raw["scenario"],
        network=network,
        lifetime=lifetime,
        delay=delay,
        window_ms=float(dur["window_ms"]),
        sweep=copy.deepcopy(raw.get("sweep", {})),
        trials=int(raw["trials"]),
        fading_draws=int(raw["fading_draws"]),
        seed=int(raw["seed"]),
        output_path=raw["output"],
        workers=int(raw.get("workers", 1)),
        fmt=raw.get("format", "csv"),
        figures=bool(raw.get("figures", True)),
        raw=copy.deepcopy(raw),
    )


def load_spec(config_path=None, scenario=None, **overrides) -> ExperimentSpec:
    """One-call loader for library use; raises on invalid configs."""
    raw = resolve_config(config_path, scenario, overrides)
    diag = validate_config(raw)
    if not diag.ok:
        raise ConfigurationError("; ".join(diag.errors))
    return build_spec(raw)


# ---------------------------------------------------------------------------
# scenario runners (grid points are independent, seeded jobs)


def _point_rng(spec: ExperimentSpec, index: int) -> np.random.Generator:
    return np.random.default_rng(spec.seed ^ index)


def _tf_point(spec: ExperimentSpec, grid, index: int):
    w = grid[index]
    model = DurationModel(spec.lifetime, spec.delay, w)
    tier = spec.network.tiers[int(spec.sweep.get("delta_tier", 0))]
    eta = cos_time_fraction(model)
    eta_mc, se = cos_time_fraction_mc(model, spec.trials, _point_rng(spec, index))
    delta = expected_delta(model, tier.feedback_bits, tier.antennas)
    objective = delta / eta if eta > 0.0 else math.inf
    return [
        ResultRow(w, "cos_time_fraction", eta, 0.0),
        ResultRow(w, "cos_time_fraction_mc", eta_mc, se),
        ResultRow(w, "expected_delta", delta, 0.0),
        ResultRow(w, "window_objective", objective, 0.0, "" if eta > 0.0 else "eta-zero"),
    ]


def _thr_point(spec: ExperimentSpec, grid, window_ms: float, index: int):
    mean = grid[index]
    delay = UniformDelay(2.0 * mean)
    sweep = throughput_delay_sweep(
        spec.network, spec.lifetime, (delay,), (window_ms,),
        spec.trials, spec.fading_draws, _point_rng(spec, index),
    )
    bad = int(sweep.infinite_counts[0, 0])
    return [
        ResultRow(
            mean, "throughput", float(sweep.values[0, 0]), float(sweep.stderr[0, 0]),
            f"infinite-sir:{bad}" if bad else "",
        )
    ]


def _ccdf_rows(spec: ExperimentSpec, betas, rng: np.random.Generator):
    model = DurationModel(spec.lifetime, spec.delay, spec.window_ms)
    est = estimate_ccdf(spec.network, model, betas, spec.trials, rng)
    cos_count = spec.sweep.get("cos_count")
    inputs = BoundInputs(
        config=spec.network,
        serving_tier=spec.network.serving_tier,
        model=model,
        cos_count=spec.network.coord_set_size if cos_count is None else int(cos_count),
    )
    coeff = lower_bound_coefficient(inputs)
    rows = []
    extras = {"infinite_sir_draws": est.infinite_count}
    for j, beta in enumerate(betas):
        emp_flags = "isotonic-adjusted" if est.isotonic_adjusted else ""
        rows.append(
            ResultRow(beta, "ccdf_empirical", float(est.values[j]), float(est.stderr[j]), emp_flags)
        )
        low = ccdf_lower_bound(beta, inputs, coefficient=coeff)
        rows.append(ResultRow(beta, "ccdf_lower", low.value, 0.0, low.reason))
        try:
            up = ccdf_upper_bound(beta, inputs)
            rows.append(ResultRow(beta, "ccdf_upper", up.value, 0.0, up.reason))
        except GammaPoleError:
            rows.append(ResultRow(beta, "ccdf_upper", math.nan, 0.0, "gamma-pole"))
    return rows, extras


def _parallel_points(spec: ExperimentSpec, fn, n_points: int):
    if spec.workers <= 1 or n_points <= 1:
        batches = [fn(index) for index in range(n_points)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches = list(pool.map(fn, range(n_points)))
    return [row for batch in batches for row in batch], {}


def _run_rows(spec: ExperimentSpec):
    if spec.scenario == "time-fraction-sweep":
        grid = spec.sweep["window_grid_ms"]
        return _parallel_points(spec, functools.partial(_tf_point, spec, grid), len(grid))
    if spec.scenario == "throughput-vs-delay-nonadaptive":
        grid = spec.sweep["mean_delay_grid_ms"]
        fn = functools.partial(_thr_point, spec, grid, math.inf)
        return _parallel_points(spec, fn, len(grid))
    if spec.scenario == "throughput-vs-delay-adaptive":
        grid = spec.sweep["mean_delay_grid_ms"]
        fn = functools.partial(_thr_point, spec, grid, spec.window_ms)
        return _parallel_points(spec, fn, len(grid))
    if spec.scenario == "ccdf-vs-bounds":
        return _ccdf_rows(spec, spec.sweep["beta_grid"], _point_rng(spec, 0))
    # custom: one of the axes above with an explicit grid
    axis = spec.sweep["axis"]
    grid = spec.sweep["grid"]
    if axis == "window_ms":
        return _parallel_points(spec, functools.partial(_tf_point, spec, grid), len(grid))
    if axis == "mean_delay_ms":
        fn = functools.partial(_thr_point, spec, grid, spec.window_ms)
        return _parallel_points(spec, fn, len(grid))
    return _ccdf_rows(spec, grid, _point_rng(spec, 0))


# ---------------------------------------------------------------------------
# serialization


def _fmt_float(x: float) -> str:
    return "%.9g" % float(x)


def _jsonsafe(obj):
    """inf/nan have no JSON literals; write their string forms instead."""
    if isinstance(obj, dict):
        return {k: _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _write_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [_fmt_float(r.sweep_value), r.metric, _fmt_float(r.value),
                 _fmt_float(r.stderr), r.flags]
            )


def _row_dicts(rows):
    return [
        {"sweep_value": r.sweep_value, "metric": r.metric, "value": r.value,
         "stderr": r.stderr, "flags": r.flags}
        for r in rows
    ]


def run(spec: ExperimentSpec) -> RunResult:
    """Execute the scenario and write output, manifest, and figure."""
    rows, extras = _run_rows(spec)
    from . import __version__

    manifest = {
        "version": f"adacomp-{__version__}",
        "scenario": spec.scenario,
        "seed": spec.seed,
        "trials": spec.trials,
        "workers": spec.workers,
        "row_count": len(rows),
        "config": spec.raw,
        "extras": extras,
    }
    out = spec.output_path
    if spec.fmt == "json":
        payload = {"manifest": manifest, "rows": _row_dicts(rows)}
        with open(out, "w") as fh:
            json.dump(_jsonsafe(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        _write_csv(rows, out)
    manifest_path = out + ".manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(_jsonsafe(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    figure_path = None
    if spec.figures:
        from . import figures

        figure_path = figures.render(spec, rows, os.path.splitext(out)[0] + ".png")
    return RunResult(
        rows=rows,
        output_path=out,
        manifest_path=manifest_path,
        figure_path=figure_path,
        manifest=manifest,
    )
