"""Adaptive base-station coordination in multi-tier cellular networks.

Monte Carlo and closed-form machinery for downlink SIR and throughput when
coordinated zero-forcing runs on delayed, quantized overhead messages with a
bounded waiting window.
"""

from .netmodel import (
    ConfigurationError,
    NetworkConfig,
    NetworkRealization,
    TierParams,
    associate,
    sample_realization,
    select_coordination_set,
)
from .fading import (
    cos_interferer_gain_shortcut,
    cos_leakage_scale,
    nos_interferer_gain,
    random_codebook,
    rvq_quantize,
    rvq_residual_samples,
    serving_gain,
)
from .overhead import (
    DelaySpec,
    DeterministicDelay,
    DurationModel,
    GammaLifetime,
    LinkState,
    UniformDelay,
    WindowOptimum,
    classify,
    classify_arrays,
    cos_probability,
    cos_time_fraction,
    cos_time_fraction_mc,
    delta_factor,
    expected_delta,
    optimize_window,
)
from .sir import (
    BoundInputs,
    BoundValue,
    CcdfEstimate,
    GammaPoleError,
    SeriesDivergenceError,
    SirSample,
    TrialDraw,
    auto_sim_radius,
    ccdf_lower_bound,
    ccdf_upper_bound,
    cross_tier_ratio_moment,
    distance_ratio_moment,
    equivalent_density,
    estimate_ccdf,
    evaluate_sir,
    lower_bound_coefficient,
    sample_trial,
    simulate_sir,
)
from .throughput import (
    DelaySweepResult,
    EmpiricalCcdf,
    ThroughputResult,
    cos_count_pmf,
    ergodic_throughput_from_ccdf,
    ergodic_throughput_mc,
    simulate_sir_batch,
    throughput_delay_sweep,
)
from .experiments import (
    Diagnostics,
    ExperimentSpec,
    ResultRow,
    RunResult,
    build_spec,
    load_spec,
    resolve_config,
    run,
    validate_config,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "NetworkConfig",
    "NetworkRealization",
    "TierParams",
    "associate",
    "sample_realization",
    "select_coordination_set",
    "cos_interferer_gain_shortcut",
    "cos_leakage_scale",
    "nos_interferer_gain",
    "random_codebook",
    "rvq_quantize",
    "rvq_residual_samples",
    "serving_gain",
    "DelaySpec",
    "DeterministicDelay",
    "DurationModel",
    "GammaLifetime",
    "LinkState",
    "UniformDelay",
    "WindowOptimum",
    "classify",
    "classify_arrays",
    "cos_probability",
    "cos_time_fraction",
    "cos_time_fraction_mc",
    "delta_factor",
    "expected_delta",
    "optimize_window",
    "BoundInputs",
    "BoundValue",
    "CcdfEstimate",
    "GammaPoleError",
    "SeriesDivergenceError",
    "SirSample",
    "TrialDraw",
    "auto_sim_radius",
    "ccdf_lower_bound",
    "ccdf_upper_bound",
    "cross_tier_ratio_moment",
    "distance_ratio_moment",
    "equivalent_density",
    "estimate_ccdf",
    "evaluate_sir",
    "lower_bound_coefficient",
    "sample_trial",
    "simulate_sir",
    "DelaySweepResult",
    "EmpiricalCcdf",
    "ThroughputResult",
    "cos_count_pmf",
    "ergodic_throughput_from_ccdf",
    "ergodic_throughput_mc",
    "simulate_sir_batch",
    "throughput_delay_sweep",
    "Diagnostics",
    "ExperimentSpec",
    "ResultRow",
    "RunResult",
    "build_spec",
    "load_spec",
    "resolve_config",
    "run",
    "validate_config",
    "__version__",
]
