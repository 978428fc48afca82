"""Unequal sub-array hybrid analog combining toolkit.

Deterministic simulation of sub-connected analog combining at a massive
MIMO receiver: geometric channel generation, factorization-aided combiner
construction, antenna-allocation search, rate/power/energy metrics, and a
seeded Monte Carlo sweep harness.
"""

from ._kernels import available_backends, default_backend_name
from .allocation import (
    SearchOutcome,
    SearchSpace,
    enumerate_compositions,
    enumerate_partitions_nondecreasing,
    esa_baseline,
    fast_uesa,
    order_by_pi_desc,
    pi_metric,
    uesa_es,
    uesa_res,
    uesa_res_et,
)
from .channel import (
    ChannelMatrix,
    ChannelParams,
    array_response,
    generate_channel,
    order_rows_desc_norm,
    read_channel_txt,
    write_channel_txt,
)
from .combiner import (
    Allocation,
    AnalogCombiner,
    CombiningResult,
    PhaseSet,
    dominant_eigenpair,
    factorized_combining,
    quantize_phase_indices,
    quantize_phases,
    rank_one_inverse_update,
)
from .errors import NumericalBreakdownError, UnsupportedConfigurationError
from .harness import (
    ExperimentConfig,
    SweepRecord,
    emit_csv,
    run_sweep,
    trial_rng,
    validate,
)
from .metrics import (
    PowerModel,
    RateReport,
    achievable_rate,
    energy_efficiency,
    power_consumption,
    rate_report,
    snr_db_to_rho,
    upper_bound_ub,
    upper_bound_ub1,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AnalogCombiner",
    "ChannelMatrix",
    "ChannelParams",
    "CombiningResult",
    "ExperimentConfig",
    "NumericalBreakdownError",
    "PhaseSet",
    "PowerModel",
    "RateReport",
    "SearchOutcome",
    "SearchSpace",
    "SweepRecord",
    "UnsupportedConfigurationError",
    "achievable_rate",
    "array_response",
    "available_backends",
    "default_backend_name",
    "dominant_eigenpair",
    "emit_csv",
    "energy_efficiency",
    "enumerate_compositions",
    "enumerate_partitions_nondecreasing",
    "esa_baseline",
    "factorized_combining",
    "fast_uesa",
    "generate_channel",
    "order_by_pi_desc",
    "order_rows_desc_norm",
    "pi_metric",
    "power_consumption",
    "quantize_phase_indices",
    "quantize_phases",
    "rank_one_inverse_update",
    "rate_report",
    "read_channel_txt",
    "run_sweep",
    "snr_db_to_rho",
    "trial_rng",
    "uesa_es",
    "uesa_res",
    "uesa_res_et",
    "upper_bound_ub",
    "upper_bound_ub1",
    "validate",
    "write_channel_txt",
]
