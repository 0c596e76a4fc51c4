"""Coined quantum walk on a line with a single phase defect.

Exact time evolution, closed-form bound states of the two-step operator,
asymptotic localization predictions and a simulation-only spectral oracle.
"""

from qwalk.core import (
    CoinOperator,
    DefectConfig,
    InitialState,
    WalkerState,
    make_coin,
    make_initial_state,
)
from qwalk.evolution import (
    Distribution,
    WindowOverflowError,
    distribution,
    evolve,
    spread_stddev,
    step,
    time_averaged_probability,
)
from qwalk.boundstate import (
    BoundState,
    build_bound_state,
    compute_y,
    defect_residual,
    find_bound_states,
    find_eigenvalues,
)
from qwalk.localization import (
    LocalizationReport,
    asymptotic_probability,
    defect_position_scan,
    dress_one_step,
    localization_report,
    overlap_even,
    overlap_odd,
    theta_scan,
)
from qwalk.oracle import (
    SpectrumEstimate,
    autocorrelation_series,
    decay_profile_fit,
    estimate_eigenphases,
)

__version__ = "0.1.0"

__all__ = [
    "BoundState",
    "CoinOperator",
    "DefectConfig",
    "Distribution",
    "InitialState",
    "LocalizationReport",
    "SpectrumEstimate",
    "WalkerState",
    "WindowOverflowError",
    "asymptotic_probability",
    "autocorrelation_series",
    "build_bound_state",
    "compute_y",
    "decay_profile_fit",
    "defect_position_scan",
    "defect_residual",
    "distribution",
    "dress_one_step",
    "estimate_eigenphases",
    "evolve",
    "find_bound_states",
    "find_eigenvalues",
    "localization_report",
    "make_coin",
    "make_initial_state",
    "overlap_even",
    "overlap_odd",
    "spread_stddev",
    "step",
    "theta_scan",
    "time_averaged_probability",
]
