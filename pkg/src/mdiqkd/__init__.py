"""Key rates for measurement-device-independent QKD.

The package simulates the relay's Bell-state measurement exactly in the
Fock basis for photon-number-resolved inputs, folds the result with the
photon statistics of several source families (coherent-state
superpositions, phase-randomized coherent states, single photons),
bounds the single-photon contribution with decoy-state estimators, and
applies finite-size penalties to every observed quantity.
"""

from .bsm import (
    BellOutcome,
    DetectorParams,
    MAX_CUTOFF,
    MAX_TOTAL_PHOTONS,
    OutputDistribution,
    Polarization,
    YieldTable,
    bell_yield,
    click_probability,
    propagate,
    yield_tables,
)
from .config import DistanceGrid, Scenario, load_scenario, parse_kv_text, scenario_from_mapping
from .decoy import (
    DecoyEstimate,
    DecoyInputs,
    Direction,
    FLAG_CLAMPED,
    FLAG_ERROR_ABOVE_HALF,
    VacuumGains,
    one_decoy_css,
    two_decoy_generic,
)
from .errors import ConfigError, CutoffError, DomainError
from .finite_key import (
    DEFAULT_EPSILON,
    FiniteKeyConfig,
    FluctuationInterval,
    FluctuationMethod,
    chernoff_interval,
    gain_interval,
    standard_interval,
    worst_case_decoy,
)
from .rates import (
    GainSet,
    KeyRatePoint,
    SinglePhotonQuantities,
    SystemParams,
    binary_entropy,
    gains,
    key_rate,
    true_single_photon_quantities,
)
from .sources import PhotonDistribution, SourceKind, SourceSpec, build_distribution
from .sweep import (
    CalibrationResult,
    calibrate_pulse_pairs,
    compare_sources,
    comparison_scenarios,
    cutoff_distance,
    evaluate_point,
    optimize_intensities,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BellOutcome",
    "CalibrationResult",
    "ConfigError",
    "CutoffError",
    "DecoyEstimate",
    "DecoyInputs",
    "DetectorParams",
    "Direction",
    "DistanceGrid",
    "DomainError",
    "DEFAULT_EPSILON",
    "FLAG_CLAMPED",
    "FLAG_ERROR_ABOVE_HALF",
    "FiniteKeyConfig",
    "FluctuationInterval",
    "FluctuationMethod",
    "GainSet",
    "KeyRatePoint",
    "MAX_CUTOFF",
    "MAX_TOTAL_PHOTONS",
    "OutputDistribution",
    "PhotonDistribution",
    "Polarization",
    "Scenario",
    "SinglePhotonQuantities",
    "SourceKind",
    "SourceSpec",
    "SystemParams",
    "VacuumGains",
    "YieldTable",
    "bell_yield",
    "binary_entropy",
    "build_distribution",
    "calibrate_pulse_pairs",
    "chernoff_interval",
    "click_probability",
    "compare_sources",
    "comparison_scenarios",
    "cutoff_distance",
    "evaluate_point",
    "gain_interval",
    "gains",
    "key_rate",
    "load_scenario",
    "one_decoy_css",
    "optimize_intensities",
    "parse_kv_text",
    "propagate",
    "run_sweep",
    "scenario_from_mapping",
    "standard_interval",
    "true_single_photon_quantities",
    "two_decoy_generic",
    "worst_case_decoy",
    "write_csv",
    "yield_tables",
]
