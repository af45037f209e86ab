"""Directional influence networks from panel time series.

The package turns a per-entity panel of yearly levels into rate series,
measures how each variable pair co-moves when one or the other side is
volatile, and aggregates the asymmetry across entities into a directed
influence network with per-edge significance. See the README for the
method outline and the CLI walk-through.
"""

from . import errors
from .errors import (
    ConfigurationError,
    DegenerateSeriesError,
    DegenerateSubsetError,
    DegenerateTestError,
    DuplicateRowError,
    InsufficientDataError,
    SchemaError,
    VcnetError,
)
from .estimator import RateTransformer, VCNetworkAnalyzer
from .inference import (
    BACKWARD,
    FORWARD,
    UNDECIDED,
    CorrelationEdge,
    InfluenceEdge,
    InfluenceNetwork,
    PairAggregate,
    ZTestResult,
    aggregate_pair,
    build_networks,
    z_test,
)
from .panel import (
    DEFAULT_DENOMINATORS,
    DEFAULT_LABELS,
    MIN_RATE_POINTS,
    CsvSchema,
    Dataset,
    PanelSeries,
    VariableId,
    complete_window,
    dataset_from_frame,
    default_variables,
    eligible_entities,
    load_csv,
    save_csv,
)
from .rates import RatePanel, compute_rates, rate_series
from .stats import (
    BatchPairStats,
    MomentPair,
    PairFirmStats,
    VolatilitySubset,
    constrained_pearson,
    moments,
    omega,
    pearson,
    vc_pair,
    vc_pair_batch,
)
from .synth import Link, SynthSpec, generate, load_spec

__version__ = "0.1.0"

__all__ = [
    "BACKWARD",
    "BatchPairStats",
    "ConfigurationError",
    "CorrelationEdge",
    "CsvSchema",
    "Dataset",
    "DEFAULT_DENOMINATORS",
    "DEFAULT_LABELS",
    "DegenerateSeriesError",
    "DegenerateSubsetError",
    "DegenerateTestError",
    "DuplicateRowError",
    "FORWARD",
    "InfluenceEdge",
    "InfluenceNetwork",
    "InsufficientDataError",
    "Link",
    "MIN_RATE_POINTS",
    "MomentPair",
    "PairAggregate",
    "PairFirmStats",
    "PanelSeries",
    "RatePanel",
    "RateTransformer",
    "SchemaError",
    "SynthSpec",
    "UNDECIDED",
    "VCNetworkAnalyzer",
    "VariableId",
    "VcnetError",
    "VolatilitySubset",
    "ZTestResult",
    "aggregate_pair",
    "build_networks",
    "complete_window",
    "compute_rates",
    "constrained_pearson",
    "dataset_from_frame",
    "default_variables",
    "eligible_entities",
    "errors",
    "generate",
    "load_csv",
    "load_spec",
    "moments",
    "omega",
    "pearson",
    "rate_series",
    "save_csv",
    "vc_pair",
    "vc_pair_batch",
    "z_test",
]
