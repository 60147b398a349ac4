"""Eberhard and Clauser-Horne Bell-test statistics with Chebyshev significance."""

__version__ = "0.1.0"

from .counts import (
    BlockRecord,
    ExperimentSeries,
    SettingLabel,
    SettingPairCounts,
    aggregate,
    parse_series,
    read_series,
    serialize_series,
)
from .inequalities import (
    JValue,
    ProbabilityQuad,
    TValue,
    ch_probability_margin,
    drift_normalize,
    eberhard_j,
    eberhard_j_four,
    equivalence_check,
    ratio_T,
)
from .significance import (
    BlockStatistics,
    ChebyshevInterval,
    block_stats,
    chebyshev_interval,
    chebyshev_tail,
    min_confidence_for_violation,
    sigma_violation,
)
from .nonequivalence import NoneqReport, TwoPointModel, construct, empirical_check, moments
from .simulator import (
    LhvStrategy,
    SimConfig,
    SourceModel,
    expected_j,
    lhv_extremal_j,
    optimize_eberhard,
    outcome_probs,
    simulate,
)
