"""Correlation sharing for differential feature screening.

Each feature's two-sample (or Cox score) statistic is replaced by the
largest average absolute statistic over a correlation neighbourhood of that
feature, and features are called when the shared score exceeds a cutoff,
with the false discovery rate estimated by permutation.
"""

__version__ = "0.1.0"

from .estimator import CorrelationSharingSelector
from .evaluation import fdr_curve, permutation_null, train_test_validate, truth_curve
from .exceptions import (
    CorrShareError,
    ExtensionPointError,
    NumericalError,
    ParseError,
    ValidationError,
)
from .ingest import (
    DatasetHandle,
    ExpressionMatrix,
    Survival,
    TwoClass,
    filter_top_variance,
    load_expression_matrix,
    load_outcome,
    validate_dataset,
)
from .residual import residual_corr_scan, residual_matrix
from .scores import ScoreVector, cox_score, score, two_sample_tstat
from .sharing import (
    CorrelationNeighbors,
    ShareOptions,
    SharedResult,
    neighborhoods,
    row_correlations,
    shared_stat,
)
from .simulate import SimSpec, gen_custom, gen_example1, gen_example2

__all__ = [
    "CorrelationSharingSelector",
    "CorrelationNeighbors",
    "CorrShareError",
    "DatasetHandle",
    "ExpressionMatrix",
    "ExtensionPointError",
    "NumericalError",
    "ParseError",
    "ScoreVector",
    "ShareOptions",
    "SharedResult",
    "SimSpec",
    "Survival",
    "TwoClass",
    "ValidationError",
    "cox_score",
    "fdr_curve",
    "filter_top_variance",
    "gen_custom",
    "gen_example1",
    "gen_example2",
    "load_expression_matrix",
    "load_outcome",
    "neighborhoods",
    "permutation_null",
    "residual_corr_scan",
    "residual_matrix",
    "row_correlations",
    "score",
    "shared_stat",
    "train_test_validate",
    "truth_curve",
    "two_sample_tstat",
    "validate_dataset",
]
