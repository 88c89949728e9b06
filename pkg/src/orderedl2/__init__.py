"""Ordered l2 (ordered ridge) regression and the ordered elastic net by ADMM."""

__version__ = "0.1.0"

from .data import (
    Dataset,
    SplitSpec,
    SynthSpec,
    evaluate,
    generate_synthetic,
    load_libsvm,
    split_train_test,
)
from .lambda_seq import BhqConfig, bh_lambda, inv_norm_cdf, sorted_lambda_sequence
from .penalty import (
    RegularizationSequence,
    ordered_l2_penalty,
    shrink_ordered_elastic_net,
    shrink_ordered_l2,
    sqrt_ordered_l2,
)
from .solver import (
    FitResult,
    SolverConfig,
    compute_lambda_max,
    fit_lasso,
    fit_ordered_elastic_net,
    fit_ordered_ridge,
)

__all__ = [
    "Dataset",
    "SplitSpec",
    "SynthSpec",
    "evaluate",
    "generate_synthetic",
    "load_libsvm",
    "split_train_test",
    "BhqConfig",
    "FitResult",
    "RegularizationSequence",
    "SolverConfig",
    "bh_lambda",
    "compute_lambda_max",
    "fit_lasso",
    "fit_ordered_elastic_net",
    "fit_ordered_ridge",
    "inv_norm_cdf",
    "ordered_l2_penalty",
    "shrink_ordered_elastic_net",
    "shrink_ordered_l2",
    "sorted_lambda_sequence",
    "sqrt_ordered_l2",
]
