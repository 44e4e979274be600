"""Extract Method recommendation toolkit."""

from .candidates import (
    ExtractabilityReport,
    Fragment,
    check_extractable,
    enumerate_candidates,
    make_fragment,
    remaining_statements,
)
from .classifier import (
    GradientBoostingBinaryClassifier,
    Hyperparams,
    LabeledExample,
    SearchSpace,
    cross_validate,
    generate_negative,
    gini_importance,
    predict_proba_vector,
    train,
    tune,
)
from .evaluation import (
    EvalMetrics,
    GoldExample,
    confidence_comparison,
    evaluate,
    importance_report,
    load_gold_dataset,
    matches,
    tolerance_lines,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    assemble_vector,
    feature_vector,
    functional_features,
    structural_features,
)
from .javamodel import (
    Block,
    ElementRef,
    JavaParseError,
    MethodModel,
    SourceUnit,
    Statement,
    parse_file,
    parse_source,
)
from .naming import (
    NameModel,
    NamePrediction,
    SyntheticMethod,
    predict_name,
    remote_predict,
    train_name_model,
    wrap_fragment,
)
from .recommender import Recommendation, recommend

__version__ = "0.1.0"

__all__ = [
    "Block",
    "ElementRef",
    "EvalMetrics",
    "ExtractabilityReport",
    "FEATURE_NAMES",
    "FeatureVector",
    "Fragment",
    "GoldExample",
    "GradientBoostingBinaryClassifier",
    "Hyperparams",
    "JavaParseError",
    "LabeledExample",
    "MethodModel",
    "NameModel",
    "NamePrediction",
    "Recommendation",
    "SearchSpace",
    "SourceUnit",
    "Statement",
    "SyntheticMethod",
    "assemble_vector",
    "check_extractable",
    "confidence_comparison",
    "cross_validate",
    "enumerate_candidates",
    "evaluate",
    "feature_vector",
    "functional_features",
    "generate_negative",
    "gini_importance",
    "importance_report",
    "load_gold_dataset",
    "make_fragment",
    "matches",
    "parse_file",
    "parse_source",
    "predict_name",
    "predict_proba_vector",
    "recommend",
    "remaining_statements",
    "remote_predict",
    "structural_features",
    "tolerance_lines",
    "train",
    "train_name_model",
    "tune",
    "wrap_fragment",
]
