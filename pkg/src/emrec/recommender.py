"""Ranked Extract Method recommendations for a single method."""

from __future__ import annotations

from dataclasses import dataclass

from .candidates import DEFAULT_MIN_STATEMENTS, Fragment, enumerate_candidates
from .classifier import GradientBoostingBinaryClassifier, predict_proba_vectors
from .features import feature_vector
from .javamodel import MethodModel
from .naming import NamePrediction, UnparseableSourceError, wrap_fragment

DEFAULT_TOP_K = 5
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class Recommendation:
    fragment: Fragment
    probability: float
    predicted_name: NamePrediction | None
    rank: int

    @property
    def confidence(self) -> float:
        return self.predicted_name.confidence if self.predicted_name else 0.0


def candidate_confidence(method: MethodModel, fragment: Fragment, name_provider):
    """Top-1 prediction for the wrapped fragment.

    A provider that cannot parse the wrapped source contributes a zero
    confidence instead of failing the run; other provider failures
    propagate.
    """
    synthetic = wrap_fragment(method, fragment)
    try:
        predictions = name_provider.predict(synthetic.source, 1)
    except UnparseableSourceError:
        return None
    return predictions[0] if predictions else None


def recommend(
    method: MethodModel,
    model: GradientBoostingBinaryClassifier,
    name_provider,
    k: int = DEFAULT_TOP_K,
    threshold: float = DEFAULT_THRESHOLD,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> list[Recommendation]:
    """Score every candidate and return the top-k above the threshold.

    Probability ties keep candidate enumeration order; overlapping
    candidates are not suppressed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= threshold < 1.0:
        raise ValueError("threshold must be in [0, 1)")
    fragments = enumerate_candidates(method, min_statements)
    if not fragments:
        return []
    predictions: list[NamePrediction | None] = []
    vectors = []
    for fragment in fragments:
        prediction = candidate_confidence(method, fragment, name_provider)
        predictions.append(prediction)
        confidence = prediction.confidence if prediction else 0.0
        vectors.append(feature_vector(method, fragment, confidence))
    probabilities = predict_proba_vectors(model, vectors)
    scored = list(zip(probabilities, fragments, predictions))
    scored.sort(key=lambda item: -item[0])
    out: list[Recommendation] = []
    for probability, fragment, prediction in scored:
        if probability <= threshold:
            continue
        out.append(
            Recommendation(
                fragment=fragment,
                probability=probability,
                predicted_name=prediction,
                rank=len(out) + 1,
            )
        )
        if len(out) == k:
            break
    return out
