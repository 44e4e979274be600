"""Training pipeline: gold data to fitted models.

Positives are the gold fragments; one negative per positive is sampled
uniformly from the method's other candidates (methods whose only candidate
is the gold fragment contribute none, so negatives can run short). The
name model trains on every method found under the source root, and the
classifier on the 49-feature vectors of both example sets.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .candidates import DEFAULT_MIN_STATEMENTS, Fragment
from .classifier import (
    GradientBoostingBinaryClassifier,
    Hyperparams,
    LabeledExample,
    SearchSpace,
    cross_validate,
    generate_negative,
    train,
    tune,
)
from .evaluation import (
    DatasetError,
    GoldExample,
    load_units,
    resolve_gold_fragment,
    validate_gold,
)
from .features import FEATURE_NAMES, feature_vector
from .javamodel import MethodModel, SourceUnit, parse_file
from .naming import NameModel, split_subtokens, train_name_model
from .recommender import candidate_confidence


def discover_units(src_root) -> dict[str, SourceUnit]:
    """Parse every .java file under src_root, keyed by relative path."""
    units: dict[str, SourceUnit] = {}
    for dirpath, _dirnames, filenames in os.walk(src_root):
        for fn in sorted(filenames):
            if not fn.endswith(".java"):
                continue
            full = os.path.join(dirpath, fn)
            rel = os.path.relpath(full, src_root)
            units[rel] = parse_file(full)
    return units


def name_corpus(units: dict[str, SourceUnit]) -> list[tuple[list[str], list[str]]]:
    corpus: list[tuple[list[str], list[str]]] = []
    for rel in sorted(units):
        for method in units[rel].methods:
            bag = [
                sub
                for ident in method.body_identifiers
                for sub in split_subtokens(ident)
            ]
            name = split_subtokens(method.name)
            if name:
                corpus.append((bag, name))
    return corpus


@dataclass
class ExampleSet:
    examples: list[LabeledExample]
    positives: int
    negatives: int


def build_examples(
    dataset: list[GoldExample],
    units: dict[str, SourceUnit],
    name_provider,
    seed: int = 0,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> ExampleSet:
    """Labeled 49-feature examples: gold fragments plus sampled negatives."""
    issues = validate_gold(dataset, units, min_statements)
    if issues:
        listing = "; ".join(
            f"{i.gold.file}:{i.gold.fragment_start_line} {i.problem}" for i in issues
        )
        raise DatasetError(f"gold dataset has unusable entries: {listing}")

    def example_for(method: MethodModel, fragment: Fragment, label: int, file: str):
        prediction = candidate_confidence(method, fragment, name_provider)
        confidence = prediction.confidence if prediction else 0.0
        vector = feature_vector(method, fragment, confidence)
        origin = (
            file,
            fragment.block_path,
            fragment.start_index,
            fragment.end_index,
        )
        return LabeledExample(vector=vector, label=label, origin=origin)

    examples: list[LabeledExample] = []
    negatives = 0
    neg_seeds = np.random.SeedSequence(seed).spawn(len(dataset))
    for i, gold in enumerate(dataset):
        unit = units[gold.file]
        method = unit.find_method(gold.method_name, gold.method_start_line)
        fragment = resolve_gold_fragment(method, gold)
        examples.append(example_for(method, fragment, 1, gold.file))
        neg = generate_negative(
            method,
            fragment,
            rng_seed=int(neg_seeds[i].generate_state(1)[0]),
            min_statements=min_statements,
        )
        if neg is not None:
            examples.append(example_for(method, neg, 0, gold.file))
            negatives += 1
    return ExampleSet(examples=examples, positives=len(dataset), negatives=negatives)


@dataclass
class TrainResult:
    model: GradientBoostingBinaryClassifier
    name_model: NameModel
    examples: ExampleSet
    hyperparams: Hyperparams
    cv_f_measure: float | None
    tuned: bool
    seed: int

    def report(self) -> dict:
        return {
            "positives": self.examples.positives,
            "negatives": self.examples.negatives,
            "examples": len(self.examples.examples),
            "hyperparams": {
                "n_trees": self.hyperparams.n_trees,
                "max_depth": self.hyperparams.max_depth,
                "learning_rate": self.hyperparams.learning_rate,
                "min_samples_leaf": self.hyperparams.min_samples_leaf,
                "subsample": self.hyperparams.subsample,
            },
            "cv_f_measure": self.cv_f_measure,
            "tuned": self.tuned,
            "seed": self.seed,
        }


def train_pipeline(
    dataset: list[GoldExample],
    src_root,
    name_provider_factory,
    seed: int = 0,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
    hyperparams: Hyperparams | None = None,
    tune_trials: int = 0,
    cv_folds: int = 5,
    feature_names: tuple[str, ...] = FEATURE_NAMES,
) -> TrainResult:
    """End-to-end training.

    ``name_provider_factory`` receives the freshly trained name model and
    returns the provider used for confidence features (letting the builtin
    provider use that model while fixed/remote providers ignore it).
    """
    all_units = discover_units(src_root)
    gold_units = load_units(dataset, src_root)
    corpus = name_corpus(all_units)
    name_model = train_name_model(corpus)
    provider = name_provider_factory(name_model)

    example_set = build_examples(
        dataset, gold_units, provider, seed=seed, min_statements=min_statements
    )
    cv_score: float | None = None
    tuned = False
    hp = hyperparams or Hyperparams()
    if tune_trials > 0:
        hp, cv_score = tune(
            example_set.examples,
            SearchSpace(),
            trials=tune_trials,
            folds=cv_folds,
            seed=seed,
            feature_names=feature_names,
        )
        tuned = True
    else:
        cv_score = cross_validate(
            example_set.examples, hp, folds=cv_folds, seed=seed,
            feature_names=feature_names,
        )
    model = train(example_set.examples, hp, seed=seed, feature_names=feature_names)
    return TrainResult(
        model=model,
        name_model=name_model,
        examples=example_set,
        hyperparams=hp,
        cv_f_measure=cv_score,
        tuned=tuned,
        seed=seed,
    )
