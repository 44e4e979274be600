"""Evaluation against gold extraction data.

Gold examples arrive as JSON Lines (one object per line with fields
``file``, ``method_name``, ``method_start_line``, ``fragment_start_line``,
``fragment_end_line``). A recommendation matches a gold target when both
endpoints are within the tolerance line count, computed as
``ceil(method LOC * tolerance)``; matching is one-to-one, greedily in
rank order, nearest target first.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction

from .candidates import DEFAULT_MIN_STATEMENTS, Fragment, check_extractable, make_fragment
from .classifier import GradientBoostingBinaryClassifier, gini_importance, LabeledExample
from .features import CONFIDENCE_NAME
from .javamodel import MethodModel, SourceUnit, parse_file
from .recommender import DEFAULT_THRESHOLD, DEFAULT_TOP_K, Recommendation, recommend

TOLERANCE_STEPS = (0.0, 0.01, 0.02, 0.03)


class DatasetError(Exception):
    """A gold dataset entry cannot be used."""


@dataclass(frozen=True)
class GoldExample:
    file: str
    method_name: str
    method_start_line: int
    fragment_start_line: int
    fragment_end_line: int

    @classmethod
    def from_json(cls, line: str) -> "GoldExample":
        data = json.loads(line)
        try:
            return cls(
                file=data["file"],
                method_name=data["method_name"],
                method_start_line=int(data["method_start_line"]),
                fragment_start_line=int(data["fragment_start_line"]),
                fragment_end_line=int(data["fragment_end_line"]),
            )
        except KeyError as exc:
            raise DatasetError(f"gold entry is missing field {exc}")

    def to_json(self) -> str:
        return json.dumps(
            {
                "file": self.file,
                "method_name": self.method_name,
                "method_start_line": self.method_start_line,
                "fragment_start_line": self.fragment_start_line,
                "fragment_end_line": self.fragment_end_line,
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    f_measure: float
    tolerance: float
    recommended_count: int
    gold_count: int
    matched_gold_count: int
    correct_recommendation_count: int


def load_gold_dataset(path) -> list[GoldExample]:
    out: list[GoldExample] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(GoldExample.from_json(line))
            except (json.JSONDecodeError, DatasetError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}")
    return out


def tolerance_lines(method_loc: int, tolerance: float) -> int:
    """ceil(method LOC * tolerance), exact for percentage-style tolerances."""
    if method_loc < 1:
        raise ValueError("method_loc must be >= 1")
    if not 0.0 <= tolerance <= 1.0:
        raise ValueError("tolerance must be in [0, 1]")
    frac = Fraction(tolerance).limit_denominator(1_000_000)
    return math.ceil(method_loc * frac)


def matches(candidate: Fragment, gold: GoldExample, t: int) -> bool:
    return (
        abs(candidate.start_line - gold.fragment_start_line) <= t
        and abs(candidate.end_line - gold.fragment_end_line) <= t
    )


def _endpoint_distance(candidate: Fragment, gold: GoldExample) -> int:
    return max(
        abs(candidate.start_line - gold.fragment_start_line),
        abs(candidate.end_line - gold.fragment_end_line),
    )


def match_recommendations(
    recommendations: list[Recommendation],
    golds: list[GoldExample],
    t: int,
) -> tuple[int, set[int]]:
    """Greedy one-to-one matching in rank order, nearest gold first.

    Returns (number of matched recommendations, indices of matched golds).
    """
    taken: set[int] = set()
    correct = 0
    for rec in recommendations:
        options = [
            (gi, _endpoint_distance(rec.fragment, g))
            for gi, g in enumerate(golds)
            if gi not in taken and matches(rec.fragment, g, t)
        ]
        if not options:
            continue
        options.sort(key=lambda item: (item[1], item[0]))
        taken.add(options[0][0])
        correct += 1
    return correct, taken


def resolve_gold_fragment(method: MethodModel, gold: GoldExample) -> Fragment | None:
    """Find the statement range whose boundary lines equal the gold span."""
    for path, block in method.blocks():
        n = len(block.statements)
        for start in range(n):
            if block.statements[start].start_line != gold.fragment_start_line:
                continue
            for end in range(start, n):
                if block.statements[end].end_line == gold.fragment_end_line:
                    return make_fragment(method, path, start, end)
    return None


@dataclass
class GoldIssue:
    gold: GoldExample
    problem: str


def validate_gold(
    dataset: list[GoldExample],
    units: dict[str, SourceUnit],
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> list[GoldIssue]:
    """Report gold entries that are not legal candidates of their method."""
    issues: list[GoldIssue] = []
    for gold in dataset:
        unit = units.get(gold.file)
        if unit is None:
            issues.append(GoldIssue(gold, "source file not parsed"))
            continue
        method = unit.find_method(gold.method_name, gold.method_start_line)
        if method is None:
            issues.append(GoldIssue(gold, "method not found"))
            continue
        if not (
            method.start_line <= gold.fragment_start_line
            and gold.fragment_end_line <= method.end_line
        ):
            issues.append(GoldIssue(gold, "fragment lines outside the method span"))
            continue
        fragment = resolve_gold_fragment(method, gold)
        if fragment is None:
            issues.append(GoldIssue(gold, "no statement range matches the fragment lines"))
            continue
        report = check_extractable(method, fragment, min_statements)
        if not report.extractable:
            issues.append(
                GoldIssue(gold, "not extractable: " + ",".join(report.violations))
            )
    return issues


def load_units(dataset: list[GoldExample], src_root) -> dict[str, SourceUnit]:
    units: dict[str, SourceUnit] = {}
    for gold in dataset:
        if gold.file in units:
            continue
        full = os.path.join(src_root, gold.file)
        units[gold.file] = parse_file(full)
    return units


def collect_recommendations(
    model: GradientBoostingBinaryClassifier,
    dataset: list[GoldExample],
    units: dict[str, SourceUnit],
    name_provider,
    k: int = DEFAULT_TOP_K,
    threshold: float = DEFAULT_THRESHOLD,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> dict[tuple[str, str, int], list[Recommendation]]:
    """Top-k recommendations for every method referenced by the dataset."""
    out: dict[tuple[str, str, int], list[Recommendation]] = {}
    for gold in dataset:
        key = (gold.file, gold.method_name, gold.method_start_line)
        if key in out:
            continue
        unit = units[gold.file]
        method = unit.find_method(gold.method_name, gold.method_start_line)
        if method is None:
            raise DatasetError(
                f"{gold.file}: method {gold.method_name!r} at line "
                f"{gold.method_start_line} not found"
            )
        out[key] = recommend(
            method, model, name_provider, k=k, threshold=threshold,
            min_statements=min_statements,
        )
    return out


def score_recommendations(
    per_method: dict[tuple[str, str, int], list[Recommendation]],
    dataset: list[GoldExample],
    units: dict[str, SourceUnit],
    tolerance: float,
) -> EvalMetrics:
    golds_by_method: dict[tuple[str, str, int], list[GoldExample]] = {}
    for gold in dataset:
        key = (gold.file, gold.method_name, gold.method_start_line)
        golds_by_method.setdefault(key, []).append(gold)

    recommended = 0
    correct = 0
    matched = 0
    for key, recs in per_method.items():
        golds = golds_by_method.get(key, [])
        unit = units[key[0]]
        method = unit.find_method(key[1], key[2])
        t = tolerance_lines(method.loc, tolerance)
        c, taken = match_recommendations(recs, golds, t)
        recommended += len(recs)
        correct += c
        matched += len(taken)

    gold_count = len(dataset)
    precision = correct / recommended if recommended else 0.0
    recall = matched / gold_count if gold_count else 0.0
    if precision + recall == 0.0:
        f_measure = 0.0
    else:
        f_measure = 2.0 * precision * recall / (precision + recall)
    return EvalMetrics(
        precision=precision,
        recall=recall,
        f_measure=f_measure,
        tolerance=tolerance,
        recommended_count=recommended,
        gold_count=gold_count,
        matched_gold_count=matched,
        correct_recommendation_count=correct,
    )


def evaluate(
    model: GradientBoostingBinaryClassifier,
    dataset: list[GoldExample],
    src_root,
    k: int = DEFAULT_TOP_K,
    threshold: float = DEFAULT_THRESHOLD,
    tolerance: float = 0.0,
    name_provider=None,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> EvalMetrics:
    units = load_units(dataset, src_root)
    per_method = collect_recommendations(
        model, dataset, units, name_provider, k=k, threshold=threshold,
        min_statements=min_statements,
    )
    return score_recommendations(per_method, dataset, units, tolerance)


def importance_report(
    model: GradientBoostingBinaryClassifier, top: int | None = 10
) -> list[tuple[str, float]]:
    ranked = sorted(gini_importance(model).items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked if top is None else ranked[:top]


def confidence_comparison(examples: list[LabeledExample]) -> dict[str, dict[str, float]]:
    """Max/min/mean/median of the confidence feature per label."""
    groups: dict[str, list[float]] = {"positive": [], "negative": []}
    for ex in examples:
        groups["positive" if ex.label == 1 else "negative"].append(
            ex.vector[CONFIDENCE_NAME]
        )
    if not groups["positive"] or not groups["negative"]:
        raise ValueError("both labels are required")
    out: dict[str, dict[str, float]] = {}
    for label, values in groups.items():
        ordered = sorted(values)
        n = len(ordered)
        median = (
            ordered[n // 2] if n % 2 else (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0
        )
        out[label] = {
            "maximum": max(ordered),
            "minimum": min(ordered),
            "mean": sum(ordered) / n,
            "median": median,
        }
    return out
