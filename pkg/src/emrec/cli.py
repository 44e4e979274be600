"""Command-line interface.

Subcommands: train, recommend, evaluate, importance, confidence-stats,
gen-fixtures. A JSON config file can pre-set any flag; explicit flags win.
Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 model or
protocol error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields

from . import corpusgen
from .candidates import DEFAULT_MIN_STATEMENTS
from .classifier import GradientBoostingBinaryClassifier, Hyperparams
from .evaluation import (
    DatasetError,
    TOLERANCE_STEPS,
    confidence_comparison,
    collect_recommendations,
    importance_report,
    load_gold_dataset,
    load_units,
    score_recommendations,
    validate_gold,
)
from .javamodel import JavaParseError, parse_file
from .naming import FallbackProvider, NameModel, NamingError, make_provider
from .pipeline import build_examples, train_pipeline
from .recommender import DEFAULT_THRESHOLD, DEFAULT_TOP_K, recommend

USAGE_EXIT = 1
DATA_EXIT = 2
MODEL_EXIT = 3


class ModelError(Exception):
    """A model file is missing or malformed."""


@dataclass
class Config:
    src_root: str = "."
    dataset: str | None = None
    model: str = "model.json"
    name_model: str = "name_model.json"
    top: int = DEFAULT_TOP_K
    threshold: float = DEFAULT_THRESHOLD
    tolerance: float | None = None
    min_statements: int = DEFAULT_MIN_STATEMENTS
    seed: int = 0
    tune_trials: int = 0
    name_provider: str = "builtin"
    fallback: bool = False
    timeout: float = 5.0

    @classmethod
    def resolve(cls, args: argparse.Namespace) -> "Config":
        config = cls()
        if getattr(args, "config", None):
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
            known = {f.name for f in fields(cls)}
            unknown = set(data) - known
            if unknown:
                raise DatasetError(f"unknown config keys: {sorted(unknown)}")
            for key, value in data.items():
                setattr(config, key, value)
        for f in fields(cls):
            value = getattr(args, f.name, None)
            if value is not None:
                setattr(config, f.name, value)
        return config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file with flag defaults")
    parser.add_argument("--src-root", dest="src_root", help="root of the Java sources")
    parser.add_argument("--dataset", help="gold dataset (JSON Lines)")
    parser.add_argument("--model", help="classifier model file")
    parser.add_argument("--name-model", dest="name_model", help="name model file")
    parser.add_argument("--top", type=int, help="recommendations per method")
    parser.add_argument("--threshold", type=float, help="probability threshold")
    parser.add_argument("--tolerance", type=float, help="single tolerance to report")
    parser.add_argument(
        "--min-statements", dest="min_statements", type=int,
        help="minimum statements per candidate",
    )
    parser.add_argument("--seed", type=int, help="master random seed")
    parser.add_argument("--tune-trials", dest="tune_trials", type=int,
                        help="random-search trials (0 = defaults)")
    parser.add_argument(
        "--name-provider", dest="name_provider",
        help="builtin | fixed:<conf> | remote:<url>",
    )
    parser.add_argument(
        "--fallback", action="store_const", const=True, default=None,
        help="fall back to the builtin name model when the remote fails",
    )
    parser.add_argument("--json", action="store_true", help="emit JSON output")


def build_parser() -> _Parser:
    parser = _Parser(prog="emrec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train classifier and name model")
    _add_common(p_train)
    p_train.add_argument("--report", help="training report path")

    p_rec = sub.add_parser("recommend", help="rank extraction candidates of a method")
    p_rec.add_argument("file", help="Java file (relative to --src-root)")
    p_rec.add_argument("method", help="method name")
    p_rec.add_argument("--method-line", dest="method_line", type=int,
                       help="method start line (for overloads)")
    _add_common(p_rec)

    p_eval = sub.add_parser("evaluate", help="score recommendations against gold data")
    _add_common(p_eval)

    p_imp = sub.add_parser("importance", help="feature importance table")
    p_imp.add_argument("--all", action="store_true", help="print every feature")
    _add_common(p_imp)

    p_conf = sub.add_parser(
        "confidence-stats", help="confidence statistics per example label"
    )
    _add_common(p_conf)

    p_gen = sub.add_parser("gen-fixtures", help="generate the synthetic corpus")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--methods", type=int, default=110)
    p_gen.add_argument("--seed", type=int, default=0)
    return parser


def _load_classifier(path) -> GradientBoostingBinaryClassifier:
    if not os.path.exists(path):
        raise ModelError(f"model file not found: {path}")
    try:
        return GradientBoostingBinaryClassifier.load(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot load model {path}: {exc}")


def _load_name_model(path) -> NameModel:
    if not os.path.exists(path):
        raise ModelError(f"name model file not found: {path}")
    try:
        return NameModel.load(path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot load name model {path}: {exc}")


def _provider(config: Config):
    name_model = None
    if config.name_provider == "builtin" or config.fallback:
        name_model = _load_name_model(config.name_model)
    try:
        return make_provider(
            config.name_provider, name_model,
            timeout=config.timeout, fallback=config.fallback,
        )
    except ValueError as exc:
        raise ModelError(str(exc))


def cmd_train(args) -> int:
    config = Config.resolve(args)
    if not config.dataset:
        raise DatasetError("train requires --dataset")
    dataset = load_gold_dataset(config.dataset)
    if not dataset:
        raise DatasetError(f"gold dataset {config.dataset} is empty")

    def factory(name_model):
        return make_provider(
            config.name_provider, name_model,
            timeout=config.timeout, fallback=config.fallback,
        )

    result = train_pipeline(
        dataset,
        config.src_root,
        factory,
        seed=config.seed,
        min_statements=config.min_statements,
        hyperparams=Hyperparams(),
        tune_trials=config.tune_trials,
    )
    result.model.save(config.model)
    result.name_model.save(config.name_model)
    report = result.report()
    report_path = getattr(args, "report", None) or config.model + ".report.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"trained on {report['positives']} positives, {report['negatives']} negatives")
        print(f"cv F-measure: {report['cv_f_measure']:.4f}")
        print(f"model written to {config.model}")
        print(f"name model written to {config.name_model}")
    return 0


def cmd_recommend(args) -> int:
    config = Config.resolve(args)
    model = _load_classifier(config.model)
    provider = _provider(config)
    path = os.path.join(config.src_root, args.file)
    unit = parse_file(path)
    method = unit.find_method(args.method, args.method_line)
    if method is None:
        raise DatasetError(f"method {args.method!r} not found in {args.file}")
    recs = recommend(
        method, model, provider,
        k=config.top, threshold=config.threshold,
        min_statements=config.min_statements,
    )
    fallback_used = isinstance(provider, FallbackProvider) and provider.fallback_count > 0
    payload = {
        "file": args.file,
        "method": method.name,
        "method_start_line": method.start_line,
        "count": len(recs),
        "fallback_used": fallback_used,
        "recommendations": [
            {
                "rank": r.rank,
                "start_line": r.fragment.start_line,
                "end_line": r.fragment.end_line,
                "probability": r.probability,
                "name_subtokens": list(r.predicted_name.subtokens) if r.predicted_name else [],
                "name": r.predicted_name.display if r.predicted_name else "",
                "confidence": r.confidence,
            }
            for r in recs
        ],
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
        return 0
    if not recs:
        print(f"no candidates above threshold for {method.name}")
        return 0
    print(f"{args.file} {method.name} (line {method.start_line})")
    print(f"{'rank':>4}  {'lines':>11}  {'probability':>11}  {'confidence':>10}  name")
    for r in recs:
        lines = f"{r.fragment.start_line}-{r.fragment.end_line}"
        name = r.predicted_name.display if r.predicted_name else "-"
        print(
            f"{r.rank:>4}  {lines:>11}  {r.probability:>11.4f}  {r.confidence:>10.4f}  {name}"
        )
    if fallback_used:
        print("note: remote name service unavailable, used builtin fallback")
    return 0


def cmd_evaluate(args) -> int:
    config = Config.resolve(args)
    if not config.dataset:
        raise DatasetError("evaluate requires --dataset")
    model = _load_classifier(config.model)
    provider = _provider(config)
    dataset = load_gold_dataset(config.dataset)
    units = load_units(dataset, config.src_root)
    issues = validate_gold(dataset, units, config.min_statements)
    for issue in issues:
        print(
            f"warning: {issue.gold.file}:{issue.gold.fragment_start_line}: {issue.problem}",
            file=sys.stderr,
        )
    per_method = collect_recommendations(
        model, dataset, units, provider,
        k=config.top, threshold=config.threshold,
        min_statements=config.min_statements,
    )
    tolerances = (
        (config.tolerance,) if config.tolerance is not None else TOLERANCE_STEPS
    )
    metrics = [
        score_recommendations(per_method, dataset, units, t) for t in tolerances
    ]
    if args.json:
        print(
            json.dumps(
                [
                    {
                        "tolerance": m.tolerance,
                        "precision": m.precision,
                        "recall": m.recall,
                        "f_measure": m.f_measure,
                        "recommended": m.recommended_count,
                        "gold": m.gold_count,
                        "matched_gold": m.matched_gold_count,
                        "correct": m.correct_recommendation_count,
                    }
                    for m in metrics
                ],
                sort_keys=True,
            )
        )
        return 0

    def label(t: float) -> str:
        return "None" if t == 0 else f"{t:.0%}"

    header = f"{'Metrics':<12}" + "".join(f"{label(m.tolerance):>10}" for m in metrics)
    print(header)
    for title, attr in (
        ("Precision", "precision"),
        ("Recall", "recall"),
        ("F-measure", "f_measure"),
    ):
        row = f"{title:<12}" + "".join(f"{getattr(m, attr):>10.5f}" for m in metrics)
        print(row)
    print(f"recommendations: {metrics[0].recommended_count}, gold targets: {metrics[0].gold_count}")
    return 0


def cmd_importance(args) -> int:
    config = Config.resolve(args)
    model = _load_classifier(config.model)
    rows = importance_report(model, top=None if args.all else 10)
    if args.json:
        print(json.dumps([{"feature": f, "importance": v} for f, v in rows]))
        return 0
    print(f"{'rank':>4}  {'importance':>10}  feature")
    for i, (feature, value) in enumerate(rows, start=1):
        print(f"{i:>4}  {value:>10.5f}  {feature}")
    return 0


def cmd_confidence_stats(args) -> int:
    config = Config.resolve(args)
    if not config.dataset:
        raise DatasetError("confidence-stats requires --dataset")
    provider = _provider(config)
    dataset = load_gold_dataset(config.dataset)
    units = load_units(dataset, config.src_root)
    example_set = build_examples(
        dataset, units, provider, seed=config.seed,
        min_statements=config.min_statements,
    )
    stats = confidence_comparison(example_set.examples)
    if args.json:
        print(json.dumps(stats, sort_keys=True))
        return 0
    print(f"{'Label':<10}{'Maximum':>12}{'Minimum':>12}{'Mean':>12}{'Median':>12}")
    for label in ("positive", "negative"):
        row = stats[label]
        print(
            f"{label.capitalize():<10}"
            f"{row['maximum']:>12.5g}{row['minimum']:>12.5g}"
            f"{row['mean']:>12.5g}{row['median']:>12.5g}"
        )
    return 0


def cmd_gen_fixtures(args) -> int:
    manifest = corpusgen.generate_corpus(args.out, n_methods=args.methods, seed=args.seed)
    print(json.dumps(manifest.summary(), sort_keys=True))
    return 0


_COMMANDS = {
    "train": cmd_train,
    "recommend": cmd_recommend,
    "evaluate": cmd_evaluate,
    "importance": cmd_importance,
    "confidence-stats": cmd_confidence_stats,
    "gen-fixtures": cmd_gen_fixtures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (JavaParseError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (ModelError, NamingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return MODEL_EXIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
