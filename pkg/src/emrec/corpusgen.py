"""Synthetic Java corpus with known-good extraction targets.

Every method is a run of 3-5 structurally identical sections built from
one shared statement template (declare, derive, accumulate, then calls).
Exactly one section, the gold extraction target, draws its identifiers
from a per-concept vocabulary that also spells the method name; the other
sections draw from one filler vocabulary shared by every method. Cohesion
metrics therefore look the same for every section, while a name model can
tell concept-pure fragments from filler by vocabulary alone.

A small share of methods consists of a single guarded block whose interior
is the only legal candidate; those methods yield no negative example.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .candidates import make_fragment
from .evaluation import GoldExample
from .javamodel import parse_source

CONCEPTS: tuple[tuple[str, str, tuple[str, ...]], ...] = (
    ("compute", "total", ("total", "price", "tax", "discount", "ledger", "rebate")),
    ("parse", "header", ("header", "token", "marker", "prefix", "segment", "cursor")),
    ("load", "config", ("config", "option", "setting", "profile", "registry", "preset")),
    ("render", "chart", ("chart", "axis", "pixel", "canvas", "legend", "sprite")),
    ("validate", "user", ("user", "account", "password", "role", "credential", "session")),
    ("merge", "records", ("record", "entry", "batch", "partition", "bucket", "shard")),
    ("scan", "buffer", ("buffer", "window", "packet", "stream", "payload", "frame")),
    ("update", "index", ("index", "node", "pointer", "slot", "branch", "leaf")),
    ("encode", "cipher", ("cipher", "digest", "salt", "nonce", "padding", "mask")),
    ("filter", "events", ("event", "queue", "listener", "signal", "topic", "handler")),
    ("sync", "clock", ("clock", "tick", "drift", "epoch", "timer", "interval")),
    ("build", "report", ("report", "summary", "column", "footer", "caption", "margin")),
)

FILLER_WORDS: tuple[str, ...] = (
    "scratch", "temp", "probe", "loop", "aux", "spare", "guard", "trace",
    "check", "state", "debug", "mark", "pad", "stub", "hook", "blank",
    "idle", "misc",
)

PARAMS = ("seedValue", "stepSize")


def _camel(*words: str) -> str:
    return words[0] + "".join(w.capitalize() for w in words[1:])


def _section(rng: np.random.Generator, words: tuple[str, ...]) -> tuple[list[str], str]:
    """3-5 statements over a 6-word vocabulary; returns (lines, result var)."""
    a = _camel(words[0], words[1])
    b = _camel(words[2], words[3])
    call1 = _camel(words[4], words[1])
    call2 = _camel(words[5], words[3])
    param = PARAMS[int(rng.integers(len(PARAMS)))]
    stmts = [
        f"int {a} = {param} + {int(rng.integers(1, 9))};",
        f"int {b} = {a} * {int(rng.integers(2, 5))};",
        f"{a} = {a} + {b};",
        f"{call1}({a});",
        f"{call2}({a}, {b});",
    ]
    size = int(rng.integers(3, 6))  # 3..5 statements
    return stmts[:size], a


def _filler_words(rng: np.random.Generator, used_vars: set[str]) -> tuple[str, ...]:
    while True:
        picks = rng.choice(len(FILLER_WORDS), size=6, replace=False)
        words = tuple(FILLER_WORDS[i] for i in picks.tolist())
        if _camel(words[0], words[1]) not in used_vars and _camel(words[2], words[3]) not in used_vars:
            used_vars.add(_camel(words[0], words[1]))
            used_vars.add(_camel(words[2], words[3]))
            return words


@dataclass
class _MethodPlan:
    name: str
    lines: list[str]
    gold_path: tuple[int, ...]
    gold_start: int
    gold_end: int
    single_candidate: bool = False


GUARD_LINE = "if (seedValue > stepSize) {"
GUARD_SHARE = 0.22


def _plan_method(rng: np.random.Generator, concept_idx: int, name: str) -> _MethodPlan:
    _verb, _noun, words = CONCEPTS[concept_idx]
    used_vars: set[str] = set()
    gold_stmts, gold_var = _section(rng, words)

    if rng.random() < 0.10:
        # Single-candidate method: one guarded 3-statement concept block.
        gold_stmts = gold_stmts[:3]
        lines = [GUARD_LINE]
        lines.extend("    " + s for s in gold_stmts)
        lines.append("}")
        return _MethodPlan(
            name=name,
            lines=lines,
            gold_path=(0, 0),
            gold_start=0,
            gold_end=2,
            single_candidate=True,
        )

    n_fillers = int(rng.integers(5, 8))  # 5..7 filler sections
    fillers = [_section(rng, _filler_words(rng, used_vars))[0] for _ in range(n_fillers)]
    gold_pos = int(rng.integers(n_fillers + 1))
    sections = fillers[:gold_pos] + [gold_stmts] + fillers[gold_pos:]
    # Any section may sit behind a guard, independent of being the target.
    guarded = [rng.random() < GUARD_SHARE for _ in sections]
    # A third of the methods whose gold block is flat and not last read its
    # result afterwards, giving the fragment one live-out local.
    if gold_pos < n_fillers and not guarded[gold_pos] and rng.random() < 0.33:
        sections[gold_pos + 1] = [f"publishValue({gold_var});"] + sections[gold_pos + 1]

    lines: list[str] = []
    body_index = 0
    gold_path: tuple[int, ...] = ()
    gold_start = gold_end = 0
    for si, sec in enumerate(sections):
        if guarded[si]:
            if si == gold_pos:
                gold_path = (body_index, 0)
                gold_start, gold_end = 0, len(sec) - 1
            lines.append(GUARD_LINE)
            lines.extend("    " + s for s in sec)
            lines.append("}")
            body_index += 1
        else:
            if si == gold_pos:
                gold_path = ()
                gold_start = body_index
                gold_end = body_index + len(sec) - 1
            lines.extend(sec)
            body_index += len(sec)
    return _MethodPlan(
        name=name,
        lines=lines,
        gold_path=gold_path,
        gold_start=gold_start,
        gold_end=gold_end,
    )


@dataclass
class CorpusManifest:
    out_dir: str
    seed: int
    files: list[str]
    gold: list[GoldExample]
    train: list[GoldExample]
    test: list[GoldExample]
    single_candidate_methods: int

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "files": len(self.files),
            "methods": len(self.gold),
            "train_methods": len(self.train),
            "test_methods": len(self.test),
            "single_candidate_methods": self.single_candidate_methods,
        }


def generate_corpus(
    out_dir,
    n_methods: int = 110,
    seed: int = 0,
    train_share: float = 0.6,
    methods_per_file: int = 4,
) -> CorpusManifest:
    """Write the corpus under out_dir and return its manifest.

    Emits one class per .java file, gold.jsonl with every target, and
    gold_train.jsonl / gold_test.jsonl as a per-concept stratified split.
    """
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)

    files: dict[str, list[_MethodPlan]] = {}
    file_idx = 0
    for i in range(n_methods):
        concept_idx = i % len(CONCEPTS)
        verb, noun, _words = CONCEPTS[concept_idx]
        file_name = f"Fixture{file_idx:03d}.java"
        bucket = files.setdefault(file_name, [])
        bucket.append(_plan_method(rng, concept_idx, _camel(verb, noun)))
        if len(bucket) == methods_per_file:
            file_idx += 1

    gold: list[GoldExample] = []
    single_count = 0
    for file_name, bucket in files.items():
        class_name = file_name[: -len(".java")]
        out_lines = ["package fixtures;", "", f"class {class_name} {{"]
        for plan in bucket:
            out_lines.append("")
            out_lines.append(f"    void {plan.name}(int seedValue, int stepSize) {{")
            out_lines.extend("        " + ln for ln in plan.lines)
            out_lines.append("    }")
        out_lines.append("}")
        text = "\n".join(out_lines) + "\n"
        with open(os.path.join(out_dir, file_name), "w", encoding="utf-8") as fh:
            fh.write(text)
        # Locate every gold fragment's lines through the parser rather than
        # by line bookkeeping.
        unit = parse_source(text, file_name)
        by_line = sorted(unit.methods, key=lambda m: m.start_line)
        if len(by_line) != len(bucket):
            raise RuntimeError(f"{file_name}: expected {len(bucket)} methods")
        for method, plan in zip(by_line, bucket):
            fragment = make_fragment(
                method, plan.gold_path, plan.gold_start, plan.gold_end
            )
            gold.append(
                GoldExample(
                    file=file_name,
                    method_name=method.name,
                    method_start_line=method.start_line,
                    fragment_start_line=fragment.start_line,
                    fragment_end_line=fragment.end_line,
                )
            )
            if plan.single_candidate:
                single_count += 1

    # Stratify the split by concept so both halves cover all names.
    by_concept: dict[str, list[int]] = {}
    for gi, g in enumerate(gold):
        by_concept.setdefault(g.method_name, []).append(gi)
    train_idx: set[int] = set()
    for _name, indices in sorted(by_concept.items()):
        perm = rng.permutation(len(indices))
        n_train = max(1, int(round(train_share * len(indices))))
        for j in perm[:n_train].tolist():
            train_idx.add(indices[j])
    train = [g for i, g in enumerate(gold) if i in train_idx]
    test = [g for i, g in enumerate(gold) if i not in train_idx]

    def dump(name: str, items: list[GoldExample]):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            for g in items:
                fh.write(g.to_json() + "\n")

    dump("gold.jsonl", gold)
    dump("gold_train.jsonl", train)
    dump("gold_test.jsonl", test)
    manifest = CorpusManifest(
        out_dir=str(out_dir),
        seed=seed,
        files=sorted(files),
        gold=gold,
        train=train,
        test=test,
        single_candidate_methods=single_count,
    )
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
