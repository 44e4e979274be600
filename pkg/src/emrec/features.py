"""The 49 features of a (method, fragment) pair.

28 structural features: counts and line metrics over the fragment and over
the remaining code, plus the fragment/method LOC ratio. 20 functional
features: per element kind, the highest (and second highest)
fragment-to-method usage ratio and the share of fragment lines dedicated
to that element. The 49th feature is the confidence of the top predicted
name for the fragment wrapped as a method.
"""

from __future__ import annotations

from dataclasses import dataclass

from .candidates import Fragment, remaining_statements
from .javamodel import MethodModel, Statement

STRUCTURAL_NAMES = (
    "LOC_EXTRACTED_METHOD",
    "CON_LOC",
    "NUM_LOCAL",
    "CON_LOCAL",
    "NUM_LITERAL",
    "CON_LITERAL",
    "NUM_INVOCATION",
    "CON_INVOCATION",
    "NUM_IF",
    "CON_IF",
    "NUM_CONDITIONAL",
    "CON_CONDITIONAL",
    "NUM_SWITCH",
    "CON_SWITCH",
    "NUM_VAR_AC",
    "CON_VAR_ACC",
    "NUM_TYPE_AC",
    "CON_TYPE_ACC",
    "NUM_FIELD_AC",
    "CON_FIELD_ACC",
    "NUM_ASSIGN",
    "CON_ASSIGN",
    "NUM_TYPED_ELE",
    "CON_TYPED_ELE",
    "NUM_PACKAGE",
    "CON_PACKAGE",
    "CON_ASSERT",
    "RATIO_LOC",
)

FUNCTIONAL_NAMES = (
    "RATIO_VARIABLE_ACCESS",
    "RATIO_VARIABLE_ACCESS2",
    "VARAC_COHESION",
    "VARAC_COHESION2",
    "RATIO_FIELD_ACCESS",
    "RATIO_FIELD_ACCESS2",
    "FIELD_COHESION",
    "FIELD_COHESION2",
    "RATIO_INVOCATION",
    "INVOCATION_COHESION",
    "RATIO_TYPE_ACCESS",
    "RATIO_TYPE_ACCESS2",
    "TYPEAC_COHESION",
    "TYPEAC_COHESION2",
    "RATIO_TYPED_ELE",
    "TYPEDELE_COHESION",
    "RATIO_PACKAGE",
    "RATIO_PACKAGE2",
    "PACKAGE_COHESION",
    "PACKAGE_COHESION2",
)

CONFIDENCE_NAME = "CODE2SEQ_CONFIDENCE"

FEATURE_NAMES: tuple[str, ...] = STRUCTURAL_NAMES + FUNCTIONAL_NAMES + (CONFIDENCE_NAME,)

FEATURE_SET_VERSION = 1


@dataclass(frozen=True)
class FeatureVector:
    """The 49 named feature values of one candidate, in fixed order."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES):
            raise ValueError(
                f"expected {len(FEATURE_NAMES)} values, got {len(self.values)}"
            )

    def __getitem__(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))

    def as_csv_row(self) -> str:
        return ",".join(repr(v) for v in self.values)

    @staticmethod
    def csv_header() -> str:
        return ",".join(FEATURE_NAMES)


def _aggregate(statements: list[Statement]) -> dict[str, float]:
    locals_defined = 0
    literals = invocations = conditionals = assignments = 0
    n_if = n_switch = 0
    lines: set[int] = set()
    distinct: dict[str, set[str]] = {
        "local_variable": set(),
        "type": set(),
        "field": set(),
        "typed_element": set(),
        "package": set(),
    }
    for s in statements:
        locals_defined += len(s.declared_locals)
        literals += s.literals
        invocations += s.invocations
        conditionals += s.conditionals
        assignments += s.assignments
        if s.kind == "if":
            n_if += 1
        elif s.kind == "switch":
            n_switch += 1
        lines.update(s.own_lines)
        for ref in s.refs:
            if ref.kind in distinct:
                distinct[ref.kind].add(ref.id)
    return {
        "loc": float(len(lines)),
        "local": float(locals_defined),
        "literal": float(literals),
        "invocation": float(invocations),
        "if": float(n_if),
        "conditional": float(conditionals),
        "switch": float(n_switch),
        "var_ac": float(len(distinct["local_variable"])),
        "type_ac": float(len(distinct["type"])),
        "field_ac": float(len(distinct["field"])),
        "assign": float(assignments),
        "typed_ele": float(len(distinct["typed_element"])),
        "package": float(len(distinct["package"])),
    }


def structural_features(method: MethodModel, fragment: Fragment) -> dict[str, float]:
    frag_stmts = list(fragment.statements())
    rem_stmts = remaining_statements(method, fragment)
    f = _aggregate(frag_stmts)
    r = _aggregate(rem_stmts)
    asserts_in_fragment = sum(1 for s in frag_stmts if s.kind == "assert")
    return {
        "LOC_EXTRACTED_METHOD": f["loc"],
        "CON_LOC": r["loc"],
        "NUM_LOCAL": f["local"],
        "CON_LOCAL": r["local"],
        "NUM_LITERAL": f["literal"],
        "CON_LITERAL": r["literal"],
        "NUM_INVOCATION": f["invocation"],
        "CON_INVOCATION": r["invocation"],
        "NUM_IF": f["if"],
        "CON_IF": r["if"],
        "NUM_CONDITIONAL": f["conditional"],
        "CON_CONDITIONAL": r["conditional"],
        "NUM_SWITCH": f["switch"],
        "CON_SWITCH": r["switch"],
        "NUM_VAR_AC": f["var_ac"],
        "CON_VAR_ACC": r["var_ac"],
        "NUM_TYPE_AC": f["type_ac"],
        "CON_TYPE_ACC": r["type_ac"],
        "NUM_FIELD_AC": f["field_ac"],
        "CON_FIELD_ACC": r["field_ac"],
        "NUM_ASSIGN": f["assign"],
        "CON_ASSIGN": r["assign"],
        "NUM_TYPED_ELE": f["typed_ele"],
        "CON_TYPED_ELE": r["typed_ele"],
        "NUM_PACKAGE": f["package"],
        "CON_PACKAGE": r["package"],
        "CON_ASSERT": float(asserts_in_fragment),
        "RATIO_LOC": f["loc"] / method.loc if method.loc else 0.0,
    }


_KIND_FEATURES = {
    # element kind -> (ratio1, ratio2, cohesion1, cohesion2); None = no 2nd
    "local_variable": (
        "RATIO_VARIABLE_ACCESS",
        "RATIO_VARIABLE_ACCESS2",
        "VARAC_COHESION",
        "VARAC_COHESION2",
    ),
    "field": (
        "RATIO_FIELD_ACCESS",
        "RATIO_FIELD_ACCESS2",
        "FIELD_COHESION",
        "FIELD_COHESION2",
    ),
    "method": ("RATIO_INVOCATION", None, "INVOCATION_COHESION", None),
    "type": (
        "RATIO_TYPE_ACCESS",
        "RATIO_TYPE_ACCESS2",
        "TYPEAC_COHESION",
        "TYPEAC_COHESION2",
    ),
    "typed_element": ("RATIO_TYPED_ELE", None, "TYPEDELE_COHESION", None),
    "package": (
        "RATIO_PACKAGE",
        "RATIO_PACKAGE2",
        "PACKAGE_COHESION",
        "PACKAGE_COHESION2",
    ),
}


def functional_features(method: MethodModel, fragment: Fragment) -> dict[str, float]:
    frag_ids = {id(s) for s in fragment.statements()}
    method_counts: dict[str, dict[str, int]] = {k: {} for k in _KIND_FEATURES}
    frag_counts: dict[str, dict[str, int]] = {k: {} for k in _KIND_FEATURES}
    frag_lines: dict[str, dict[str, set[int]]] = {k: {} for k in _KIND_FEATURES}

    for stmt in method.statements():
        in_frag = id(stmt) in frag_ids
        for ref in stmt.refs:
            if ref.kind not in _KIND_FEATURES:
                continue
            counts = method_counts[ref.kind]
            counts[ref.id] = counts.get(ref.id, 0) + 1
            if in_frag:
                fc = frag_counts[ref.kind]
                fc[ref.id] = fc.get(ref.id, 0) + 1
                frag_lines[ref.kind].setdefault(ref.id, set()).add(ref.line)

    frag_loc = fragment.loc
    out: dict[str, float] = {}
    for kind, (r1, r2, c1, c2) in _KIND_FEATURES.items():
        elements = method_counts[kind]
        ranked = sorted(
            elements.items(),
            key=lambda item: (
                -(frag_counts[kind].get(item[0], 0) / item[1]),
                -item[1],
                item[0],
            ),
        )

        def ratio_at(rank: int) -> float:
            if rank >= len(ranked):
                return 0.0
            eid, total = ranked[rank]
            return frag_counts[kind].get(eid, 0) / total

        def cohesion_at(rank: int) -> float:
            if rank >= len(ranked) or frag_loc == 0:
                return 0.0
            eid, _total = ranked[rank]
            return len(frag_lines[kind].get(eid, ())) / frag_loc

        out[r1] = ratio_at(0)
        out[c1] = cohesion_at(0)
        if r2 is not None:
            out[r2] = ratio_at(1)
            out[c2] = cohesion_at(1)
    return out


def assemble_vector(
    structural: dict[str, float],
    functional: dict[str, float],
    confidence: float,
) -> FeatureVector:
    """Build the 49-value vector in fixed name order."""
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence {confidence} outside [0, 1]")
    merged = dict(structural)
    for name, value in functional.items():
        if name in merged:
            raise ValueError(f"duplicate feature name {name!r}")
        merged[name] = value
    merged[CONFIDENCE_NAME] = float(confidence)
    missing = [n for n in FEATURE_NAMES if n not in merged]
    if missing:
        raise ValueError(f"missing features: {missing}")
    extra = [n for n in merged if n not in FEATURE_NAMES]
    if extra:
        raise ValueError(f"unknown features: {extra}")
    return FeatureVector(tuple(float(merged[n]) for n in FEATURE_NAMES))


def feature_vector(
    method: MethodModel, fragment: Fragment, confidence: float
) -> FeatureVector:
    return assemble_vector(
        structural_features(method, fragment),
        functional_features(method, fragment),
        confidence,
    )
