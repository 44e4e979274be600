"""Method-name prediction for candidate fragments.

A fragment is wrapped into a compilable synthetic method (parameters and
return derived from data flow) and handed to a name provider:

* the built-in model: a count-based mixture of body-token evidence and a
  smoothed subtoken prior, decoded greedily without repetition;
* a remote HTTP service speaking the wire protocol below;
* a fixed-confidence provider for calibration and tests.

Wire protocol: ``POST /v1/predict`` with ``{"method_source": str, "k": int}``
returns ``{"predictions": [{"name": [subtoken, ...], "confidence": float}]}``
(descending confidence, each in (0, 1]); 422 means the service could not
parse the source, any other non-200 status is an error.
"""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass

from .candidates import Fragment, check_extractable, live_out_locals
from .javamodel import KEYWORDS, MethodModel, tokenize

END_TOKEN = "</s>"
UNKNOWN_SUBTOKEN = "unknown"

DEFAULT_LAMBDA = 0.8
DEFAULT_MAX_LEN = 5


class NamingError(Exception):
    """Base class for name-provider failures."""


class UnparseableSourceError(NamingError):
    """The provider could not parse the wrapped fragment."""


class ProtocolError(NamingError):
    """The remote service violated the wire protocol."""


class RemoteUnavailableError(NamingError):
    """The remote service could not be reached."""


@dataclass(frozen=True)
class NamePrediction:
    subtokens: tuple[str, ...]
    confidence: float

    def __post_init__(self):
        if not self.subtokens:
            raise ValueError("prediction has no subtokens")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside (0, 1]")

    @property
    def display(self) -> str:
        return camel_join(self.subtokens)


@dataclass(frozen=True)
class SyntheticMethod:
    source: str
    parameters: tuple[tuple[str, str], ...]
    return_variable: str | None
    fragment: Fragment


_SUBTOKEN_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z0-9]*|[a-z0-9]+")


def split_subtokens(identifier: str) -> list[str]:
    """Split camelCase / snake_case identifiers into lowercase subtokens."""
    parts: list[str] = []
    for chunk in identifier.split("_"):
        parts.extend(m.group(0).lower() for m in _SUBTOKEN_RE.finditer(chunk))
    return parts


def camel_join(subtokens) -> str:
    toks = [t for t in subtokens if t != END_TOKEN]
    if not toks:
        return ""
    return toks[0] + "".join(t.capitalize() for t in toks[1:])


def body_token_bag(source: str) -> list[str]:
    """Identifier subtokens of a method body, keywords and literals excluded.

    The body is everything between the first '{' and the last '}'.
    """
    open_idx = source.find("{")
    close_idx = source.rfind("}")
    if open_idx < 0 or close_idx <= open_idx:
        body = source
    else:
        body = source[open_idx + 1 : close_idx]
    bag: list[str] = []
    for tok in tokenize(body):
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            bag.extend(split_subtokens(tok.text))
    return bag


# --------------------------------------------------------------------------
# Fragment wrapping


def wrap_fragment(method: MethodModel, fragment: Fragment) -> SyntheticMethod:
    """Render a fragment as a standalone method named ``__candidate__``.

    Parameters are the locals read in the fragment but declared outside it,
    in declaration order; a unique live-out local becomes the return value.
    Locals written inside but declared outside (and not passed as
    parameters) are re-declared in a prologue.
    """
    report = check_extractable(method, fragment, min_statements=1)
    hard = set(report.violations) - {"below_min_size"}
    if hard:
        raise ValueError(f"fragment is not extractable: {sorted(hard)}")

    local_types: dict[str, str] = {}
    local_order: dict[str, int] = {}
    for i, (pname, ptype) in enumerate(method.parameters):
        eid = f"local:{pname}@{method.start_line}"
        local_types[eid] = ptype
        local_order[eid] = i
    order = len(method.parameters)
    for stmt in method.statements():
        for name, type_name, line in stmt.declared_locals:
            eid = f"local:{name}@{line}"
            if eid not in local_types:
                local_types[eid] = type_name
                local_order[eid] = order
                order += 1

    declared_inside: set[str] = set()
    reads: set[str] = set()
    writes: set[str] = set()
    for stmt in fragment.statements():
        for name, _type, line in stmt.declared_locals:
            declared_inside.add(f"local:{name}@{line}")
        for ref in stmt.refs:
            if ref.kind != "local_variable":
                continue
            if ref.access == "read":
                reads.add(ref.id)
            elif ref.access == "write":
                writes.add(ref.id)

    def bare(eid: str) -> str:
        return eid.split(":", 1)[1].split("@", 1)[0]

    params = sorted(
        (eid for eid in reads if eid not in declared_inside),
        key=lambda eid: local_order.get(eid, 1 << 30),
    )
    prologue = sorted(
        (
            eid
            for eid in writes
            if eid not in declared_inside and eid not in params
        ),
        key=lambda eid: local_order.get(eid, 1 << 30),
    )
    live = live_out_locals(method, fragment)
    ret_id = live[0] if live else None
    ret_type = local_types[ret_id] if ret_id else "void"

    body_lines = [
        "    " + stmt.source_text(method.source_lines)
        for stmt in fragment.top_statements()
    ]
    param_text = ", ".join(f"{local_types[eid]} {bare(eid)}" for eid in params)
    out = [f"{ret_type} __candidate__({param_text}) {{"]
    for eid in prologue:
        out.append(f"    {local_types[eid]} {bare(eid)};")
    out.extend(body_lines)
    if ret_id is not None:
        out.append(f"    return {bare(ret_id)};")
    out.append("}")
    return SyntheticMethod(
        source="\n".join(out),
        parameters=tuple((bare(eid), local_types[eid]) for eid in params),
        return_variable=bare(ret_id) if ret_id else None,
        fragment=fragment,
    )


# --------------------------------------------------------------------------
# Built-in statistical name model


@dataclass
class NameModel:
    """Co-occurrence counts between body subtokens and name subtokens."""

    cooccurrence: dict[str, dict[str, int]]
    subtoken_prior: dict[str, int]
    vocab: tuple[str, ...]  # sorted, includes END_TOKEN
    lam: float = DEFAULT_LAMBDA
    max_len: int = DEFAULT_MAX_LEN

    def to_dict(self) -> dict:
        return {
            "format": "emrec-name-model",
            "version": 1,
            "lambda": self.lam,
            "max_len": self.max_len,
            "end_token": END_TOKEN,
            "vocab": list(self.vocab),
            "subtoken_prior": dict(sorted(self.subtoken_prior.items())),
            "cooccurrence": {
                t: dict(sorted(row.items()))
                for t, row in sorted(self.cooccurrence.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NameModel":
        if data.get("format") != "emrec-name-model":
            raise ValueError("not a name-model document")
        if data.get("version") != 1:
            raise ValueError(f"unsupported name-model version {data.get('version')}")
        return cls(
            cooccurrence={t: dict(row) for t, row in data["cooccurrence"].items()},
            subtoken_prior=dict(data["subtoken_prior"]),
            vocab=tuple(data["vocab"]),
            lam=float(data["lambda"]),
            max_len=int(data["max_len"]),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NameModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train_name_model(
    corpus: list[tuple[list[str], list[str]]],
    lam: float = DEFAULT_LAMBDA,
    max_len: int = DEFAULT_MAX_LEN,
) -> NameModel:
    """Count per-method co-occurrence of body tokens and name subtokens.

    ``corpus`` holds (body token bag, name subtoken sequence) pairs; the
    end marker is appended to every name.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    cooc: dict[str, dict[str, int]] = {}
    prior: dict[str, int] = {}
    vocab: set[str] = {END_TOKEN}
    for bag, name in corpus:
        subtokens = set(name) | {END_TOKEN}
        vocab |= subtokens
        for s in subtokens:
            prior[s] = prior.get(s, 0) + 1
        for t in set(bag):
            row = cooc.setdefault(t, {})
            for s in subtokens:
                row[s] = row.get(s, 0) + 1
    return NameModel(
        cooccurrence=cooc,
        subtoken_prior=prior,
        vocab=tuple(sorted(vocab)),
        lam=lam,
        max_len=max_len,
    )


def _step_scores(model: NameModel, bag: list[str]) -> dict[str, float]:
    """P(s | bag) for every vocab subtoken: evidence mixed with prior."""
    evidence_num: dict[str, float] = {}
    evidence_den = 0.0
    for t in bag:
        row = model.cooccurrence.get(t)
        if not row:
            continue
        for s, c in row.items():
            evidence_num[s] = evidence_num.get(s, 0.0) + c
            evidence_den += c
    prior_den = sum(model.subtoken_prior.values()) + len(model.vocab)
    scores: dict[str, float] = {}
    for s in model.vocab:
        ev = evidence_num.get(s, 0.0) / evidence_den if evidence_den > 0 else 0.0
        pr = (model.subtoken_prior.get(s, 0) + 1) / prior_den
        scores[s] = model.lam * ev + (1.0 - model.lam) * pr
    return scores


def _prior_of_end(model: NameModel) -> float:
    prior_den = sum(model.subtoken_prior.values()) + len(model.vocab)
    return (model.subtoken_prior.get(END_TOKEN, 0) + 1) / prior_den


def _greedy_decode(model: NameModel, scores: dict[str, float], first: str) -> NamePrediction:
    chosen = [first]
    confidence = scores[first]
    while len(chosen) < model.max_len:
        candidates = [s for s in model.vocab if s not in chosen]
        if not candidates:
            break
        # Highest score wins; ties go to the lexicographically smallest.
        best = min(candidates, key=lambda s: (-scores[s], s))
        confidence *= scores[best]
        if best == END_TOKEN:
            break
        chosen.append(best)
    return NamePrediction(subtokens=tuple(chosen), confidence=min(confidence, 1.0))


def predict_name(model: NameModel, m: SyntheticMethod | str, k: int = 1) -> list[NamePrediction]:
    """Top-k name predictions, descending confidence, greedy decoding.

    The i-th prediction starts from the i-th best first subtoken. The end
    marker can never start a name; it terminates one, and its step
    probability is part of the confidence product.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    source = m.source if isinstance(m, SyntheticMethod) else m
    bag = body_token_bag(source)
    if not bag:
        conf = _prior_of_end(model)
        return [NamePrediction(subtokens=(UNKNOWN_SUBTOKEN,), confidence=conf)]
    scores = _step_scores(model, bag)
    starters = sorted(
        (s for s in model.vocab if s != END_TOKEN),
        key=lambda s: (-scores[s], s),
    )[:k]
    if not starters:
        conf = _prior_of_end(model)
        return [NamePrediction(subtokens=(UNKNOWN_SUBTOKEN,), confidence=conf)]
    preds = [_greedy_decode(model, scores, s) for s in starters]
    preds.sort(key=lambda p: -p.confidence)
    return preds


# --------------------------------------------------------------------------
# Providers


class FixedConfidenceProvider:
    """Always answers with the same confidence; used for calibration."""

    def __init__(self, confidence: float):
        if not 0.0 < confidence <= 1.0:
            raise ValueError("fixed confidence must be in (0, 1]")
        self.confidence = confidence

    def predict(self, source: str, k: int = 1) -> list[NamePrediction]:
        return [NamePrediction(subtokens=("candidate",), confidence=self.confidence)]


class BuiltinProvider:
    def __init__(self, model: NameModel):
        self.model = model

    def predict(self, source: str, k: int = 1) -> list[NamePrediction]:
        return predict_name(self.model, source, k)


class RemoteProvider:
    """Client for the name-prediction wire protocol."""

    def __init__(self, endpoint: str, timeout: float = 5.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def predict(self, source: str, k: int = 1) -> list[NamePrediction]:
        return remote_predict(self.endpoint, source, k=k, timeout=self.timeout)


class FallbackProvider:
    """Remote with fall-back to the built-in model on failure."""

    def __init__(self, remote: RemoteProvider, builtin: BuiltinProvider):
        self.remote = remote
        self.builtin = builtin
        self.fallback_count = 0

    def predict(self, source: str, k: int = 1) -> list[NamePrediction]:
        try:
            return self.remote.predict(source, k)
        except NamingError:
            self.fallback_count += 1
            return self.builtin.predict(source, k)


def remote_predict(
    endpoint: str, m: SyntheticMethod | str, k: int = 1, timeout: float = 5.0
) -> list[NamePrediction]:
    source = m.source if isinstance(m, SyntheticMethod) else m
    payload = json.dumps({"method_source": source, "k": k}).encode("utf-8")
    url = endpoint.rstrip("/") + "/v1/predict"
    req = urllib.request.Request(
        url, data=payload, headers={"Content-Type": "application/json"}, method="POST"
    )
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            body = resp.read()
            status = resp.status
    except urllib.error.HTTPError as exc:
        if exc.code == 422:
            raise UnparseableSourceError(f"service rejected source: {exc.read()[:200]!r}")
        raise ProtocolError(f"service returned status {exc.code}")
    except (urllib.error.URLError, TimeoutError, OSError) as exc:
        raise RemoteUnavailableError(f"cannot reach {url}: {exc}")
    if status != 200:
        raise ProtocolError(f"service returned status {status}")
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"response is not JSON: {exc}")
    preds = data.get("predictions")
    if not isinstance(preds, list) or not preds:
        raise ProtocolError("response lacks a non-empty 'predictions' list")
    out: list[NamePrediction] = []
    for item in preds:
        if not isinstance(item, dict) or "name" not in item or "confidence" not in item:
            raise ProtocolError(f"malformed prediction entry: {item!r}")
        name = item["name"]
        conf = item["confidence"]
        if (
            not isinstance(name, list)
            or not name
            or not all(isinstance(s, str) for s in name)
        ):
            raise ProtocolError(f"malformed name: {name!r}")
        if not isinstance(conf, (int, float)) or not 0.0 < conf <= 1.0:
            raise ProtocolError(f"confidence {conf!r} outside (0, 1]")
        out.append(NamePrediction(subtokens=tuple(name), confidence=float(conf)))
    for a, b in zip(out, out[1:]):
        if a.confidence < b.confidence:
            raise ProtocolError("predictions are not sorted by descending confidence")
    return out


def make_provider(spec: str, name_model: NameModel | None = None, timeout: float = 5.0, fallback: bool = False):
    """Build a provider from its CLI spec: ``builtin``, ``fixed:<v>`` or
    ``remote:<url>``."""
    if spec == "builtin":
        if name_model is None:
            raise ValueError("builtin provider requires a trained name model")
        return BuiltinProvider(name_model)
    if spec.startswith("fixed:"):
        return FixedConfidenceProvider(float(spec.split(":", 1)[1]))
    if spec.startswith("remote:"):
        remote = RemoteProvider(spec.split(":", 1)[1], timeout=timeout)
        if fallback:
            if name_model is None:
                raise ValueError("fallback requires a trained name model")
            return FallbackProvider(remote, BuiltinProvider(name_model))
        return remote
    raise ValueError(f"unknown name provider {spec!r}")
