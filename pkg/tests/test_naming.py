import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from emrec.candidates import make_fragment
from emrec.javamodel import parse_source
from emrec.naming import (
    END_TOKEN,
    BuiltinProvider,
    FallbackProvider,
    FixedConfidenceProvider,
    NameModel,
    NamePrediction,
    ProtocolError,
    RemoteProvider,
    RemoteUnavailableError,
    UnparseableSourceError,
    body_token_bag,
    camel_join,
    make_provider,
    predict_name,
    remote_predict,
    split_subtokens,
    train_name_model,
    wrap_fragment,
)

import javafixtures as fx


# -- subtoken utilities -------------------------------------------------------


@pytest.mark.parametrize(
    "ident,expected",
    [
        ("printOwing", ["print", "owing"]),
        ("HTTPServer", ["http", "server"]),
        ("snake_case_name", ["snake", "case", "name"]),
        ("value2", ["value2"]),
        ("parse2Json", ["parse2", "json"]),
        ("x", ["x"]),
    ],
)
def test_split_subtokens(ident, expected):
    assert split_subtokens(ident) == expected


def test_body_token_bag_excludes_keywords_and_literals():
    bag = body_token_bag("void m() { int totalPrice = compute(5); return totalPrice; }")
    assert bag == ["total", "price", "compute", "total", "price"]


# -- fragment wrapping --------------------------------------------------------


def test_wrap_print_fragment_void_no_params():
    unit = parse_source(fx.PRINT_OWING)
    m = unit.methods[0]
    frag = make_fragment(m, (), 1, 2)  # the two print statements
    synthetic = wrap_fragment(m, frag)
    assert synthetic.parameters == ()
    assert synthetic.return_variable is None
    assert synthetic.source.startswith("void __candidate__()")
    assert "println" in synthetic.source


def test_wrap_live_out_returns_declared_type():
    unit = parse_source(fx.CALCULATOR)
    m = unit.methods[0]
    frag = make_fragment(m, (), 0, 2)  # declares sum, read later
    synthetic = wrap_fragment(m, frag)
    assert synthetic.return_variable == "sum"
    assert synthetic.source.startswith("int __candidate__(int base, int rate)")
    assert synthetic.source.rstrip().endswith("}")
    assert "return sum;" in synthetic.source


def test_wrap_reads_outer_local_as_parameter():
    src = """\
class Outer {
    void run(int n) {
        int base = n * 2;
        log(base);
        mark(base);
        done(n);
    }
}
"""
    m = parse_source(src).methods[0]
    frag = make_fragment(m, (), 1, 2)
    synthetic = wrap_fragment(m, frag)
    assert synthetic.parameters == (("base", "int"),)


def test_wrap_redeclares_written_only_outer_local():
    src = """\
class W {
    void run(int n) {
        int x = 0;
        x = n + 1;
        log(n);
        done(x);
    }
}
"""
    m = parse_source(src).methods[0]
    frag = make_fragment(m, (), 1, 2)  # writes x, reads only n
    synthetic = wrap_fragment(m, frag)
    assert synthetic.return_variable == "x"
    assert "int x;" in synthetic.source


def test_wrapped_fragment_reparses_as_one_method():
    unit = parse_source(fx.CALCULATOR)
    m = unit.methods[0]
    frag = make_fragment(m, (), 0, 2)
    synthetic = wrap_fragment(m, frag)
    reparsed = parse_source("class Wrapper {\n" + synthetic.source + "\n}")
    assert len(reparsed.methods) == 1
    assert reparsed.methods[0].name == "__candidate__"


def test_every_candidate_wraps_and_reparses():
    from emrec.candidates import enumerate_candidates

    sources = dict(fx.ORACLE_SOURCES)
    sources["stress"] = fx.STRESS_ALL_KINDS
    sources["else_chain"] = """\
class Branches {
    int pick(int n) {
        int out = 0;
        if (n > 10) {
            out = 3;
        } else if (n > 5) {
            out = 2;
        } else {
            out = 1;
        }
        log(out);
        return out;
    }
}
"""
    wrapped = 0
    for name, src in sources.items():
        unit = parse_source(src, name)
        for m in unit.methods:
            for frag in enumerate_candidates(m, 1):
                synthetic = wrap_fragment(m, frag)
                reparsed = parse_source("class W {\n" + synthetic.source + "\n}")
                assert len(reparsed.methods) == 1, (name, frag)
                assert reparsed.methods[0].name == "__candidate__"
                wrapped += 1
    assert wrapped > 100


def test_wrap_rejects_non_extractable():
    m = parse_source(fx.TWO_LIVE_OUT).methods[0]
    frag = make_fragment(m, (), 0, 1)
    with pytest.raises(ValueError):
        wrap_fragment(m, frag)


# -- the built-in name model --------------------------------------------------


def single_example_model(**kwargs):
    return train_name_model([(["print", "owing"], ["print", "owing"])], **kwargs)


def test_train_counts_single_example():
    model = single_example_model()
    assert model.cooccurrence["print"]["print"] == 1
    assert model.cooccurrence["print"][END_TOKEN] == 1
    assert model.cooccurrence["owing"]["owing"] == 1
    assert model.subtoken_prior == {"print": 1, "owing": 1, END_TOKEN: 1}


def test_train_accumulates_shared_tokens():
    model = train_name_model(
        [(["get", "x"], ["get", "x"]), (["get", "y"], ["get", "y"])]
    )
    assert model.cooccurrence["get"]["get"] == 2


def test_train_rejects_empty_corpus():
    with pytest.raises(ValueError):
        train_name_model([])


def test_predict_hand_computed_confidence():
    # One training example; every score works out to exactly 1/3, so the
    # greedy decoder picks 'owing' (tie broken lexicographically), then the
    # end marker: confidence (1/3) * (1/3) = 1/9.
    model = single_example_model()
    preds = predict_name(model, "void __candidate__() { print owing }", k=1)
    assert preds[0].subtokens == ("owing",)
    assert preds[0].confidence == pytest.approx(1 / 9, abs=1e-12)


def test_predict_k2_orders_by_confidence():
    model = single_example_model()
    preds = predict_name(model, "void __candidate__() { print owing }", k=2)
    assert len(preds) == 2
    assert preds[0].confidence >= preds[1].confidence
    firsts = {p.subtokens[0] for p in preds}
    assert firsts == {"owing", "print"}


def test_lambda_zero_ignores_the_body():
    model = train_name_model(
        [(["alpha"], ["alpha"]), (["beta"], ["beta"])], lam=0.0
    )
    a = predict_name(model, "void m() { alpha }")[0]
    b = predict_name(model, "void m() { beta }")[0]
    assert a.confidence == b.confidence
    assert a.subtokens == b.subtokens


def test_empty_bag_prediction_is_smoothed_end_prior():
    model = single_example_model()
    preds = predict_name(model, "void m() { }")
    assert preds[0].subtokens == ("unknown",)
    # (C(end) + 1) / (sum of priors + vocab size) = 2 / 6
    assert preds[0].confidence == pytest.approx(2 / 6, abs=1e-12)


def test_confidence_in_unit_interval_and_deterministic():
    model = train_name_model(
        [
            (["load", "file", "path"], ["load", "file"]),
            (["save", "file", "data"], ["save", "file"]),
            (["parse", "token"], ["parse", "token"]),
        ]
    )
    source = "void m() { load file parse }"
    first = predict_name(model, source, k=3)
    second = predict_name(model, source, k=3)
    assert first == second
    for p in first:
        assert 0.0 < p.confidence <= 1.0


def test_trained_body_scores_higher_than_disjoint_body():
    model = single_example_model()
    trained = predict_name(model, "void m() { print owing }")[0]
    disjoint = predict_name(model, "void m() { zebra quack }")[0]
    assert trained.confidence >= disjoint.confidence


def test_model_json_round_trip(tmp_path):
    model = single_example_model(lam=0.7, max_len=4)
    path = tmp_path / "nm.json"
    model.save(path)
    loaded = NameModel.load(path)
    assert loaded == model
    loaded.save(tmp_path / "nm2.json")
    assert (tmp_path / "nm.json").read_bytes() == (tmp_path / "nm2.json").read_bytes()


def test_camel_join():
    assert camel_join(("print", "owing")) == "printOwing"
    assert camel_join((END_TOKEN,)) == ""


# -- the wire protocol --------------------------------------------------------


class _StubHandler(BaseHTTPRequestHandler):
    behavior = {"mode": "fixed", "confidence": 0.42}

    def do_POST(self):
        if self.path != "/v1/predict":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            request = json.loads(self.rfile.read(length))
            request["method_source"]
        except (json.JSONDecodeError, KeyError):
            self.send_error(400)
            return
        mode = self.behavior["mode"]
        if mode == "error":
            self.send_error(self.behavior["status"])
            return
        if mode == "unparseable":
            self.send_error(422)
            return
        if mode == "bad_confidence":
            payload = {"predictions": [{"name": ["x"], "confidence": 1.7}]}
        elif mode == "unsorted":
            payload = {
                "predictions": [
                    {"name": ["a"], "confidence": 0.1},
                    {"name": ["b"], "confidence": 0.9},
                ]
            }
        else:
            payload = {
                "predictions": [
                    {"name": ["candidate"], "confidence": self.behavior["confidence"]}
                ]
            }
        body = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _StubHandler
    server.shutdown()


def test_remote_predict_fixed_confidence(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "fixed", "confidence": 0.42}
    preds = remote_predict(endpoint, "void m() { a(); }")
    assert preds == [NamePrediction(subtokens=("candidate",), confidence=0.42)]


def test_remote_predict_rejects_out_of_range_confidence(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "bad_confidence"}
    with pytest.raises(ProtocolError):
        remote_predict(endpoint, "void m() { }")


def test_remote_predict_rejects_unsorted(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "unsorted"}
    with pytest.raises(ProtocolError):
        remote_predict(endpoint, "void m() { }")


def test_remote_predict_maps_422(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "unparseable"}
    with pytest.raises(UnparseableSourceError):
        remote_predict(endpoint, "???")


def test_remote_predict_surfaces_server_errors(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "error", "status": 500}
    with pytest.raises(ProtocolError):
        remote_predict(endpoint, "void m() { }")


def test_remote_unreachable_raises():
    with pytest.raises(RemoteUnavailableError):
        remote_predict("http://127.0.0.1:9", "void m() { }", timeout=0.3)


def test_fallback_provider_uses_builtin(stub_server):
    endpoint, handler = stub_server
    handler.behavior = {"mode": "error", "status": 500}
    builtin = BuiltinProvider(single_example_model())
    provider = FallbackProvider(RemoteProvider(endpoint), builtin)
    preds = provider.predict("void m() { print owing }")
    assert preds[0].subtokens == ("owing",)
    assert provider.fallback_count == 1


def test_make_provider_specs():
    fixed = make_provider("fixed:0.5")
    assert isinstance(fixed, FixedConfidenceProvider)
    assert fixed.predict("x")[0].confidence == 0.5
    remote = make_provider("remote:http://example.invalid:1")
    assert isinstance(remote, RemoteProvider)
    with pytest.raises(ValueError):
        make_provider("builtin")  # needs a model
    builtin = make_provider("builtin", single_example_model())
    assert isinstance(builtin, BuiltinProvider)
    with pytest.raises(ValueError):
        make_provider("nonsense")
