import json

import numpy as np
import pytest

from emrec.candidates import enumerate_candidates
from emrec.classifier import (
    GradientBoostingBinaryClassifier,
    Hyperparams,
    LabeledExample,
    SearchSpace,
    TreeNode,
    cross_validate,
    examples_to_arrays,
    generate_negative,
    gini_importance,
    predict_proba_vector,
    train,
    tune,
)
from emrec.features import FEATURE_NAMES, FeatureVector
from emrec.javamodel import parse_source

import javafixtures as fx
from reference_gbdt import fit_reference, flatten, predict_reference


def make_examples(X, y):
    """Lift plain arrays into 49-feature LabeledExamples (rest zeros)."""
    out = []
    for row, label in zip(X, y):
        values = [0.0] * len(FEATURE_NAMES)
        for j, v in enumerate(row):
            values[j] = float(v)
        out.append(LabeledExample(vector=FeatureVector(tuple(values)), label=int(label)))
    return out


def separable_data(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 5))
    y = (X[:, 0] > X[:, 1]).astype(int)
    if y.sum() in (0, n):  # keep both classes present
        y[0] = 1 - y[0]
    return X, y


# -- fitting basics -----------------------------------------------------------


def test_stump_straddles_the_split():
    X = np.array([[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]])
    y = np.array([0, 0, 0, 1, 1, 1])
    model = GradientBoostingBinaryClassifier(
        n_trees=1, max_depth=1, learning_rate=0.5
    ).fit(X, y)
    p = model.predict_proba(np.array([[0.2], [0.8]]))[:, 1]
    assert p[0] < 0.5 < p[1]


def test_invalid_hyperparams_rejected():
    with pytest.raises(ValueError):
        GradientBoostingBinaryClassifier(learning_rate=0.0).fit(
            np.array([[0.0], [1.0]]), np.array([0, 1])
        )
    with pytest.raises(ValueError):
        Hyperparams(n_trees=0)
    with pytest.raises(ValueError):
        Hyperparams(subsample=0.0)


def test_single_class_input_rejected():
    X = np.zeros((4, 2))
    with pytest.raises(ValueError):
        GradientBoostingBinaryClassifier().fit(X, np.ones(4))


def test_separable_training_accuracy():
    X, y = separable_data()
    model = GradientBoostingBinaryClassifier(n_trees=100, max_depth=3).fit(X, y)
    accuracy = (model.predict(X) == y).mean()
    assert accuracy >= 0.99


def test_zero_trees_equivalent_base_rate():
    # A fitted model with all-zero leaf values predicts the base rate.
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 1, 1, 1])
    model = GradientBoostingBinaryClassifier(n_trees=1, max_depth=1).fit(X, y)
    model.trees_ = [TreeNode(value=0.0, n_samples=4)]
    p = model.predict_proba(X)[:, 1]
    assert np.allclose(p, 0.75, atol=1e-12)


def test_probabilities_strictly_inside_unit_interval():
    X, y = separable_data(80, seed=3)
    model = GradientBoostingBinaryClassifier(n_trees=300, max_depth=4, learning_rate=0.3).fit(X, y)
    p = model.predict_proba(X)[:, 1]
    assert np.all(p > 0.0)
    assert np.all(p < 1.0)


def test_prediction_is_deterministic():
    X, y = separable_data(60, seed=5)
    model = GradientBoostingBinaryClassifier(n_trees=30).fit(X, y)
    assert np.array_equal(model.predict_proba(X), model.predict_proba(X))


def test_appending_zero_tree_never_changes_predictions():
    X, y = separable_data(60, seed=6)
    model = GradientBoostingBinaryClassifier(n_trees=20).fit(X, y)
    before = model.predict_proba(X)
    model.trees_.append(TreeNode(value=0.0, n_samples=len(y)))
    after = model.predict_proba(X)
    assert np.array_equal(before, after)


def test_monotone_feature_rescaling_is_invariant():
    X, y = separable_data(100, seed=8)
    test_X, _ = separable_data(40, seed=9)
    model_a = GradientBoostingBinaryClassifier(n_trees=40, max_depth=3).fit(X, y)
    pa = model_a.predict_proba(test_X)[:, 1]
    scaled = X.copy()
    scaled_test = test_X.copy()
    scaled[:, 2] = 3.0 * scaled[:, 2] + 1.0
    scaled_test[:, 2] = 3.0 * scaled_test[:, 2] + 1.0
    model_b = GradientBoostingBinaryClassifier(n_trees=40, max_depth=3).fit(scaled, y)
    pb = model_b.predict_proba(scaled_test)[:, 1]
    assert np.allclose(pa, pb, atol=1e-12)


def test_subsampling_is_seeded():
    X, y = separable_data(100, seed=11)
    kwargs = dict(n_trees=25, max_depth=2, subsample=0.7)
    a = GradientBoostingBinaryClassifier(seed=5, **kwargs).fit(X, y)
    b = GradientBoostingBinaryClassifier(seed=5, **kwargs).fit(X, y)
    c = GradientBoostingBinaryClassifier(seed=6, **kwargs).fit(X, y)
    assert np.array_equal(a.predict_proba(X), b.predict_proba(X))
    assert not np.array_equal(a.predict_proba(X), c.predict_proba(X))


# -- reference-oracle equivalence --------------------------------------------


def test_trees_match_reference_node_for_node():
    rng = np.random.default_rng(42)
    X = rng.uniform(size=(50, 4))
    y = (X[:, 0] + 0.3 * X[:, 1] > 0.8).astype(int)
    hp = dict(n_trees=6, max_depth=2, learning_rate=0.2)
    model = GradientBoostingBinaryClassifier(subsample=1.0, **hp).fit(X, y)
    base, ref_trees = fit_reference(X, y, min_leaf=1, **hp)
    assert model.base_score_ == pytest.approx(base, abs=0.0)
    assert len(model.trees_) == len(ref_trees)

    def flatten_ours(node):
        out = []

        def visit(n):
            if n.is_leaf:
                out.append(("leaf", None, n.value))
            else:
                out.append(("split", n.feature, n.threshold))
                visit(n.left)
                visit(n.right)

        visit(node)
        return out

    for ours, ref in zip(model.trees_, ref_trees):
        ours_flat = flatten_ours(ours)
        ref_flat = flatten(ref)
        assert len(ours_flat) == len(ref_flat)
        for (kind_a, fa, va), (kind_b, fb, vb) in zip(ours_flat, ref_flat):
            assert kind_a == kind_b
            assert fa == fb
            assert va == pytest.approx(vb, rel=1e-12, abs=1e-12)
    ref_p = predict_reference(base, ref_trees, hp["learning_rate"], X)
    ours_p = model.predict_proba(X)[:, 1]
    assert np.allclose(ours_p, ref_p, atol=1e-12)


# -- importance ----------------------------------------------------------------


def test_stump_importance_is_all_on_split_feature():
    X = np.array([[0.1, 5.0], [0.2, 5.0], [0.8, 5.0], [0.9, 5.0]])
    y = np.array([0, 0, 1, 1])
    model = GradientBoostingBinaryClassifier(
        n_trees=1, max_depth=1, feature_names=("a", "b")
    ).fit(X, y)
    importance = gini_importance(model)
    assert importance == {"a": 1.0, "b": 0.0}


def test_importances_sum_to_one():
    X, y = separable_data(120, seed=13)
    model = GradientBoostingBinaryClassifier(n_trees=60, max_depth=3).fit(X, y)
    imp = model.feature_importances_
    assert abs(imp.sum() - 1.0) <= 1e-9
    assert np.all(imp >= 0.0)


def test_never_split_feature_importance_exactly_zero():
    rng = np.random.default_rng(17)
    X = rng.uniform(size=(100, 3))
    X[:, 2] = 0.5  # constant: can never split
    y = (X[:, 0] > 0.5).astype(int)
    model = GradientBoostingBinaryClassifier(n_trees=40, max_depth=3).fit(X, y)
    assert model.feature_importances_[2] == 0.0


# -- persistence ---------------------------------------------------------------


def test_model_json_round_trip_is_bit_exact(tmp_path):
    X, y = separable_data(60, seed=21)
    model = GradientBoostingBinaryClassifier(n_trees=15, max_depth=3).fit(X, y)
    p1 = tmp_path / "m1.json"
    p2 = tmp_path / "m2.json"
    model.save(p1)
    loaded = GradientBoostingBinaryClassifier.load(p1)
    loaded.save(p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(model.predict_proba(X), loaded.predict_proba(X))
    assert gini_importance(model) == gini_importance(loaded)


def test_model_rejects_foreign_documents(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"format": "something-else"}))
    with pytest.raises(ValueError):
        GradientBoostingBinaryClassifier.load(path)


def test_predict_proba_vector_uses_named_columns():
    X, y = separable_data(80, seed=23)
    examples = make_examples(X, y)
    model = train(examples, Hyperparams(n_trees=30, max_depth=3), seed=0)
    direct = model.predict_proba(examples_to_arrays(examples)[0])[:, 1]
    via_vec = [predict_proba_vector(model, ex.vector) for ex in examples]
    assert np.allclose(direct, via_vec, atol=0.0)
    sub_model = train(
        examples, Hyperparams(n_trees=30, max_depth=3), seed=0,
        feature_names=tuple(FEATURE_NAMES[:5]),
    )
    assert predict_proba_vector(sub_model, examples[0].vector) > 0.0


# -- cross-validation ----------------------------------------------------------


def test_cross_validate_perfectly_separable():
    X, y = separable_data(200, seed=29)
    X[:, 0] = y + 0.01 * X[:, 0]  # make separation trivial
    examples = make_examples(X, y)
    score = cross_validate(examples, Hyperparams(n_trees=30, max_depth=2), folds=5, seed=1)
    assert score >= 0.99


def test_cross_validate_random_labels_near_half():
    rng = np.random.default_rng(31)
    means = []
    for seed in range(50):
        X = rng.uniform(size=(40, 3))
        y = np.array([0, 1] * 20)
        examples = make_examples(X, y)
        means.append(
            cross_validate(examples, Hyperparams(n_trees=8, max_depth=2), folds=4, seed=seed)
        )
    assert abs(float(np.mean(means)) - 0.5) <= 0.15


def test_leave_one_out_runs():
    X, y = separable_data(12, seed=37)
    examples = make_examples(X, y)
    score = cross_validate(examples, Hyperparams(n_trees=5, max_depth=1), folds=12, seed=0)
    assert 0.0 <= score <= 1.0


def test_fold_without_training_class_errors():
    X = np.array([[0.0], [1.0], [2.0]])
    y = np.array([1, 0, 0])
    examples = make_examples(X, y)
    # 3 folds over one positive: two folds train without positives.
    with pytest.raises(ValueError):
        cross_validate(examples, Hyperparams(n_trees=3, max_depth=1), folds=3, seed=0)


def test_cross_validate_requires_two_folds():
    X, y = separable_data(10, seed=39)
    with pytest.raises(ValueError):
        cross_validate(make_examples(X, y), folds=1)


# -- tuning ---------------------------------------------------------------------


def test_tune_single_trial_returns_sampled_point():
    X, y = separable_data(40, seed=41)
    examples = make_examples(X, y)
    hp, score = tune(examples, SearchSpace(), trials=1, folds=4, seed=7)
    assert isinstance(hp, Hyperparams)
    assert 0.0 <= score <= 1.0
    hp2, score2 = tune(examples, SearchSpace(), trials=1, folds=4, seed=7)
    assert hp == hp2 and score == score2


def test_tune_finds_the_better_depth():
    # XOR-style labels need depth 2; depth 1 cannot express them.
    rng = np.random.default_rng(43)
    X = rng.uniform(size=(120, 2))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(int)
    examples = make_examples(X, y)
    space = SearchSpace(
        n_trees=(40, 40), max_depth=(1, 2), learning_rate=(0.2, 0.2),
        min_samples_leaf=(1, 1), subsample=(1.0, 1.0),
    )
    # Exhaustive check of the two-point space, then the tuner.
    shallow = cross_validate(examples, Hyperparams(40, 1, 0.2, 1, 1.0), folds=4, seed=3)
    deep = cross_validate(examples, Hyperparams(40, 2, 0.2, 1, 1.0), folds=4, seed=3)
    assert deep > shallow
    hp, _score = tune(examples, space, trials=20, folds=4, seed=3)
    assert hp.max_depth == 2


# -- negative generation ---------------------------------------------------------


def test_generate_negative_none_when_gold_is_only_candidate():
    src = """\
class Solo {
    void only(int n) {
        if (n > 0) {
            int a = n + 1;
            log(a);
            mark(a);
        }
    }
}
"""
    m = parse_source(src).methods[0]
    [only] = enumerate_candidates(m, 3)
    assert generate_negative(m, only, rng_seed=1, min_statements=3) is None


def test_generate_negative_forced_choice():
    src = """\
class Duo {
    void steps(int n) {
        one(n);
        two(n);
        three(n);
        four(n);
    }
}
"""
    m = parse_source(src).methods[0]
    candidates = enumerate_candidates(m, 3)
    # Four flat statements with a minimum of three leave exactly two
    # candidates: the leading and the trailing triple.
    assert [(f.start_index, f.end_index) for f in candidates] == [(0, 2), (1, 3)]
    gold = candidates[0]
    for seed in range(10):
        neg = generate_negative(m, gold, rng_seed=seed, min_statements=3)
        assert neg == candidates[1]


def test_generate_negative_deterministic_per_seed():
    m = parse_source(fx.TEN_STATEMENTS).methods[0]
    gold = enumerate_candidates(m, 3)[0]
    a = generate_negative(m, gold, rng_seed=99, min_statements=3)
    b = generate_negative(m, gold, rng_seed=99, min_statements=3)
    assert a == b
