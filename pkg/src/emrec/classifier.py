"""Gradient-boosted decision trees for extraction candidates.

Binary classification with logistic loss: trees are fit to residuals with
exact greedy variance-gain splits, leaf values are Newton steps, and the
learning rate scales leaf contributions at prediction time.

The arithmetic is pinned so that training is reproducible bit-for-bit:

* split candidates are midpoints of consecutive distinct sorted values,
  rows sorted stably, routed left on ``x <= threshold``;
* split gain is ``sl*sl/nl + sr*sr/nr - st*st/nt`` over residual prefix
  sums accumulated sequentially in sorted order;
* the first position (feature index ascending, then sorted position
  ascending) with a strictly greater gain wins; a node splits only when
  the best gain is > 0 and the depth and leaf-size limits allow;
* leaf value = sum(residuals) / max(sum(hessians), 1e-12), both sums
  sequential in ascending row order, stored unscaled;
* probabilities are sigmoids clipped to [1e-15, 1 - 1e-15].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_binary_labels, check_matrix
from .candidates import Fragment, enumerate_candidates, DEFAULT_MIN_STATEMENTS
from .features import FEATURE_NAMES, FEATURE_SET_VERSION, FeatureVector
from .javamodel import MethodModel

PROBA_EPS = 1e-15
HESSIAN_EPS = 1e-12

MODEL_FORMAT = "emrec-gbdt"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledExample:
    vector: FeatureVector
    label: int  # 1 positive, 0 negative
    origin: tuple[str, tuple[int, ...], int, int] | None = None


@dataclass(frozen=True)
class Hyperparams:
    n_trees: int = 200
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 1
    subsample: float = 1.0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must be in (0, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float = 0.0
    gain: float = 0.0
    n_samples: int = 0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def apply(self, row: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.value

    def apply_matrix(self, X: np.ndarray) -> np.ndarray:
        """Leaf value per row, routing index sets level by level."""
        out = np.empty(X.shape[0])
        stack: list[tuple[TreeNode, np.ndarray]] = [(self, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if node.is_leaf:
                out[idx] = node.value
                continue
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
        return out


def _sigmoid_clipped(margins: np.ndarray) -> np.ndarray:
    p = 1.0 / (1.0 + np.exp(-margins))
    return np.clip(p, PROBA_EPS, 1.0 - PROBA_EPS)


def _sequential_sum(values: np.ndarray) -> float:
    total = 0.0
    for v in values.tolist():
        total += v
    return total


def _build_tree(
    X: np.ndarray,
    residuals: np.ndarray,
    hessians: np.ndarray,
    rows: np.ndarray,
    depth: int,
    hp: Hyperparams,
) -> TreeNode:
    node = TreeNode(n_samples=len(rows))
    best_gain = 0.0
    best = None  # (feature, threshold, sorted rows, split position)
    if depth < hp.max_depth and len(rows) >= 2 * hp.min_samples_leaf:
        res_node = residuals[rows]
        total = _sequential_sum(res_node)
        n = len(rows)
        for f in range(X.shape[1]):
            values = X[rows, f]
            order = np.argsort(values, kind="stable")
            sorted_vals = values[order]
            csum = np.cumsum(res_node[order])
            for i in range(n - 1):
                nl = i + 1
                nr = n - nl
                if nl < hp.min_samples_leaf or nr < hp.min_samples_leaf:
                    continue
                if sorted_vals[i] == sorted_vals[i + 1]:
                    continue
                sl = csum[i]
                sr = total - sl
                gain = sl * sl / nl + sr * sr / nr - total * total / n
                if gain > best_gain:
                    best_gain = gain
                    threshold = (sorted_vals[i] + sorted_vals[i + 1]) / 2.0
                    best = (f, float(threshold))
    if best is None:
        res_sum = _sequential_sum(residuals[rows])
        hess_sum = _sequential_sum(hessians[rows])
        node.value = res_sum / max(hess_sum, HESSIAN_EPS)
        return node
    f, threshold = best
    node.feature = f
    node.threshold = threshold
    node.gain = float(best_gain)
    mask = X[rows, f] <= threshold
    node.left = _build_tree(X, residuals, hessians, rows[mask], depth + 1, hp)
    node.right = _build_tree(X, residuals, hessians, rows[~mask], depth + 1, hp)
    return node


class GradientBoostingBinaryClassifier(BaseEstimator, ClassifierMixin):
    """From-scratch logistic-loss gradient boosting with a sklearn API.

    Parameters mirror the Hyperparams record; `seed` drives per-tree row
    subsampling (with ``subsample=1.0`` training is sampling-free and the
    seed has no effect).
    """

    def __init__(
        self,
        n_trees: int = 200,
        max_depth: int = 3,
        learning_rate: float = 0.1,
        min_samples_leaf: int = 1,
        subsample: float = 1.0,
        seed: int = 0,
        feature_names: tuple[str, ...] | None = None,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_samples_leaf = min_samples_leaf
        self.subsample = subsample
        self.seed = seed
        self.feature_names = feature_names

    @property
    def hyperparams(self) -> Hyperparams:
        return Hyperparams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            learning_rate=self.learning_rate,
            min_samples_leaf=self.min_samples_leaf,
            subsample=self.subsample,
        )

    def fit(self, X, y):
        hp = self.hyperparams  # validates ranges
        X = check_matrix(X)
        y = check_binary_labels(y, X.shape[0])
        n = X.shape[0]
        n_pos = int(y.sum())
        n_neg = n - n_pos
        self.base_score_ = math.log(n_pos / n_neg)
        self.n_features_in_ = X.shape[1]
        self.feature_names_ = (
            tuple(self.feature_names)
            if self.feature_names is not None
            else tuple(f"f{i}" for i in range(X.shape[1]))
        )
        if len(self.feature_names_) != X.shape[1]:
            raise ValueError("feature_names length does not match the matrix")
        self.classes_ = np.array([0, 1])
        rng = np.random.default_rng(self.seed)
        margins = np.full(n, self.base_score_)
        trees: list[TreeNode] = []
        sample_size = max(1, int(hp.subsample * n))
        for _ in range(hp.n_trees):
            p = _sigmoid_clipped(margins)
            residuals = y - p
            hessians = p * (1.0 - p)
            if hp.subsample < 1.0:
                rows = np.sort(rng.choice(n, size=sample_size, replace=False))
            else:
                rows = np.arange(n)
            tree = _build_tree(X, residuals, hessians, rows, 0, hp)
            margins += hp.learning_rate * tree.apply_matrix(X)
            trees.append(tree)
        self.trees_ = trees
        self.n_training_samples_ = n
        return self

    def _check_fitted(self):
        if not hasattr(self, "trees_"):
            raise ValueError("classifier is not fitted")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_matrix(X, self.n_features_in_)
        margins = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            margins += self.learning_rate * tree.apply_matrix(X)
        return margins

    def predict_proba(self, X) -> np.ndarray:
        p = _sigmoid_clipped(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)

    @property
    def feature_importances_(self) -> np.ndarray:
        self._check_fitted()
        raw = np.zeros(self.n_features_in_)

        def visit(node: TreeNode, n_root: int):
            if node.is_leaf:
                return
            raw[node.feature] += node.gain / n_root
            visit(node.left, n_root)
            visit(node.right, n_root)

        for tree in self.trees_:
            visit(tree, tree.n_samples)
        total = raw.sum()
        if total <= 0.0:
            return raw
        return raw / total

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        self._check_fitted()

        def encode(node: TreeNode) -> dict:
            if node.is_leaf:
                return {"value": node.value, "n": node.n_samples}
            return {
                "feature": self.feature_names_[node.feature],
                "threshold": node.threshold,
                "gain": node.gain,
                "n": node.n_samples,
                "left": encode(node.left),
                "right": encode(node.right),
            }

        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "feature_set_version": FEATURE_SET_VERSION,
            "feature_names": list(self.feature_names_),
            "base_score": self.base_score_,
            "n_training_samples": self.n_training_samples_,
            "seed": self.seed,
            "hyperparams": {
                "n_trees": self.n_trees,
                "max_depth": self.max_depth,
                "learning_rate": self.learning_rate,
                "min_samples_leaf": self.min_samples_leaf,
                "subsample": self.subsample,
            },
            "trees": [encode(t) for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradientBoostingBinaryClassifier":
        if data.get("format") != MODEL_FORMAT:
            raise ValueError("not a classifier model document")
        if data.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')}")
        hp = data["hyperparams"]
        names = tuple(data["feature_names"])
        model = cls(
            n_trees=hp["n_trees"],
            max_depth=hp["max_depth"],
            learning_rate=hp["learning_rate"],
            min_samples_leaf=hp["min_samples_leaf"],
            subsample=hp["subsample"],
            seed=data["seed"],
            feature_names=names,
        )
        index = {n: i for i, n in enumerate(names)}

        def decode(obj: dict) -> TreeNode:
            if "value" in obj:
                return TreeNode(value=obj["value"], n_samples=obj["n"])
            return TreeNode(
                feature=index[obj["feature"]],
                threshold=obj["threshold"],
                gain=obj["gain"],
                n_samples=obj["n"],
                left=decode(obj["left"]),
                right=decode(obj["right"]),
            )

        model.feature_names_ = names
        model.n_features_in_ = len(names)
        model.base_score_ = data["base_score"]
        model.n_training_samples_ = data["n_training_samples"]
        model.classes_ = np.array([0, 1])
        model.trees_ = [decode(t) for t in data["trees"]]
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "GradientBoostingBinaryClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# --------------------------------------------------------------------------
# Domain-level helpers over labeled examples


def examples_to_arrays(
    examples: list[LabeledExample], feature_names: tuple[str, ...] = FEATURE_NAMES
) -> tuple[np.ndarray, np.ndarray]:
    cols = [FEATURE_NAMES.index(n) for n in feature_names]
    X = np.array([[ex.vector.values[c] for c in cols] for ex in examples], dtype=np.float64)
    y = np.array([ex.label for ex in examples], dtype=np.float64)
    return X, y


def train(
    examples: list[LabeledExample],
    hp: Hyperparams | None = None,
    seed: int = 0,
    feature_names: tuple[str, ...] = FEATURE_NAMES,
) -> GradientBoostingBinaryClassifier:
    hp = hp or Hyperparams()
    X, y = examples_to_arrays(examples, feature_names)
    model = GradientBoostingBinaryClassifier(
        n_trees=hp.n_trees,
        max_depth=hp.max_depth,
        learning_rate=hp.learning_rate,
        min_samples_leaf=hp.min_samples_leaf,
        subsample=hp.subsample,
        seed=seed,
        feature_names=feature_names,
    )
    return model.fit(X, y)


def predict_proba_vector(model: GradientBoostingBinaryClassifier, vector: FeatureVector) -> float:
    return predict_proba_vectors(model, [vector])[0]


def predict_proba_vectors(
    model: GradientBoostingBinaryClassifier, vectors: list[FeatureVector]
) -> list[float]:
    """Positive-class probability for each named feature vector."""
    cols = [FEATURE_NAMES.index(n) for n in model.feature_names_]
    X = np.array([[v.values[c] for c in cols] for v in vectors], dtype=np.float64)
    return model.predict_proba(X)[:, 1].tolist()


def gini_importance(model: GradientBoostingBinaryClassifier) -> dict[str, float]:
    """Per-feature normalized impurity decrease, summing to 1."""
    imp = model.feature_importances_
    return {name: float(v) for name, v in zip(model.feature_names_, imp)}


def generate_negative(
    method: MethodModel,
    gold: Fragment,
    rng_seed: int,
    min_statements: int = DEFAULT_MIN_STATEMENTS,
) -> Fragment | None:
    """Uniformly pick a non-gold candidate of the method, or None if the
    gold fragment is the only candidate."""
    pool = [f for f in enumerate_candidates(method, min_statements) if f != gold]
    if not pool:
        return None
    rng = np.random.default_rng(rng_seed)
    return pool[int(rng.integers(len(pool)))]


def _f_measure(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Shuffle each class and deal its rows round-robin across folds."""
    rng = np.random.default_rng(seed)
    assignments: list[list[int]] = [[] for _ in range(folds)]
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for j, row in enumerate(idx.tolist()):
            assignments[j % folds].append(row)
    return [np.sort(np.array(a, dtype=int)) for a in assignments]


def cross_validate(
    examples: list[LabeledExample],
    hp: Hyperparams | None = None,
    folds: int = 5,
    seed: int = 0,
    feature_names: tuple[str, ...] = FEATURE_NAMES,
) -> float:
    """Mean held-out F-measure at threshold 0.5 over stratified folds."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    hp = hp or Hyperparams()
    X, y = examples_to_arrays(examples, feature_names)
    fold_rows = stratified_folds(y, folds, seed)
    scores: list[float] = []
    seeds = np.random.SeedSequence(seed).spawn(folds)
    for i, test_rows in enumerate(fold_rows):
        train_rows = np.sort(
            np.concatenate([r for j, r in enumerate(fold_rows) if j != i])
        )
        if len(set(y[train_rows].tolist())) < 2:
            raise ValueError(f"fold {i}: training split lacks a class")
        model = GradientBoostingBinaryClassifier(
            n_trees=hp.n_trees,
            max_depth=hp.max_depth,
            learning_rate=hp.learning_rate,
            min_samples_leaf=hp.min_samples_leaf,
            subsample=hp.subsample,
            seed=int(seeds[i].generate_state(1)[0]),
            feature_names=feature_names,
        ).fit(X[train_rows], y[train_rows])
        p = model.predict_proba(X[test_rows])[:, 1]
        pred = p > 0.5
        truth = y[test_rows] == 1
        tp = int(np.sum(pred & truth))
        fp = int(np.sum(pred & ~truth))
        fn = int(np.sum(~pred & truth))
        scores.append(_f_measure(tp, fp, fn))
    return float(np.mean(scores))


@dataclass(frozen=True)
class SearchSpace:
    n_trees: tuple[int, int] = (50, 500)
    max_depth: tuple[int, int] = (2, 6)
    learning_rate: tuple[float, float] = (0.01, 0.3)  # log-uniform
    min_samples_leaf: tuple[int, int] = (1, 10)
    subsample: tuple[float, float] = (0.6, 1.0)

    def sample(self, rng: np.random.Generator) -> Hyperparams:
        lr_lo, lr_hi = self.learning_rate
        return Hyperparams(
            n_trees=int(rng.integers(self.n_trees[0], self.n_trees[1] + 1)),
            max_depth=int(rng.integers(self.max_depth[0], self.max_depth[1] + 1)),
            learning_rate=float(
                math.exp(rng.uniform(math.log(lr_lo), math.log(lr_hi)))
            ),
            min_samples_leaf=int(
                rng.integers(self.min_samples_leaf[0], self.min_samples_leaf[1] + 1)
            ),
            subsample=float(rng.uniform(self.subsample[0], self.subsample[1])),
        )


def tune(
    examples: list[LabeledExample],
    search_space: SearchSpace | None = None,
    trials: int = 20,
    folds: int = 5,
    seed: int = 0,
    feature_names: tuple[str, ...] = FEATURE_NAMES,
) -> tuple[Hyperparams, float]:
    """Random search maximizing mean cross-validated F-measure."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    space = search_space or SearchSpace()
    rng = np.random.default_rng(seed)
    cv_seeds = np.random.SeedSequence(seed).spawn(trials)
    best: tuple[Hyperparams, float] | None = None
    for t in range(trials):
        hp = space.sample(rng)
        score = cross_validate(
            examples, hp, folds=folds, seed=int(cv_seeds[t].generate_state(1)[0]),
            feature_names=feature_names,
        )
        if best is None or score > best[1]:
            best = (hp, score)
    return best
