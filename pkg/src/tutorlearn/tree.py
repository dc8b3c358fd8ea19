"""A from-scratch decision tree over categorical string features.

Greedy top-down induction with an information-gain criterion.  Features whose
observed values are all integer strings are split by ordered binary thresholds
(with a separate ABSENT branch when missing values occur); other features use
multiway categorical splits.  Fitting is deterministic: examples are
canonically sorted before induction, and ties (between features, labels,
thresholds, and branches) break lexicographically.  Prediction routes unseen
categorical values to the child that absorbed the most training examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence, Union

import numpy as np

ABSENT = "ABSENT"
_NUMERIC_ABSENT = -1


def example_sort_key(features: Mapping[str, str], label: Hashable) -> str:
    """Canonical serialization used to order training examples before fitting."""
    parts = [f"{k}={features[k]}" for k in sorted(features)]
    return "|".join(parts) + f"::{label!r}"


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _group_entropy(groups: np.ndarray, n: int) -> float:
    """Weighted entropy of label-count rows (one row per branch)."""
    sizes = groups.sum(axis=1).astype(np.float64)
    mask = sizes > 0
    if not mask.any():
        return 0.0
    rows = groups[mask]
    row_sizes = sizes[mask]
    p = rows / row_sizes[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float((row_sizes / n) @ (-(p * logs).sum(axis=1)))


@dataclass(frozen=True)
class Leaf:
    label: Hashable
    counts: tuple  # ((label, count), ...) sorted by label


@dataclass(frozen=True)
class CatSplit:
    feature: str
    branches: tuple  # ((value, node), ...) sorted by value
    majority_value: str  # branch holding the most training examples
    n_samples: int

    def child_for(self, value: str):
        for v, node in self.branches:
            if v == value:
                return node
        for v, node in self.branches:
            if v == self.majority_value:
                return node
        raise RuntimeError("split node has no branches")


@dataclass(frozen=True)
class NumSplit:
    feature: str
    threshold: int
    le: "Node"
    gt: "Node"
    absent: Optional["Node"]
    majority_side: str  # 'le' | 'gt' | 'absent'
    n_samples: int

    def child_for(self, value: str):
        if value is not None and value != ABSENT and value.isdigit():
            return self.le if int(value) <= self.threshold else self.gt
        if self.absent is not None:
            return self.absent
        return {"le": self.le, "gt": self.gt}.get(self.majority_side, self.le)


Node = Union[Leaf, CatSplit, NumSplit]


def _check_Xy(X: Sequence[Mapping[str, str]], y: Sequence[Hashable]) -> None:
    if len(X) == 0:
        raise ValueError("at least one training example is required")
    if len(X) != len(y):
        raise ValueError(f"X and y length mismatch: {len(X)} != {len(y)}")


class CategoricalDecisionTree:
    """Decision tree over string feature maps with a scikit-learn style surface."""

    def __init__(self, criterion: str = "info_gain", min_samples: int = 2, seed: int = 0):
        self.criterion = criterion
        self.min_samples = min_samples
        self.seed = seed
        self.root_: Optional[Node] = None
        self.feature_names_: list[str] = []
        self.classes_: list = []

    # -- params (estimator-API compatibility) --------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {"criterion": self.criterion, "min_samples": self.min_samples, "seed": self.seed}

    def set_params(self, **params) -> "CategoricalDecisionTree":
        for key, value in params.items():
            if key not in ("criterion", "min_samples", "seed"):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    # -- fitting --------------------------------------------------------------

    def fit(
        self,
        X: Sequence[Mapping[str, str]],
        y: Sequence[Hashable],
        sort_keys: Optional[Sequence[str]] = None,
    ) -> "CategoricalDecisionTree":
        if self.criterion != "info_gain":
            raise ValueError(f"unsupported criterion: {self.criterion!r}")
        _check_Xy(X, y)
        if sort_keys is None:
            sort_keys = [example_sort_key(f, l) for f, l in zip(X, y)]
        order = sorted(range(len(X)), key=lambda i: sort_keys[i])
        X = [X[i] for i in order]
        y = [y[i] for i in order]

        names = sorted({k for feats in X for k in feats})
        self.feature_names_ = names
        self.classes_ = sorted(set(y), key=repr)
        label_code = {c: i for i, c in enumerate(self.classes_)}

        self._numeric: list[bool] = []
        self._vocab_values: list[list[str]] = []
        columns = []
        for name in names:
            col_vals = [feats.get(name, ABSENT) for feats in X]
            present = [v for v in col_vals if v != ABSENT]
            numeric = bool(present) and all(v.isdigit() for v in present)
            self._numeric.append(numeric)
            if numeric:
                self._vocab_values.append([])
                codes = [(_NUMERIC_ABSENT if v == ABSENT else int(v)) for v in col_vals]
            else:
                vocab = {v: i for i, v in enumerate(sorted(set(col_vals)))}
                self._vocab_values.append(sorted(vocab, key=vocab.get))
                codes = [vocab[v] for v in col_vals]
            columns.append(np.asarray(codes, dtype=np.int64))
        matrix = np.stack(columns, axis=1) if columns else np.zeros((len(X), 0), dtype=np.int64)
        labels = np.fromiter((label_code[l] for l in y), dtype=np.int64, count=len(y))

        self.root_ = self._build(matrix, labels)
        return self

    def _leaf(self, labels: np.ndarray) -> Leaf:
        counts = np.bincount(labels, minlength=len(self.classes_))
        best = int(np.argmax(counts))  # classes_ is sorted, so ties pick the smallest
        pairs = tuple((self.classes_[i], int(c)) for i, c in enumerate(counts) if c > 0)
        return Leaf(self.classes_[best], pairs)

    def _numeric_gain(self, col: np.ndarray, labels: np.ndarray, n_labels: int, parent: float):
        """Best (gain, threshold) for an ordered split; None without a valid cut."""
        present = col != _NUMERIC_ABSENT
        values = col[present]
        if values.size == 0:
            return None
        uniq = np.unique(values)
        if len(uniq) <= 1:
            return None
        absent_counts = np.bincount(labels[~present], minlength=n_labels)
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_labels = labels[present][order]
        onehot = np.zeros((sorted_labels.size, n_labels), dtype=np.int64)
        onehot[np.arange(sorted_labels.size), sorted_labels] = 1
        prefix = np.cumsum(onehot, axis=0)
        total = prefix[-1]
        # candidate cut after the last occurrence of each unique value but the max
        cut_idx = np.searchsorted(sorted_vals, uniq[:-1], side="right") - 1
        n = labels.size
        best = None
        for i, thr in zip(cut_idx, uniq[:-1]):
            le = prefix[i]
            gt = total - le
            groups = np.stack([le, gt, absent_counts])
            gain = parent - _group_entropy(groups, n)
            if best is None or gain > best[0] + 1e-12:
                best = (gain, int(thr))
        return best

    def _build(self, matrix: np.ndarray, labels: np.ndarray) -> Node:
        n = len(labels)
        class_counts = np.bincount(labels, minlength=len(self.classes_))
        if (class_counts > 0).sum() <= 1 or n < self.min_samples or matrix.shape[1] == 0:
            return self._leaf(labels)

        parent_entropy = _entropy(class_counts)
        n_labels = len(self.classes_)
        best_gain = 0.0
        best_feature = -1
        best_threshold = None
        for f in range(matrix.shape[1]):
            col = matrix[:, f]
            if self._numeric[f]:
                found = self._numeric_gain(col, labels, n_labels, parent_entropy)
                if found is None:
                    continue
                gain, threshold = found
                if gain > best_gain + 1e-12:
                    best_gain, best_feature, best_threshold = gain, f, threshold
            else:
                n_vals = len(self._vocab_values[f])
                contingency = np.bincount(col * n_labels + labels, minlength=n_vals * n_labels)
                contingency = contingency.reshape(n_vals, n_labels)
                if (contingency.sum(axis=1) > 0).sum() <= 1:
                    continue
                gain = parent_entropy - _group_entropy(contingency, n)
                if gain > best_gain + 1e-12:
                    best_gain, best_feature, best_threshold = gain, f, None
        if best_feature < 0:
            return self._leaf(labels)

        col = matrix[:, best_feature]
        name = self.feature_names_[best_feature]
        if best_threshold is not None:
            le_idx = (col != _NUMERIC_ABSENT) & (col <= best_threshold)
            gt_idx = (col != _NUMERIC_ABSENT) & (col > best_threshold)
            ab_idx = col == _NUMERIC_ABSENT
            le = self._build(matrix[le_idx], labels[le_idx])
            gt = self._build(matrix[gt_idx], labels[gt_idx])
            absent = self._build(matrix[ab_idx], labels[ab_idx]) if ab_idx.any() else None
            sizes = {"le": int(le_idx.sum()), "gt": int(gt_idx.sum()), "absent": int(ab_idx.sum())}
            majority = max(sorted(sizes), key=lambda k: sizes[k])
            return NumSplit(name, best_threshold, le, gt, absent, majority, n)

        branches = []
        majority_value = None
        majority_size = -1
        for code in np.unique(col):
            idx = col == code
            value = self._vocab_values[best_feature][int(code)]
            child = self._build(matrix[idx], labels[idx])
            branches.append((value, child))
            size = int(idx.sum())
            if size > majority_size or (size == majority_size and value < majority_value):
                majority_size = size
                majority_value = value
        return CatSplit(
            feature=name,
            branches=tuple(sorted(branches, key=lambda b: b[0])),
            majority_value=majority_value,
            n_samples=n,
        )

    # -- prediction -----------------------------------------------------------

    def predict_one(self, features: Mapping[str, str]) -> Hashable:
        return self.decide_one(features)[0]

    def decide_one(self, features: Mapping[str, str]) -> tuple:
        """(label, leaf counts) for one example."""
        if self.root_ is None:
            raise RuntimeError("tree is not fitted")
        node = self.root_
        while not isinstance(node, Leaf):
            node = node.child_for(features.get(node.feature, ABSENT))
        return node.label, node.counts

    def predict(self, X: Sequence[Mapping[str, str]]) -> list:
        return [self.predict_one(feats) for feats in X]

    # -- export ---------------------------------------------------------------

    def to_rules(self, positive_label: Hashable = True) -> list[dict]:
        """Disjunction of root-to-leaf conjunctions reaching the given label."""
        if self.root_ is None:
            return []
        rules: list[dict] = []

        def walk(node: Node, path: dict) -> None:
            if isinstance(node, Leaf):
                if node.label == positive_label:
                    rules.append(dict(path))
                return
            if isinstance(node, NumSplit):
                walk(node.le, {**path, node.feature: f"<={node.threshold}"})
                walk(node.gt, {**path, node.feature: f">{node.threshold}"})
                if node.absent is not None:
                    walk(node.absent, {**path, node.feature: ABSENT})
                return
            for value, child in node.branches:
                walk(child, {**path, node.feature: value})

        walk(self.root_, {})
        return rules

    def to_wire(self) -> dict:
        def conv(node: Node) -> dict:
            if isinstance(node, Leaf):
                return {"label": repr(node.label), "counts": [[repr(l), c] for l, c in node.counts]}
            if isinstance(node, NumSplit):
                return {
                    "feature": node.feature,
                    "threshold": node.threshold,
                    "majority": node.majority_side,
                    "le": conv(node.le),
                    "gt": conv(node.gt),
                    "absent": conv(node.absent) if node.absent is not None else None,
                }
            return {
                "feature": node.feature,
                "majority": node.majority_value,
                "branches": {v: conv(c) for v, c in node.branches},
            }

        return {"params": self.get_params(), "tree": conv(self.root_) if self.root_ else None}
