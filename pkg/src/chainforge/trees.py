"""Small CART classification trees and a seeded bagging ensemble.

Implemented directly on numpy so training is reproducible bit-for-bit from a
seed: bootstrap resampling, per-split feature subsampling, and gini impurity
minimization over midpoint thresholds. Leaves store the positive-label
fraction, so a tree's output is already a probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    value: float = 0.0  # positive fraction at the node


@dataclass
class CartTree:
    nodes: list[TreeNode] = field(default_factory=list)

    def predict_one(self, x: np.ndarray) -> float:
        i = 0
        node = self.nodes[i]
        while node.feature >= 0:
            i = node.left if x[node.feature] < node.threshold else node.right
            node = self.nodes[i]
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(row) for row in np.atleast_2d(X)])

    def to_jsonable(self) -> list[list[float]]:
        return [[n.feature, n.threshold, n.left, n.right, n.value] for n in self.nodes]

    @classmethod
    def from_jsonable(cls, rows: list[list[float]]) -> "CartTree":
        return cls(nodes=[
            TreeNode(feature=int(r[0]), threshold=float(r[1]), left=int(r[2]), right=int(r[3]), value=float(r[4]))
            for r in rows
        ])


def _best_split(X, y, feature_ids):
    """Lowest weighted gini over midpoint thresholds of the sampled features."""
    n = len(y)
    total_pos = y.sum()
    best = (np.inf, -1, 0.0)  # impurity, feature, threshold
    for f in feature_ids:
        col = X[:, f]
        order = np.argsort(col, kind="mergesort")
        xs, ys = col[order], y[order]
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        if cut.size == 0:
            continue
        n_left = cut + 1.0
        n_right = n - n_left
        pos_left = np.cumsum(ys)[cut]
        pos_right = total_pos - pos_left
        gini_left = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
        gini_right = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
        weighted = (n_left * gini_left + n_right * gini_right) / n
        j = int(np.argmin(weighted))
        if weighted[j] < best[0]:
            best = (float(weighted[j]), int(f), float((xs[cut[j]] + xs[cut[j] + 1]) / 2.0))
    return best


def grow_tree(X, y, rng, max_depth=6, min_samples_split=2, n_split_features=None) -> CartTree:
    """Fit one CART tree; features are resampled independently at every split."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n_features = X.shape[1]
    if n_split_features is None:
        n_split_features = max(1, int(np.sqrt(n_features)))
    tree = CartTree()

    def build(idx, depth):
        node_id = len(tree.nodes)
        value = float(y[idx].mean())
        tree.nodes.append(TreeNode(value=value))
        if depth >= max_depth or len(idx) < min_samples_split or value in (0.0, 1.0):
            return node_id
        feats = np.sort(rng.choice(n_features, size=min(n_split_features, n_features), replace=False))
        impurity, feature, threshold = _best_split(X[idx], y[idx], feats)
        if feature < 0:
            return node_id
        parent_gini = 2.0 * value * (1.0 - value)
        if impurity >= parent_gini:
            return node_id
        mask = X[idx, feature] < threshold
        node = tree.nodes[node_id]
        node.feature = feature
        node.threshold = threshold
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node_id

    build(np.arange(len(y)), 0)
    return tree


@dataclass
class ForestParams:
    n_trees: int = 100
    max_depth: int = 6
    min_samples_split: int = 2
    bootstrap: bool = True


def grow_forest(X, y, rng, params: ForestParams | None = None) -> list[CartTree]:
    """Bagged ensemble of CART trees with sqrt-feature subsampling per split."""
    params = params or ForestParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    trees = []
    for _ in range(params.n_trees):
        idx = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        trees.append(grow_tree(
            X[idx], y[idx], rng,
            max_depth=params.max_depth,
            min_samples_split=params.min_samples_split,
        ))
    return trees


def forest_predict(trees: list[CartTree], X) -> np.ndarray:
    """Mean of tree leaf scores, clipped to [0, 1]."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    scores = np.zeros(X.shape[0])
    for tree in trees:
        scores += tree.predict(X)
    return np.clip(scores / len(trees), 0.0, 1.0)
