"""CART-style decision tree and bagged random forest (Gini impurity).

Binary labels only: 1 = positive event, 0 = silent. Leaf ties predict
silent. Trees are built iteratively (no recursion limit) and the split
search is vectorised across the candidate features of a node.
"""

from __future__ import annotations

import numpy as np

_GAIN_EPS = 1e-12


class TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "prediction", "n_pos", "n_neg")

    def __init__(self):
        self.feature = None
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.prediction = 0
        self.n_pos = 0
        self.n_neg = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _best_split(values: np.ndarray, labels: np.ndarray, min_leaf: int, parent_gini: float):
    """Best (column, threshold, gini) over all boundaries of all columns.

    Ties resolve to the first (boundary, column) pair in row-major order,
    which keeps training deterministic.
    """
    m, k = values.shape
    order = np.argsort(values, axis=0, kind="stable")
    sorted_values = np.take_along_axis(values, order, axis=0)
    sorted_labels = labels[order]
    cum_pos = np.cumsum(sorted_labels, axis=0)
    total_pos = cum_pos[-1]

    left_n = np.arange(1, m, dtype=float)[:, None]
    right_n = m - left_n
    left_pos = cum_pos[:-1]
    right_pos = total_pos[None, :] - left_pos

    valid = (
        (sorted_values[1:] > sorted_values[:-1])
        & (left_n >= min_leaf)
        & (right_n >= min_leaf)
    )
    if not valid.any():
        return None

    p_left = left_pos / left_n
    p_right = right_pos / right_n
    gini_left = 1.0 - p_left**2 - (1.0 - p_left) ** 2
    gini_right = 1.0 - p_right**2 - (1.0 - p_right) ** 2
    weighted = (left_n * gini_left + right_n * gini_right) / m
    weighted[~valid] = np.inf

    flat = int(np.argmin(weighted))
    boundary, column = divmod(flat, k)
    best = float(weighted[boundary, column])
    if best >= parent_gini - _GAIN_EPS:
        return None
    # threshold sits on the left boundary value itself ("v <= a" with a an
    # observed value), which keeps predictions invariant under strictly
    # monotone per-feature transforms even for unseen points
    threshold = float(sorted_values[boundary, column])
    return column, threshold, best


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    rng: np.random.Generator | None = None,
    max_features: int | None = None,
    max_depth: int | None = None,
    min_leaf: int = 1,
) -> TreeNode:
    n, d = X.shape
    root = TreeNode()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        pos = int(y[rows].sum())
        neg = len(rows) - pos
        node.n_pos, node.n_neg = pos, neg
        node.prediction = 1 if pos > neg else 0
        if pos == 0 or neg == 0 or len(rows) < 2 * min_leaf:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        p = pos / len(rows)
        parent_gini = 1.0 - p**2 - (1.0 - p) ** 2
        found = _best_split(X[np.ix_(rows, feats)], y[rows], min_leaf, parent_gini)
        if found is None:
            continue
        column, threshold, _ = found
        node.feature = int(feats[column])
        node.threshold = float(threshold)
        node.left = TreeNode()
        node.right = TreeNode()
        mask = X[rows, node.feature] <= threshold
        stack.append((node.right, rows[~mask], depth + 1))
        stack.append((node.left, rows[mask], depth + 1))
    return root


def tree_predict(root: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.zeros(len(X), dtype=int)
    stack = [(root, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if node.is_leaf:
            out[idx] = node.prediction
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def forest_fit(
    X: np.ndarray,
    y: np.ndarray,
    *,
    seed: int,
    n_trees: int,
    max_features: int,
    max_depth: int | None = None,
    min_leaf: int = 1,
) -> list[TreeNode]:
    """Bootstrap-bagged trees; tree t draws from its own stream (seed, t)."""
    n = len(y)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        boot = rng.integers(0, n, size=n)
        trees.append(
            build_tree(
                X[boot],
                y[boot],
                rng=rng,
                max_features=max_features,
                max_depth=max_depth,
                min_leaf=min_leaf,
            )
        )
    return trees


def forest_predict(trees: list[TreeNode], X: np.ndarray) -> np.ndarray:
    votes = np.zeros(len(X), dtype=int)
    for tree in trees:
        votes += tree_predict(tree, X)
    return (votes * 2 > len(trees)).astype(int)  # exact tie -> silent


def tree_to_obj(root: TreeNode) -> list[dict]:
    """Flat node list (children by index); safe for arbitrarily deep trees."""
    nodes: list[dict] = []
    stack = [root]
    index = {}
    while stack:
        node = stack.pop()
        index[id(node)] = len(nodes)
        nodes.append(node)
        if not node.is_leaf:
            stack.append(node.right)
            stack.append(node.left)
    out = []
    for node in nodes:
        if node.is_leaf:
            out.append({"p": node.prediction, "np": node.n_pos, "nn": node.n_neg})
        else:
            out.append(
                {
                    "f": node.feature,
                    "t": node.threshold,
                    "l": index[id(node.left)],
                    "r": index[id(node.right)],
                    "p": node.prediction,
                    "np": node.n_pos,
                    "nn": node.n_neg,
                }
            )
    return out


def tree_from_obj(obj: list[dict]) -> TreeNode:
    nodes = [TreeNode() for _ in obj]
    for node, item in zip(nodes, obj):
        node.prediction = int(item["p"])
        node.n_pos = int(item["np"])
        node.n_neg = int(item["nn"])
        if "f" in item:
            node.feature = int(item["f"])
            node.threshold = float(item["t"])
            node.left = nodes[item["l"]]
            node.right = nodes[item["r"]]
    return nodes[0]
