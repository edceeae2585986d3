"""RBF-kernel SVM trained with sequential minimal optimization.

smo_solve works on an explicit kernel matrix and follows Platt's pair
selection: examine KKT violators, pick the partner maximising |E1 - E2|,
fall back to seeded random sweeps. The zero-curvature case (duplicate
points) is resolved by evaluating the dual objective at both clip ends.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BOUND_EPS = 1e-8
_MOVE_EPS = 1e-12


@dataclass
class SmoResult:
    alphas: np.ndarray
    bias: float
    converged: bool
    passes: int


def rbf_kernel(X: np.ndarray, gamma: float, Y: np.ndarray | None = None) -> np.ndarray:
    if Y is None:
        Y = X
    sq = (
        (X**2).sum(axis=1)[:, None]
        + (Y**2).sum(axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-gamma * sq)


def dual_objective(K: np.ndarray, y: np.ndarray, alphas: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 1/2 (alpha*y)' K (alpha*y); maximised at the solution."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ K @ ay)


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = 1e-3,
    seed: int = 0,
    max_passes: int | None = None,
) -> SmoResult:
    """Solve the soft-margin dual for a PSD kernel matrix.

    Decision values are f(x) = sum_i alpha_i y_i K(i, x) + b. Returns with
    converged=False (rather than raising) when max_passes is exhausted.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if max_passes is None:
        max_passes = 10 * n
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF]))

    alphas = np.zeros(n)
    bias = 0.0
    errors = -y.copy()  # f - y with all alphas zero

    def take_step(i1: int, i2: int) -> bool:
        nonlocal bias, errors
        if i1 == i2:
            return False
        a1, a2 = alphas[i1], alphas[i2]
        y1, y2 = y[i1], y[i2]
        e1, e2 = errors[i1], errors[i2]
        s = y1 * y2
        if s < 0:
            lo, hi = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            lo, hi = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if hi - lo < _MOVE_EPS:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > _MOVE_EPS:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, lo), hi)
        else:
            # flat direction: pick the clip end with the lower dual objective
            f1 = (e1 + y1 - bias) - y1 * a1 * k11 - y2 * a2 * k12
            f2 = (e2 + y2 - bias) - y1 * a1 * k12 - y2 * a2 * k22

            def pair_obj(b2: float) -> float:
                b1 = a1 + s * (a2 - b2)
                return (
                    0.5 * k11 * b1 * b1
                    + 0.5 * k22 * b2 * b2
                    + s * k12 * b1 * b2
                    + y1 * b1 * f1
                    + y2 * b2 * f2
                    - b1
                    - b2
                )

            lo_obj, hi_obj = pair_obj(lo), pair_obj(hi)
            if lo_obj < hi_obj - _MOVE_EPS:
                a2_new = lo
            elif lo_obj > hi_obj + _MOVE_EPS:
                a2_new = hi
            else:
                return False
        if abs(a2_new - a2) < _MOVE_EPS * (a2_new + a2 + _MOVE_EPS):
            return False
        a1_new = a1 + s * (a2 - a2_new)

        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = bias - e1 - d1 * k11 - d2 * k12
        b2 = bias - e2 - d1 * k12 - d2 * k22
        if _BOUND_EPS < a1_new < C - _BOUND_EPS:
            bias_new = b1
        elif _BOUND_EPS < a2_new < C - _BOUND_EPS:
            bias_new = b2
        else:
            bias_new = (b1 + b2) / 2.0

        alphas[i1], alphas[i2] = a1_new, a2_new
        errors += d1 * K[i1] + d2 * K[i2] + (bias_new - bias)
        bias = bias_new
        return True

    def examine(i2: int) -> int:
        y2, a2, e2 = y[i2], alphas[i2], errors[i2]
        r2 = e2 * y2
        if not ((r2 < -tol and a2 < C - _BOUND_EPS) or (r2 > tol and a2 > _BOUND_EPS)):
            return 0
        non_bound = np.flatnonzero((alphas > _BOUND_EPS) & (alphas < C - _BOUND_EPS))
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(errors[non_bound] - e2))])
            if take_step(i1, i2):
                return 1
        if len(non_bound):
            start = rng.integers(len(non_bound))
            for i1 in np.roll(non_bound, -start):
                if take_step(int(i1), i2):
                    return 1
        start = rng.integers(n)
        for i1 in np.roll(np.arange(n), -start):
            if take_step(int(i1), i2):
                return 1
        return 0

    passes = 0
    converged = True
    num_changed = 0
    examine_all = True
    while num_changed > 0 or examine_all:
        passes += 1
        if passes > max_passes:
            converged = False
            break
        num_changed = 0
        if examine_all:
            targets = range(n)
        else:
            targets = np.flatnonzero((alphas > _BOUND_EPS) & (alphas < C - _BOUND_EPS))
        for i2 in targets:
            num_changed += examine(int(i2))
        if examine_all:
            examine_all = False
        elif num_changed == 0:
            examine_all = True

    return SmoResult(alphas=alphas, bias=bias, converged=converged, passes=passes)


def resolve_gamma(X: np.ndarray, gamma) -> float:
    """'scale' maps to 1 / (n_features * mean feature variance)."""
    if gamma == "scale":
        mean_var = float(X.var(axis=0).mean())
        return 1.0 / (X.shape[1] * max(mean_var, 1e-12))
    return float(gamma)


def fit_svm(
    X: np.ndarray,
    y01: np.ndarray,
    *,
    C: float,
    gamma,
    tol: float,
    seed: int,
    max_passes: int | None = None,
) -> dict:
    g = resolve_gamma(X, gamma)
    y = np.where(y01 == 1, 1.0, -1.0)
    K = rbf_kernel(X, g)
    result = smo_solve(K, y, C=C, tol=tol, seed=seed, max_passes=max_passes)
    keep = result.alphas > 1e-12
    return {
        "gamma": g,
        "support": X[keep],
        "coef": (result.alphas * y)[keep],
        "bias": result.bias,
        "converged": result.converged,
    }


def svm_decision(params: dict, X: np.ndarray) -> np.ndarray:
    support = np.asarray(params["support"], dtype=float)
    coef = np.asarray(params["coef"], dtype=float)
    if len(support) == 0:
        return np.full(len(X), params["bias"])
    K = rbf_kernel(X, params["gamma"], support)
    return K @ coef + params["bias"]
