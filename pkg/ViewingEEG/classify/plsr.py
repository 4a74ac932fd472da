"""
Single-response PLS regression (NIPALS) used as a +/-1 classifier.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ParameterError

# Relative size below which a new weight vector means the rank is exhausted.
_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PlsrModel:
    """
    Fitted PLS1 model.

    weights (W) and loadings (P) are p x a; y_loadings (q) has a entries.
    coef = W (P^T W)^-1 q, applied to column-centered inputs.
    """
    n_components: int
    weights: np.ndarray
    loadings: np.ndarray
    y_loadings: np.ndarray
    coef: np.ndarray
    x_mean: np.ndarray
    intercept: float
    threshold: float = 0.0


def _check_labels(y: np.ndarray):
    values = set(np.unique(y).tolist())
    if not values <= {-1, 1}:
        raise ParameterError(f"Labels must be +1/-1, got {sorted(values)}.")
    if len(values) < 2:
        raise ParameterError("Both classes must be present in the training labels.")


def plsr_fit(X, y, n_components: int) -> PlsrModel:
    """
    NIPALS extraction of `n_components` latent vectors.

    For one response the weight iteration converges in a single step:
    w = X_a^T y / |X_a^T y|, t = X_a w, p = X_a^T t / t^T t, then X_a is deflated.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ParameterError(f"X must be n x p with n = len(y); got X {X.shape} and {y.size} labels.")
    n, p = X.shape
    if n < 2:
        raise ParameterError("plsr_fit needs at least two samples.")
    _check_labels(y)
    if not 1 <= n_components <= min(n - 1, p):
        raise ParameterError(f"n_components must be in 1..{min(n - 1, p)}, got {n_components}.")

    x_mean = X.mean(axis=0)
    intercept = float(y.mean())
    Xa = X - x_mean
    yc = y - intercept

    W = np.empty((p, n_components))
    P = np.empty((p, n_components))
    q = np.empty(n_components)
    scale = None
    for a in range(n_components):
        w = Xa.T @ yc
        norm = np.linalg.norm(w)
        scale = norm if scale is None else scale
        if norm <= _RANK_TOL * max(scale, 1e-300):
            raise ParameterError(f"n_components={n_components} exceeds the achievable rank ({a}).")
        w /= norm
        t = Xa @ w
        tt = float(t @ t)
        if tt <= 0:
            raise ParameterError(f"n_components={n_components} exceeds the achievable rank ({a}).")
        P[:, a] = Xa.T @ t / tt
        q[a] = float(yc @ t) / tt
        W[:, a] = w
        Xa = Xa - np.outer(t, P[:, a])

    coef = W @ np.linalg.solve(P.T @ W, q)
    return PlsrModel(n_components=n_components, weights=W, loadings=P, y_loadings=q, coef=coef,
                     x_mean=x_mean, intercept=intercept)


def plsr_predict(model: PlsrModel, X) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (scores, labels); a score exactly at the threshold goes to +1."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.coef.size:
        raise ParameterError(f"Model expects {model.coef.size} features, got {X.shape[1]}.")
    scores = (X - model.x_mean) @ model.coef + model.intercept
    return scores, np.where(scores >= model.threshold, 1, -1)
