"""
Soft-margin RBF support vector machine trained by SMO on the dual problem.

Working pairs are chosen as the maximal violating pair; the clamped pair
update and the bias follow the usual LIBSVM conventions.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from sklearn.metrics.pairwise import rbf_kernel as _pairwise_rbf

from ..errors import ConvergenceError, ParameterError

logger = logging.getLogger(__name__)

_TAU = 1e-12


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Support vectors with dual coefficients alpha_i * y_i, bias b and the (sigma, C) it was trained with."""
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    alphas: np.ndarray
    support_labels: np.ndarray
    bias: float
    sigma: float
    C: float
    n_iter: int = 0
    kkt_gap: float = 0.0


def rbf_kernel(x, y, sigma: float) -> float:
    """exp(-|x - y|^2 / (2 sigma^2))."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}.")
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ParameterError(f"Kernel arguments differ in dimension: {x.size} vs {y.size}.")
    diff = x - y
    return float(np.exp(-(diff @ diff) / (2.0 * sigma ** 2)))


def rbf_gram(A, B, sigma: float) -> np.ndarray:
    """Kernel matrix K[i, j] = rbf_kernel(A[i], B[j], sigma)."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}.")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    return _pairwise_rbf(A, B, gamma=1.0 / (2.0 * sigma ** 2))


def svm_fit(X, y, sigma: float, C: float, tol: float = 1e-3, max_iter: int = 100_000) -> SvmModel:
    """
    Solves max sum(a) - 1/2 a^T Q a, 0 <= a <= C, y^T a = 0, with Q = (y y^T) * K.

    Stops once the maximal KKT violation m(a) - M(a) drops below `tol`.

    Raises:
        ConvergenceError: `max_iter` pair updates did not reach `tol`.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ParameterError(f"X must be n x p with n = len(y); got X {X.shape} and {y.size} labels.")
    if not set(np.unique(y).tolist()) == {-1.0, 1.0}:
        raise ParameterError("svm_fit needs +1/-1 labels with both classes present.")
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}.")
    if not C > 0:
        raise ParameterError(f"C must be > 0, got {C}.")

    K = rbf_gram(X, X, sigma)
    Q = np.outer(y, y) * K
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)
    gap = np.inf

    for it in range(max_iter):
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = up_idx[np.argmax(minus_yg[up_idx])]
        j = low_idx[np.argmin(minus_yg[low_idx])]
        gap = minus_yg[i] - minus_yg[j]
        if gap < tol:
            break

        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], _TAU)
        old_i, old_j = alpha[i], alpha[j]
        _update_pair(alpha, i, j, y[i] != y[j], grad[i], grad[j], eta, C)
        grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
    else:
        raise ConvergenceError("SMO did not converge", residual=float(gap), n_iter=max_iter)

    alpha[alpha < _TAU * C] = 0.0
    alpha[alpha > C * (1.0 - _TAU)] = C
    bias = -_rho(alpha, y, grad, C)
    support = np.flatnonzero(alpha > 0)
    logger.debug("SMO converged in %d iterations, %d support vectors, gap %.2e", it, support.size, gap)
    return SvmModel(
        support_vectors=X[support],
        dual_coef=alpha[support] * y[support],
        alphas=alpha[support],
        support_labels=y[support].astype(int),
        bias=float(bias),
        sigma=float(sigma),
        C=float(C),
        n_iter=it,
        kkt_gap=float(gap),
    )


def _update_pair(alpha: np.ndarray, i: int, j: int, opposite: bool, g_i: float, g_j: float, eta: float,
                 C: float):
    """
    Unclipped step along the pair, then clamped so that any alpha leaving [0, C]
    lands exactly on the bound and its partner keeps y^T a unchanged.
    """
    if opposite:
        delta = (-g_i - g_j) / eta
        diff = alpha[i] - alpha[j]
        alpha[i] += delta
        alpha[j] += delta
        if diff > 0:
            if alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, diff
        elif alpha[i] < 0:
            alpha[i], alpha[j] = 0.0, -diff
        if diff > 0:
            if alpha[i] > C:
                alpha[i], alpha[j] = C, C - diff
        elif alpha[j] > C:
            alpha[j], alpha[i] = C, C + diff
    else:
        delta = (g_i - g_j) / eta
        total = alpha[i] + alpha[j]
        alpha[i] -= delta
        alpha[j] += delta
        if total > C:
            if alpha[i] > C:
                alpha[i], alpha[j] = C, total - C
        elif alpha[j] < 0:
            alpha[j], alpha[i] = 0.0, total
        if total > C:
            if alpha[j] > C:
                alpha[j], alpha[i] = C, total - C
        elif alpha[i] < 0:
            alpha[i], alpha[j] = 0.0, total


def _rho(alpha: np.ndarray, y: np.ndarray, grad: np.ndarray, C: float) -> float:
    """Mean of y*G over free vectors, else the midpoint of the feasible interval."""
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].mean())
    at_upper = alpha >= C
    at_lower = alpha <= 0
    ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    if not np.isfinite(ub):
        return float(lb)
    if not np.isfinite(lb):
        return float(ub)
    return float((ub + lb) / 2.0)


def svm_decision(model: SvmModel, X) -> np.ndarray:
    """f(x) = sum_i alpha_i y_i K(s_i, x) + b."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, model.support_vectors.shape[1])
    if X.shape[1] != model.support_vectors.shape[1]:
        raise ParameterError(f"Model expects {model.support_vectors.shape[1]} features, got {X.shape[1]}.")
    if X.shape[0] == 0:
        return np.zeros(0)
    return rbf_gram(X, model.support_vectors, model.sigma) @ model.dual_coef + model.bias


def svm_predict(model: SvmModel, X) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (labels, decision values); f = 0 goes to +1."""
    decision = svm_decision(model, X)
    return np.where(decision >= 0, 1, -1), decision
