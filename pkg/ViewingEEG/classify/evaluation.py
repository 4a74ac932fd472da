"""
sklearn-compatible wrappers around the PLSR and SVM solvers, stratified
K-fold grid search, and confusion-matrix metrics (TwoD is the positive class).
"""

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import FitFailedWarning
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import GridSearchCV, StratifiedKFold
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import StandardScaler

from ..errors import ParameterError
from ..paradigm import Condition
from .plsr import plsr_fit, plsr_predict
from .svm import svm_fit, svm_predict

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_SCALES = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
DEFAULT_C_VALUES = (0.1, 1.0, 10.0, 100.0)
DEFAULT_MAX_COMPONENTS = 10


class ClassifierKind(Enum):
    PLSR = "plsr"
    SVM = "svm"


class PlsrClassifier(BaseEstimator, ClassifierMixin):
    """PLS1 regression on +/-1 targets, thresholded at 0."""

    def __init__(self, n_components=1):
        self.n_components = n_components

    def fit(self, X, y):
        self.model_ = plsr_fit(X, y, self.n_components)
        self.classes_ = np.array([-1, 1])
        return self

    def decision_function(self, X):
        return plsr_predict(self.model_, X)[0]

    def predict(self, X):
        return plsr_predict(self.model_, X)[1]


class SvmClassifier(BaseEstimator, ClassifierMixin):
    """RBF soft-margin SVM solved by SMO."""

    def __init__(self, sigma=1.0, C=1.0, tol=1e-3, max_iter=100_000):
        self.sigma = sigma
        self.C = C
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        self.model_ = svm_fit(X, y, self.sigma, self.C, tol=self.tol, max_iter=self.max_iter)
        self.classes_ = np.array([-1, 1])
        return self

    def decision_function(self, X):
        return svm_predict(self.model_, X)[1]

    def predict(self, X):
        return svm_predict(self.model_, X)[0]


@dataclass(frozen=True)
class EvalReport:
    """Confusion counts with TwoD (+1) as positive. Ratios with a zero denominator are None."""
    tp: int
    fp: int
    fn: int
    tn: int
    positive_class: str = Condition.TWO_D.value

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> Optional[float]:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def sensitivity(self) -> Optional[float]:
        denominator = self.tp + self.fn
        return self.tp / denominator if denominator else None

    @property
    def specificity(self) -> Optional[float]:
        denominator = self.tn + self.fp
        return self.tn / denominator if denominator else None

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "positive_class": self.positive_class,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(tp=int(data["tp"]), fp=int(data["fp"]), fn=int(data["fn"]), tn=int(data["tn"]),
                   positive_class=data.get("positive_class", Condition.TWO_D.value))


@dataclass
class GridPoint:
    params: Dict[str, float]
    mean_accuracy: float
    fold_accuracies: List[float]

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "mean_accuracy": None if np.isnan(self.mean_accuracy) else round(float(self.mean_accuracy), 10),
            "fold_accuracies": [None if np.isnan(a) else round(float(a), 10) for a in self.fold_accuracies],
        }


@dataclass
class CvResult:
    """Grid scores of a stratified K-fold search on the training split."""
    kind: ClassifierKind
    k: int
    seed: int
    points: List[GridPoint]
    best_params: Dict[str, float]
    best_accuracy: float
    folds: List[np.ndarray] = field(default_factory=list)
    failed_points: List[Dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "seed": self.seed,
            "best_params": dict(self.best_params),
            "best_accuracy": round(float(self.best_accuracy), 10),
            "grid": [p.to_dict() for p in self.points],
            "n_failed_points": len(self.failed_points),
        }


def _as_labels(values) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, Condition):
            out.append(v.label)
        elif isinstance(v, str):
            try:
                out.append(Condition(v).label)
            except ValueError:
                raise ParameterError(f"Unknown class label '{v}'.") from None
        elif v in (1, -1):
            out.append(int(v))
        else:
            raise ParameterError(f"Class labels must be TwoD/ThreeD or +1/-1, got {v!r}.")
    return np.array(out, dtype=int)


def confusion_metrics(predicted, true) -> EvalReport:
    """
    Confusion counts of `predicted` against `true`.

    Labels may be Condition members, their string values, or +1/-1.
    """
    predicted = _as_labels(predicted)
    true = _as_labels(true)
    if predicted.size != true.size:
        raise ParameterError(f"Label length mismatch: {predicted.size} predicted vs {true.size} true.")
    if true.size == 0:
        return EvalReport(0, 0, 0, 0)
    (tp, fn), (fp, tn) = confusion_matrix(true, predicted, labels=[1, -1])
    return EvalReport(tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn))


def default_grid(kind: ClassifierKind, X, max_components: int = DEFAULT_MAX_COMPONENTS,
                 sigma_scales: Sequence[float] = DEFAULT_SIGMA_SCALES,
                 c_values: Sequence[float] = DEFAULT_C_VALUES) -> List[Dict[str, float]]:
    """
    Candidate hyperparameters, most preferred first.

    PLSR: n_components 1..min(max_components, p).
    SVM: sigma = scale x SD of all feature values, larger sigma first; C ascending within a sigma.
    """
    X = np.asarray(X, dtype=float)
    kind = ClassifierKind(kind)
    if kind is ClassifierKind.PLSR:
        return [{"n_components": a} for a in range(1, min(max_components, X.shape[1]) + 1)]
    spread = float(np.std(X))
    spread = spread if spread > 0 else 1.0
    sigmas = sorted((s * spread for s in sigma_scales), reverse=True)
    return [{"sigma": s, "C": float(c)} for s in sigmas for c in sorted(c_values)]


def build_estimator(kind: ClassifierKind, params: Optional[Dict[str, float]] = None,
                    standardize: bool = True) -> Pipeline:
    kind = ClassifierKind(kind)
    clf = PlsrClassifier() if kind is ClassifierKind.PLSR else SvmClassifier()
    steps = [("scale", StandardScaler())] if standardize else []
    pipeline = Pipeline(steps + [("clf", clf)])
    if params:
        pipeline.set_params(**{f"clf__{k}": v for k, v in params.items()})
    return pipeline


def stratified_folds(y, k: int = 10, seed: int = 0) -> List[np.ndarray]:
    """Held-out index sets of a shuffled stratified K-fold split."""
    y = np.asarray(y)
    _check_fold_sizes(y, k)
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [test for _, test in splitter.split(np.zeros((y.size, 1)), y)]


def _check_fold_sizes(y: np.ndarray, k: int):
    if k < 2:
        raise ParameterError(f"K must be >= 2, got {k}.")
    labels, counts = np.unique(y, return_counts=True)
    if labels.size < 2:
        raise ParameterError("Cross-validation needs both classes in the training data.")
    if counts.min() < k:
        raise ParameterError(f"Too few samples for {k} folds: smallest class has {counts.min()}.")


def _fit_failure_reasons(caught) -> List[str]:
    """Distinct exception lines quoted in sklearn's FitFailedWarning tracebacks."""
    reasons = []
    for w in caught:
        if not issubclass(w.category, FitFailedWarning):
            continue
        for line in str(w.message).splitlines():
            line = line.strip()
            if "Error: " in line and not line.startswith("File ") and line not in reasons:
                reasons.append(line)
    return reasons


def kfold_cv(X, y, kind, grid: Optional[List[Dict[str, float]]] = None, k: int = 10, seed: int = 0,
             standardize: bool = True, n_jobs: int = 1) -> CvResult:
    """
    Stratified K-fold grid search on training data.

    Grid points are scored by mean held-out accuracy. Ties keep the earlier
    (simpler) point of `grid`, which default_grid orders by preference.
    A point whose fit fails on any fold (rank exhausted, SMO cap) scores NaN,
    is logged with the solver error and listed in `failed_points`.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).ravel()
    kind = ClassifierKind(kind)
    _check_fold_sizes(y, k)
    if grid is None:
        scaled = StandardScaler().fit_transform(X) if standardize else X
        grid = default_grid(kind, scaled)
    if not grid:
        raise ParameterError("Hyperparameter grid is empty.")

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    search = GridSearchCV(
        build_estimator(kind, standardize=standardize),
        param_grid=[{f"clf__{name}": [value] for name, value in point.items()} for point in grid],
        scoring="accuracy",
        cv=splitter,
        refit=False,
        error_score=np.nan,
        n_jobs=n_jobs,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FitFailedWarning)
        try:
            search.fit(X, y)
        except ValueError as e:
            raise ParameterError(f"Every {kind.value} grid point failed to fit: {e}") from None
    reasons = _fit_failure_reasons(caught)

    results = search.cv_results_
    points, failed = [], []
    for index, point in enumerate(grid):
        folds = [float(results[f"split{f}_test_score"][index]) for f in range(k)]
        points.append(GridPoint(params=dict(point), mean_accuracy=float(results["mean_test_score"][index]),
                                fold_accuracies=folds))
        n_nan = int(np.isnan(folds).sum())
        if n_nan:
            failed.append(dict(point))
            logger.warning("%s grid point %s dropped: fit failed on %d of %d folds (%s)", kind.value, point,
                           n_nan, k, "; ".join(reasons) or "no detail")
    best = int(search.best_index_)
    return CvResult(
        kind=kind, k=k, seed=seed, points=points, best_params=dict(grid[best]),
        best_accuracy=points[best].mean_accuracy,
        folds=[test for _, test in splitter.split(X, y)],
        failed_points=failed,
    )


def fit_and_evaluate(kind, params: Dict[str, float], X_train, y_train, X_test, y_test,
                     standardize: bool = True) -> EvalReport:
    """Fits on the training split with `params` and scores the test split once."""
    estimator = build_estimator(kind, params, standardize).fit(X_train, y_train)
    return confusion_metrics(estimator.predict(X_test), y_test)
