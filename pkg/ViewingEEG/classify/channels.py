"""
Per-channel classification and channel-combination search.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from sklearn.preprocessing import StandardScaler

from ..errors import ParameterError
from ..features import FeatureDataset
from .evaluation import (
    ClassifierKind,
    CvResult,
    DEFAULT_C_VALUES,
    DEFAULT_MAX_COMPONENTS,
    DEFAULT_SIGMA_SCALES,
    EvalReport,
    default_grid,
    fit_and_evaluate,
    kfold_cv,
)

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_K = 4


class SearchStrategy(Enum):
    RANKED_PREFIX = "ranked-prefix"
    EXHAUSTIVE_K = "exhaustive-k"


class RankBy(Enum):
    TEST = "test"
    CV = "cv"


@dataclass(frozen=True)
class SearchSettings:
    k_folds: int = 10
    cv_seed: int = 0
    standardize: bool = True
    n_jobs: int = 1
    rank_by: RankBy = RankBy.TEST
    exhaustive_k: int = 2
    # None evaluates every prefix.
    max_prefix: Optional[int] = None
    max_components: int = DEFAULT_MAX_COMPONENTS
    sigma_scales: Tuple[float, ...] = DEFAULT_SIGMA_SCALES
    c_values: Tuple[float, ...] = DEFAULT_C_VALUES


@dataclass
class Evaluation:
    """CV choice on the training split plus the one-time test-split report."""
    cv: CvResult
    test: EvalReport

    @property
    def cv_accuracy(self) -> float:
        return self.cv.best_accuracy

    def to_dict(self) -> dict:
        return {"cv": self.cv.to_dict(), "test": self.test.to_dict()}


@dataclass
class CombinationResult:
    channels: Tuple[str, ...]
    evaluations: Dict[ClassifierKind, Evaluation] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "channels": list(self.channels),
            "evaluations": {kind.value: ev.to_dict() for kind, ev in sorted(
                self.evaluations.items(), key=lambda kv: kv[0].value)},
        }


@dataclass
class ChannelSearchResult:
    """Single-channel ranking and evaluated combinations, all scored with `kind` first."""
    kind: ClassifierKind
    strategy: SearchStrategy
    feature_kind: str
    subject_id: str
    ranking: List[CombinationResult]
    combinations: List[CombinationResult]
    best_index: int

    @property
    def best(self) -> CombinationResult:
        return self.combinations[self.best_index]

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "classifier": self.kind.value,
            "feature_kind": self.feature_kind,
            "strategy": self.strategy.value,
            "channel_ranking": [r.to_dict() for r in self.ranking],
            "combinations": [c.to_dict() for c in self.combinations],
            "best_index": self.best_index,
            "best_channels": list(self.best.channels),
        }


def evaluate_combination(dataset: FeatureDataset, channels: Sequence[str], kind,
                         settings: SearchSettings = SearchSettings()) -> Evaluation:
    """Grid-searches `kind` on the training split of the concatenated channel features, then tests once."""
    kind = ClassifierKind(kind)
    X = dataset.combined(channels)
    X_train, y_train = X[dataset.train_idx], dataset.labels[dataset.train_idx]
    X_test, y_test = X[dataset.test_idx], dataset.labels[dataset.test_idx]
    basis = StandardScaler().fit_transform(X_train) if settings.standardize else X_train
    grid = default_grid(kind, basis, settings.max_components, settings.sigma_scales, settings.c_values)
    cv = kfold_cv(X_train, y_train, kind, grid=grid, k=settings.k_folds, seed=settings.cv_seed,
                  standardize=settings.standardize)
    test = fit_and_evaluate(kind, cv.best_params, X_train, y_train, X_test, y_test, settings.standardize)
    return Evaluation(cv=cv, test=test)


def _evaluate_all(dataset, combos, kinds, settings) -> List[CombinationResult]:
    jobs = [(combo, kind) for combo in combos for kind in kinds]
    results = Parallel(n_jobs=settings.n_jobs)(
        delayed(evaluate_combination)(dataset, combo, kind, settings) for combo, kind in jobs)
    by_combo = {}
    for (combo, kind), evaluation in zip(jobs, results):
        by_combo.setdefault(combo, CombinationResult(channels=combo)).evaluations[kind] = evaluation
    return [by_combo[combo] for combo in combos]


def _rank_key(result: CombinationResult, kind: ClassifierKind, rank_by: RankBy):
    ev = result.evaluations[kind]
    test_acc = ev.test.accuracy or 0.0
    if rank_by is RankBy.TEST:
        return -test_acc, -ev.cv_accuracy
    return -ev.cv_accuracy, -test_acc


def channel_combination_search(dataset: FeatureDataset, kind, strategy=SearchStrategy.RANKED_PREFIX,
                               settings: Optional[SearchSettings] = None,
                               also_evaluate: Sequence = ()) -> ChannelSearchResult:
    """
    Ranks channels by single-channel accuracy and evaluates channel combinations.

    ranked-prefix: combinations are the top-1, top-2, ... prefixes of the ranking.
    exhaustive-k: every combination of 1..k channels.

    The best combination has the highest CV accuracy (fewer channels on ties).
    `also_evaluate` classifiers are scored on the same combinations.
    """
    settings = settings or SearchSettings()
    kind = ClassifierKind(kind)
    strategy = SearchStrategy(strategy)
    kinds = [kind] + [k for k in (ClassifierKind(x) for x in also_evaluate) if k is not kind]
    channels = tuple(dataset.channels)
    if not channels:
        raise ParameterError("channel_combination_search needs at least one channel.")
    if strategy is SearchStrategy.EXHAUSTIVE_K:
        if not 1 <= settings.exhaustive_k <= MAX_EXHAUSTIVE_K:
            raise ParameterError(f"exhaustive-k supports k in 1..{MAX_EXHAUSTIVE_K}, got {settings.exhaustive_k}.")
        if settings.exhaustive_k > len(channels):
            raise ParameterError(f"k={settings.exhaustive_k} exceeds the {len(channels)} available channels.")

    singles = _evaluate_all(dataset, [(c,) for c in channels], kinds, settings)
    ranking = sorted(singles, key=lambda r: _rank_key(r, kind, settings.rank_by))
    for position, result in enumerate(ranking, 1):
        ev = result.evaluations[kind]
        logger.info("%s %s rank %d: %s test %.3f cv %.3f", dataset.subject_id, kind.value, position,
                    result.channels[0], ev.test.accuracy or 0.0, ev.cv_accuracy)

    if strategy is SearchStrategy.RANKED_PREFIX:
        order = [r.channels[0] for r in ranking]
        depth = len(order) if settings.max_prefix is None else min(settings.max_prefix, len(order))
        combos = [tuple(order[:m]) for m in range(1, depth + 1)]
    else:
        combos = [combo for size in range(1, settings.exhaustive_k + 1)
                  for combo in itertools.combinations(channels, size)]
    known = {r.channels: r for r in singles}
    pending = [c for c in combos if c not in known]
    known.update({r.channels: r for r in _evaluate_all(dataset, pending, kinds, settings)})
    combinations = [known[c] for c in combos]

    best_index = min(range(len(combinations)),
                     key=lambda i: (-combinations[i].evaluations[kind].cv_accuracy, len(combinations[i].channels), i))
    return ChannelSearchResult(kind=kind, strategy=strategy, feature_kind=dataset.kind.value,
                               subject_id=dataset.subject_id, ranking=ranking, combinations=combinations,
                               best_index=best_index)
