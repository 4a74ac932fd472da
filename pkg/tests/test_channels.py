import unittest

import numpy as np

from ViewingEEG.classify import ClassifierKind, SearchSettings, channel_combination_search, evaluate_combination
from ViewingEEG.classify.channels import RankBy
from ViewingEEG.errors import ParameterError
from ViewingEEG.features import FeatureDataset, FeatureKind

CHANNELS = ("Fz", "O2", "P3", "T5")
QUICK = SearchSettings(k_folds=3, max_components=2, sigma_scales=(1.0,), c_values=(1.0,))


def informative_o2(seed=0, n_per_class=20):
    """Four channels of two features; only O2 separates the classes."""
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.ones(n_per_class, dtype=int), -np.ones(n_per_class, dtype=int)])
    features = rng.normal(size=(len(CHANNELS), labels.size, 2))
    features[CHANNELS.index("O2"), :, 0] += 4.0 * labels
    train_idx = np.concatenate([np.arange(0, n_per_class, 2), np.arange(n_per_class, 2 * n_per_class, 2)])
    test_idx = np.setdiff1d(np.arange(labels.size), train_idx)
    return FeatureDataset(
        features=features, labels=labels, train_idx=train_idx, test_idx=test_idx, kind=FeatureKind.DWT,
        channels=CHANNELS, feature_names=("f0", "f1"), epoch_trials=np.zeros(labels.size, dtype=int),
        epoch_offsets=np.zeros(labels.size), subject_id="S09")


class TestChannelSearch(unittest.TestCase):

    def test_evaluate_combination(self):
        evaluation = evaluate_combination(informative_o2(), ("O2",), "plsr", QUICK)
        self.assertEqual(evaluation.test.total, 20)
        self.assertEqual(evaluation.test.accuracy, 1.0)
        self.assertEqual(evaluation.cv_accuracy, 1.0)

    def test_ranked_prefix(self):
        result = channel_combination_search(informative_o2(), "plsr", settings=QUICK)
        self.assertEqual(result.ranking[0].channels, ("O2",))
        self.assertEqual([len(c.channels) for c in result.combinations], [1, 2, 3, 4])
        self.assertEqual(result.combinations[0].channels, ("O2",))
        self.assertEqual(result.best.channels, ("O2",))
        data = result.to_dict()
        self.assertEqual(data["best_channels"], ["O2"])
        self.assertEqual(data["subject_id"], "S09")
        self.assertEqual(data["feature_kind"], "dwt")
        self.assertEqual(len(data["channel_ranking"]), 4)

    def test_rank_by_cv_and_prefix_cap(self):
        settings = SearchSettings(k_folds=3, max_components=2, rank_by=RankBy.CV, max_prefix=2)
        result = channel_combination_search(informative_o2(1), ClassifierKind.PLSR, settings=settings)
        self.assertEqual(result.ranking[0].channels, ("O2",))
        self.assertEqual(len(result.combinations), 2)

    def test_exhaustive_pairs(self):
        settings = SearchSettings(k_folds=3, max_components=2, exhaustive_k=2)
        result = channel_combination_search(informative_o2(), "plsr", "exhaustive-k", settings)
        self.assertEqual(len(result.combinations), 4 + 6)
        self.assertIn(("Fz", "O2"), [c.channels for c in result.combinations])
        self.assertIn("O2", result.best.channels)

    def test_also_evaluate(self):
        result = channel_combination_search(informative_o2(), "svm", settings=QUICK, also_evaluate=["plsr", "svm"])
        for combination in result.combinations + result.ranking:
            self.assertEqual(set(combination.evaluations), {ClassifierKind.SVM, ClassifierKind.PLSR})
        self.assertEqual(sorted(result.to_dict()["combinations"][0]["evaluations"]), ["plsr", "svm"])

    def test_bad_k(self):
        with self.assertRaises(ParameterError):
            channel_combination_search(informative_o2(), "plsr", "exhaustive-k", SearchSettings(exhaustive_k=5))
        with self.assertRaises(ParameterError):
            channel_combination_search(informative_o2().subset(["O2"]), "plsr", "exhaustive-k",
                                       SearchSettings(exhaustive_k=2))


if __name__ == '__main__':
    unittest.main()
