import unittest

import numpy as np

from ViewingEEG.classify import ClassifierKind, EvalReport, confusion_metrics, kfold_cv, stratified_folds
from ViewingEEG.classify.evaluation import default_grid, fit_and_evaluate
from ViewingEEG.errors import ParameterError
from ViewingEEG.paradigm import Condition


class TestEvaluation(unittest.TestCase):

    def test_confusion_against_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            predicted = rng.choice([1, -1], size=n)
            true = rng.choice([1, -1], size=n)
            report = confusion_metrics(predicted, true)
            tp = sum(1 for p, t in zip(predicted, true) if p == 1 and t == 1)
            fp = sum(1 for p, t in zip(predicted, true) if p == 1 and t == -1)
            fn = sum(1 for p, t in zip(predicted, true) if p == -1 and t == 1)
            tn = n - tp - fp - fn
            self.assertEqual((report.tp, report.fp, report.fn, report.tn), (tp, fp, fn, tn))
            self.assertAlmostEqual(report.accuracy, (tp + tn) / n)

    def test_undefined_ratios(self):
        report = confusion_metrics([-1, -1, 1], [-1, -1, -1])
        self.assertIsNone(report.sensitivity)
        self.assertAlmostEqual(report.specificity, 2 / 3)
        empty = confusion_metrics([], [])
        self.assertEqual(empty.total, 0)
        self.assertIsNone(empty.accuracy)
        self.assertIsNone(empty.to_dict()["specificity"])

    def test_label_forms(self):
        report = confusion_metrics(["TwoD", "ThreeD", Condition.TWO_D], [1, -1, -1])
        self.assertEqual((report.tp, report.tn, report.fp), (1, 1, 1))
        with self.assertRaises(ParameterError):
            confusion_metrics(["TwoD", "FourD"], [1, 1])
        with self.assertRaises(ParameterError):
            confusion_metrics([0, 1], [1, 1])
        with self.assertRaises(ParameterError):
            confusion_metrics([1], [1, -1])

    def test_report_round_trip(self):
        report = EvalReport(tp=40, fp=3, fn=2, tn=37)
        self.assertEqual(EvalReport.from_dict(report.to_dict()), report)
        self.assertEqual(report.to_dict()["positive_class"], "TwoD")

    def test_stratified_folds(self):
        y = np.array([1] * 20 + [-1] * 20)
        folds = stratified_folds(y, k=10, seed=3)
        self.assertEqual(len(folds), 10)
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(40))
        for fold in folds:
            self.assertEqual(int(np.sum(y[fold] == 1)), 2)
        again = stratified_folds(y, k=10, seed=3)
        for a, b in zip(folds, again):
            np.testing.assert_array_equal(a, b)
        with self.assertRaises(ParameterError):
            stratified_folds(y, k=21)
        with self.assertRaises(ParameterError):
            stratified_folds(np.ones(30), k=3)

    def test_default_grid_order(self):
        X = np.random.default_rng(1).normal(size=(30, 3))
        self.assertEqual(default_grid(ClassifierKind.PLSR, X), [{"n_components": a} for a in (1, 2, 3)])
        grid = default_grid("svm", X, sigma_scales=(1.0, 2.0), c_values=(10.0, 1.0))
        spread = float(np.std(X))
        self.assertEqual(len(grid), 4)
        self.assertAlmostEqual(grid[0]["sigma"], 2.0 * spread)
        self.assertEqual([p["C"] for p in grid], [1.0, 10.0, 1.0, 10.0])

    def test_cv_ties_prefer_fewer_components(self):
        rng = np.random.default_rng(2)
        y = np.array([1] * 30 + [-1] * 30)
        X = rng.normal(scale=0.1, size=(60, 3)) + np.outer(y, [5.0, 5.0, 5.0])
        cv = kfold_cv(X, y, "plsr", k=5, seed=0)
        self.assertEqual(cv.best_params, {"n_components": 1})
        self.assertEqual(cv.best_accuracy, 1.0)
        self.assertEqual(len(cv.points), 3)
        self.assertEqual(len(cv.folds), 5)
        self.assertEqual(cv.to_dict()["grid"][0]["params"], {"n_components": 1})

    def test_cv_then_test(self):
        rng = np.random.default_rng(3)
        y = np.array([1] * 30 + [-1] * 30)
        X = rng.normal(size=(60, 2)) + np.outer(y, [2.5, 0.0])
        grid = [{"sigma": 2.0, "C": 1.0}, {"sigma": 1.0, "C": 10.0}]
        cv = kfold_cv(X, y, ClassifierKind.SVM, grid=grid, k=3, seed=1)
        self.assertIn(cv.best_params, grid)
        report = fit_and_evaluate("svm", cv.best_params, X, y, X, y)
        self.assertEqual(report.total, 60)
        self.assertGreaterEqual(report.accuracy, 0.9)
        with self.assertRaises(ParameterError):
            kfold_cv(X, y, "svm", grid=[], k=3)

    def test_failed_grid_points_are_logged(self):
        rng = np.random.default_rng(3)
        y = np.array([1] * 30 + [-1] * 30)
        X = rng.normal(size=(60, 2)) + np.outer(y, [2.5, 0.0])
        grid = [{"sigma": 1.0, "C": 1.0, "max_iter": 1}, {"sigma": 1.0, "C": 1.0}]
        with self.assertLogs("ViewingEEG.classify.evaluation", level="WARNING") as logs:
            cv = kfold_cv(X, y, "svm", grid=grid, k=3, seed=0)
        dropped = [line for line in logs.output if "dropped" in line]
        self.assertEqual(len(dropped), 1)
        self.assertIn("'max_iter': 1", dropped[0])
        self.assertIn("3 of 3 folds", dropped[0])
        self.assertIn("KKT residual", dropped[0])
        self.assertEqual(cv.failed_points, [grid[0]])
        self.assertEqual(cv.to_dict()["n_failed_points"], 1)
        self.assertTrue(np.isnan(cv.points[0].mean_accuracy))
        self.assertIsNone(cv.to_dict()["grid"][0]["mean_accuracy"])
        self.assertEqual(cv.best_params, grid[1])

    def test_clean_search_reports_no_failures(self):
        rng = np.random.default_rng(4)
        y = np.array([1] * 20 + [-1] * 20)
        X = rng.normal(size=(40, 2)) + np.outer(y, [1.0, 0.0])
        cv = kfold_cv(X, y, "svm", grid=[{"sigma": 1.0, "C": 10.0}], k=4, seed=0)
        self.assertEqual(cv.failed_points, [])
        self.assertEqual(cv.to_dict()["n_failed_points"], 0)

    def test_accuracy_is_class_weighted_mean(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(2, 40))
            true = rng.choice([1, -1], size=n)
            true[:2] = [1, -1]
            predicted = rng.choice([1, -1], size=n)
            report = confusion_metrics(predicted, true)
            positives, negatives = int(np.sum(true == 1)), int(np.sum(true == -1))
            weighted = (report.sensitivity * positives + report.specificity * negatives) / n
            self.assertAlmostEqual(report.accuracy, weighted, places=12)

    def test_label_swap_symmetry(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 40))
            true = rng.choice([1, -1], size=n)
            true[:2] = [1, -1]
            predicted = rng.choice([1, -1], size=n)
            report = confusion_metrics(predicted, true)
            swapped = confusion_metrics(-predicted, -true)
            self.assertEqual(swapped.sensitivity, report.specificity)
            self.assertEqual(swapped.specificity, report.sensitivity)
            self.assertEqual(swapped.accuracy, report.accuracy)

    def test_worked_confusion_examples(self):
        report = EvalReport(tp=3, fp=1, fn=2, tn=4)
        self.assertAlmostEqual(report.accuracy, 0.7)
        self.assertAlmostEqual(report.sensitivity, 0.6)
        self.assertAlmostEqual(report.specificity, 0.8)
        all_twod = confusion_metrics([1] * 10, [1] * 5 + [-1] * 5)
        self.assertEqual((all_twod.sensitivity, all_twod.specificity, all_twod.accuracy), (1.0, 0.0, 0.5))

    def test_training_split_folds(self):
        y = np.array([1] * 83 + [-1] * 83)
        folds = stratified_folds(y, k=10, seed=0)
        self.assertEqual(sorted({len(f) for f in folds}), [16, 17])
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(166))
        for fold in folds:
            self.assertIn(int(np.sum(y[fold] == 1)), (8, 9))


if __name__ == '__main__':
    unittest.main()
