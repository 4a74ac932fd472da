import json
import os
import tempfile
import unittest

import pandas as pd

from ViewingEEG.errors import DataFileError
from ViewingEEG.paradigm import STANDARD_CHANNELS
from ViewingEEG.pipeline import write_json
from ViewingEEG.report import ResultsReport


def band_report():
    mean = {ch: {"Delta": 0.0, "Theta": 0.0, "Alpha": 0.0, "Beta": 0.0, "Gamma": 0.0} for ch in STANDARD_CHANNELS}
    mean["O2"]["Alpha"] = -5.0
    mean["P3"]["Delta"] = 4.0
    return {
        "stage": "III", "threshold": 2.0, "min_channels": 1, "aggregation": "mean", "n_participants": 1,
        "selected_bands": ["Delta", "Alpha"],
        "bands": [
            {"band": "Delta", "f_lo": 1.0, "f_hi": 4.0, "dominant": True, "n_positive": 1, "n_negative": 0,
             "channels": [{"channel": "P3", "difference": 4.0}]},
            {"band": "Alpha", "f_lo": 8.0, "f_hi": 12.0, "dominant": True, "n_positive": 0, "n_negative": 1,
             "channels": [{"channel": "O2", "difference": -5.0}]},
        ],
        "mean_difference": mean,
    }


def evaluation(accuracy, cv):
    return {"cv": {"best_accuracy": cv, "best_params": {"n_components": 1}},
            "test": {"tp": 0, "fp": 0, "fn": 0, "tn": 0, "accuracy": accuracy, "sensitivity": accuracy,
                     "specificity": None}}


def search():
    o2 = {"channels": ["O2"], "evaluations": {"plsr": evaluation(0.9, 0.95)}}
    fz = {"channels": ["Fz"], "evaluations": {"plsr": evaluation(0.5, 0.55)}}
    pair = {"channels": ["O2", "Fz"], "evaluations": {"plsr": evaluation(0.85, 0.95)}}
    return {"subject_id": "S01", "classifier": "plsr", "feature_kind": "dwt", "strategy": "ranked-prefix",
            "channel_ranking": [o2, fz], "combinations": [o2, pair], "best_index": 0, "best_channels": ["O2"]}


def summary():
    return {
        "dominant_bands": ["Delta", "Alpha"],
        "results": [{"subject_id": "S01", "feature_kind": "dwt", "classifier": "plsr", "best_channels": ["O2"],
                     "best_cv_accuracy": 0.95, "best_test": evaluation(0.9, 0.95)["test"],
                     "channel_ranking": ["O2", "Fz"]}],
        "cohort": [{"feature_kind": "dwt", "classifier": "plsr", "n_participants": 1, "mean_test_accuracy": 0.9,
                    "mean_sensitivity": 0.9, "mean_specificity": None, "mean_cv_accuracy": 0.95}],
    }


def results_dir(root):
    write_json(os.path.join(root, "bandselect", "stage_III", "report.json"), band_report())
    write_json(os.path.join(root, "classify", "S01", "dwt_plsr.json"), search())
    write_json(os.path.join(root, "classify", "summary.json"), summary())
    return root


class TestResultsReport(unittest.TestCase):

    def test_load_and_write(self):
        with tempfile.TemporaryDirectory() as tmp:
            report = ResultsReport.from_results_dir(results_dir(os.path.join(tmp, "results")))
            self.assertEqual(list(report.band_reports), ["III"])
            self.assertEqual(len(report.searches), 1)
            written = report.write(os.path.join(tmp, "report"))
            self.assertEqual(sorted(os.path.basename(p) for p in written),
                             ["band_difference_stage_III.csv", "channel_accuracy_dwt.csv", "cohort_average.csv",
                              "combinations_dwt_plsr.csv", "summary.txt"])
            with open(os.path.join(tmp, "report", "summary.txt"), "r", encoding="utf-8") as f:
                text = f.read()
            bands = pd.read_csv(os.path.join(tmp, "report", "band_difference_stage_III.csv"))
            combos = pd.read_csv(os.path.join(tmp, "report", "combinations_dwt_plsr.csv"))
        self.assertIn("Dominant bands: Delta, Alpha", text)
        self.assertIn("S01", text)
        self.assertEqual(list(bands.columns[:2]), ["channel", "lobe"])
        self.assertEqual(bands["channel"].iloc[0], "Fp1")
        self.assertEqual(len(bands), 20)
        self.assertEqual(bands.loc[bands["channel"] == "O2", "Alpha"].iloc[0], -5.0)
        self.assertEqual(list(combos["n_channels"]), [1, 2])
        self.assertEqual(list(combos["best"]), [True, False])

    def test_text_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = ResultsReport.from_results_dir(results_dir(tmp)).to_text()
            second = ResultsReport.from_results_dir(tmp).to_text()
        self.assertEqual(first, second)
        self.assertTrue(first.endswith("\n"))

    def test_json_round_trip(self):
        report = ResultsReport({"III": band_report()}, [search()], summary())
        again = ResultsReport.from_json_text(json.dumps(report.to_dict()))
        self.assertEqual(again.to_text(), report.to_text())
        frame = again.channel_accuracy_frame("dwt")
        self.assertEqual(list(frame["channel"]), ["O2", "Fz"])
        self.assertEqual(list(frame["lobe"]), ["occipital", "frontal"])

    def test_format_number(self):
        report = ResultsReport({}, [])
        self.assertEqual(report._format_number(None), "-")
        self.assertEqual(report._format_number(1.0), "1")
        self.assertEqual(report._format_number(0.84375), "0.8438")
        self.assertEqual(report._format_number(0.5), "0.5")

    def test_missing_results(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(DataFileError):
                ResultsReport.from_results_dir(tmp)
            with self.assertRaises(DataFileError):
                ResultsReport.from_results_dir(os.path.join(tmp, "absent"))


if __name__ == '__main__':
    unittest.main()
