"""
Consolidates a results directory into a text summary and plot-data CSVs.
"""

import glob
import json
import os
from typing import Dict, List, Optional

import pandas as pd

from .errors import DataFileError
from .ingest import _read_json
from .paradigm import STANDARD_CHANNELS, standard_montage


class ResultsReport:
    """
    Reads what `bandselect` and `classify` wrote and renders it.

    Outputs:
        summary.txt                                aligned text tables
        band_difference_stage_<S>.csv              mean difference, lobe-grouped rows
        channel_accuracy_<kind>.csv                single-channel accuracy per subject and classifier
        combinations_<kind>_<classifier>.csv       ranked-combination metrics per evaluating classifier
        cohort_average.csv                         best-combination metrics averaged over subjects
    """

    def __init__(self, band_reports: Dict[str, dict], searches: List[dict], summary: Optional[dict] = None):
        self.band_reports = band_reports
        self.searches = searches
        self.summary = summary or {}
        self.montage = standard_montage()

    @classmethod
    def from_results_dir(cls, results_dir: str) -> "ResultsReport":
        """
        Loads every report under `results_dir`.

        Raises:
            DataFileError: The directory is missing or holds no results.
        """
        if not os.path.isdir(results_dir):
            raise DataFileError("Results directory not found", results_dir)
        band_reports = {}
        for path in sorted(glob.glob(os.path.join(results_dir, "bandselect", "stage_*", "report.json"))):
            data = _read_json(path)
            band_reports[str(data.get("stage", ""))] = data
        searches = [_read_json(path) for path in
                    sorted(glob.glob(os.path.join(results_dir, "classify", "*", "*.json")))]
        summary_path = os.path.join(results_dir, "classify", "summary.json")
        summary = _read_json(summary_path) if os.path.isfile(summary_path) else None
        if not band_reports and not searches:
            raise DataFileError("No band-selection or classification results found", results_dir)
        return cls(band_reports, searches, summary)

    @classmethod
    def from_json_text(cls, json_text: str) -> "ResultsReport":
        """Builds a report from the JSON of `to_dict`."""
        data = json.loads(json_text)
        return cls(data.get("band_reports", {}), data.get("searches", []), data.get("summary"))

    def to_dict(self) -> dict:
        return {"band_reports": self.band_reports, "searches": self.searches, "summary": self.summary}

    def _format_number(self, num, precision=4):
        """Fixed precision with trailing zeros trimmed; '-' for missing values."""
        if num is None:
            return "-"
        if isinstance(num, int) or float(num).is_integer():
            return str(int(num))
        return f"{float(num):.{precision}f}".rstrip("0").rstrip(".")

    def _lobe_order(self) -> List[str]:
        return [ch for members in self.montage.by_lobe().values() for ch in members]

    def band_difference_frame(self, stage: str) -> pd.DataFrame:
        report = self.band_reports[stage]
        rows = []
        for channel in self._lobe_order():
            values = report["mean_difference"].get(channel)
            if values is None:
                continue
            row = {"channel": channel, "lobe": self.montage.lobe(channel)}
            row.update(values)
            rows.append(row)
        return pd.DataFrame(rows)

    def channel_accuracy_frame(self, feature_kind: str) -> pd.DataFrame:
        rows = []
        for search in self.searches:
            if search["feature_kind"] != feature_kind:
                continue
            classifier = search["classifier"]
            for rank, entry in enumerate(search["channel_ranking"], 1):
                evaluation = entry["evaluations"][classifier]
                channel = entry["channels"][0]
                rows.append({
                    "subject_id": search["subject_id"],
                    "classifier": classifier,
                    "rank": rank,
                    "channel": channel,
                    "lobe": self.montage.lobe(channel) if channel in STANDARD_CHANNELS else "",
                    "test_accuracy": evaluation["test"]["accuracy"],
                    "cv_accuracy": evaluation["cv"]["best_accuracy"],
                })
        return pd.DataFrame(rows)

    def combination_frame(self, feature_kind: str, ranking_classifier: str) -> pd.DataFrame:
        rows = []
        for search in self.searches:
            if search["feature_kind"] != feature_kind or search["classifier"] != ranking_classifier:
                continue
            for index, combo in enumerate(search["combinations"]):
                for evaluator, evaluation in sorted(combo["evaluations"].items()):
                    test = evaluation["test"]
                    rows.append({
                        "subject_id": search["subject_id"],
                        "n_channels": len(combo["channels"]),
                        "channels": " ".join(combo["channels"]),
                        "evaluated_by": evaluator,
                        "accuracy": test["accuracy"],
                        "sensitivity": test["sensitivity"],
                        "specificity": test["specificity"],
                        "cv_accuracy": evaluation["cv"]["best_accuracy"],
                        "best": index == search["best_index"],
                    })
        return pd.DataFrame(rows)

    def cohort_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.summary.get("cohort", []))

    def to_text(self) -> str:
        lines = ["ViewingEEG results", "=================="]
        for stage in sorted(self.band_reports):
            report = self.band_reports[stage]
            selected = ", ".join(report.get("selected_bands", [])) or "none"
            lines.append("")
            lines.append(f"Stage {stage} (threshold {self._format_number(report['threshold'])} points, "
                         f"min {report['min_channels']} channels, {report['n_participants']} participants)")
            lines.append(f"  Dominant bands: {selected}")
            for band in report["bands"]:
                lines.append(f"  {band['band']:<6} {'*' if band['dominant'] else ' '} "
                             f"{len(band['channels']):>2} channels (+{band['n_positive']} / -{band['n_negative']})")
        if self.summary.get("results"):
            lines.append("")
            lines.append("Best channel combinations")
            header = f"  {'subject':<10}{'features':<10}{'classifier':<12}{'accuracy':>10}{'sens':>8}{'spec':>8}  channels"
            lines.append(header)
            for row in self.summary["results"]:
                test = row["best_test"]
                lines.append(
                    f"  {row['subject_id']:<10}{row['feature_kind']:<10}{row['classifier']:<12}"
                    f"{self._format_number(test['accuracy']):>10}{self._format_number(test['sensitivity']):>8}"
                    f"{self._format_number(test['specificity']):>8}  {' '.join(row['best_channels'])}")
        if self.summary.get("cohort"):
            lines.append("")
            lines.append("Cohort averages")
            for row in self.summary["cohort"]:
                lines.append(f"  {row['feature_kind']:<10}{row['classifier']:<12}"
                             f"{self._format_number(row['mean_test_accuracy']):>10} "
                             f"over {row['n_participants']} participant(s)")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str) -> List[str]:
        """Writes summary.txt and the plot-data CSVs; returns the written paths."""
        written = []
        try:
            os.makedirs(out_dir, exist_ok=True)
            summary_path = os.path.join(out_dir, "summary.txt")
            with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(self.to_text())
            written.append(summary_path)
            frames = {f"band_difference_stage_{stage}.csv": self.band_difference_frame(stage)
                      for stage in sorted(self.band_reports)}
            kinds = sorted({s["feature_kind"] for s in self.searches})
            for kind in kinds:
                frames[f"channel_accuracy_{kind}.csv"] = self.channel_accuracy_frame(kind)
                for classifier in sorted({s["classifier"] for s in self.searches if s["feature_kind"] == kind}):
                    frames[f"combinations_{kind}_{classifier}.csv"] = self.combination_frame(kind, classifier)
            if self.summary.get("cohort"):
                frames["cohort_average.csv"] = self.cohort_frame()
            for name, frame in frames.items():
                path = os.path.join(out_dir, name)
                frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
                written.append(path)
        except OSError as e:
            raise DataFileError(f"Cannot write report: {e.strerror or e}", out_dir) from e
        return written
