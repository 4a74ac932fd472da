"""
On-disk format for recordings and cohorts.

A session is a directory holding `manifest.json` plus one CSV per trial
(header row of channel labels, one column per channel, microvolts). A cohort
is a `cohort.json` index pointing at the TwoD and ThreeD session manifests of
each participant.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import DataFileError, StructuralError
from .paradigm import (
    Condition,
    DEFAULT_SAMPLE_RATE,
    Montage,
    ParadigmSpec,
    Recording,
    Trial,
    standard_montage,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
COHORT_NAME = "cohort.json"
DEFAULT_ARTIFACT_THRESHOLD_UV = 100.0


@dataclass
class SessionManifest:
    """JSON description of one session directory."""
    subject_id: str
    condition: Condition
    sample_rate: int
    paradigm: ParadigmSpec
    channel_order: List[str]
    trial_files: List[str]
    units: str = "uV"

    def check(self, path: Optional[str] = None):
        """Raises DataFileError when the manifest breaks its own invariants."""
        expected = set(standard_montage().channels)
        if len(self.channel_order) != len(expected) or set(self.channel_order) != expected:
            raise DataFileError(
                f"channel_order must be a permutation of the 20 standard channels, got {self.channel_order}",
                path)
        if len(self.trial_files) != self.paradigm.trials_per_condition:
            raise DataFileError(
                f"Manifest lists {len(self.trial_files)} trial files but trials_per_condition is "
                f"{self.paradigm.trials_per_condition}", path)
        if self.units != "uV":
            raise DataFileError(f"Samples must be stored in microvolts ('uV'), manifest says '{self.units}'", path)

    def to_dict(self) -> dict:
        return {
            "subject_id": self.subject_id,
            "condition": self.condition.value,
            "sample_rate": self.sample_rate,
            "paradigm": self.paradigm.to_dict(),
            "channel_order": list(self.channel_order),
            "trial_files": list(self.trial_files),
            "units": self.units,
        }

    @classmethod
    def from_dict(cls, data: dict, path: Optional[str] = None) -> "SessionManifest":
        try:
            return cls(
                subject_id=str(data["subject_id"]),
                condition=Condition(data["condition"]),
                sample_rate=int(data.get("sample_rate", DEFAULT_SAMPLE_RATE)),
                paradigm=ParadigmSpec.from_dict(data.get("paradigm", {})),
                channel_order=[str(c) for c in data["channel_order"]],
                trial_files=[str(f) for f in data["trial_files"]],
                units=str(data.get("units", "uV")),
            )
        except KeyError as e:
            raise DataFileError(f"Manifest is missing the field {e}", path) from None
        except (TypeError, ValueError) as e:
            raise DataFileError(f"Manifest has an invalid value: {e}", path) from None

    @classmethod
    def from_json_file(cls, filepath: str, encoding: str = "utf-8") -> "SessionManifest":
        data = _read_json(filepath, encoding)
        manifest = cls.from_dict(data, filepath)
        manifest.check(filepath)
        return manifest


@dataclass
class ValidationReport:
    """Findings of `validate`. An empty `errors` list means the recording is loadable."""
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    artifact_counts: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "errors": list(self.errors),
            "warnings": list(self.warnings),
            "artifact_counts": list(self.artifact_counts),
        }


@dataclass(eq=False)
class Participant:
    """A subject with one recording per condition."""
    subject_id: str
    recordings: Dict[Condition, Recording]

    def recording(self, condition: Condition) -> Recording:
        if condition not in self.recordings:
            raise StructuralError(f"Participant '{self.subject_id}' has no {condition.value} recording.")
        return self.recordings[condition]


def _read_json(filepath: str, encoding: str = "utf-8") -> dict:
    if not os.path.isfile(filepath):
        raise DataFileError("File not found", filepath)
    try:
        with open(filepath, "r", encoding=encoding) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataFileError(f"Error decoding JSON: {e}", filepath) from None
    except OSError as e:
        raise DataFileError(f"Cannot read file: {e}", filepath) from e


def _read_trial_csv(filepath: str, manifest: SessionManifest) -> np.ndarray:
    """Reads one trial file and returns it channels x time in the file's column order."""
    if not os.path.isfile(filepath):
        raise DataFileError("Trial file not found", filepath)
    try:
        frame = pd.read_csv(filepath, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFileError(f"Cannot parse trial CSV: {e}", filepath) from None

    columns = [str(c) for c in frame.columns]
    if len(columns) != len(manifest.channel_order):
        raise DataFileError(
            f"Channel-count mismatch: expected {len(manifest.channel_order)} channels, found {len(columns)}",
            filepath)
    if columns != list(manifest.channel_order):
        raise DataFileError(
            f"Header {columns} does not match manifest channel_order {manifest.channel_order}", filepath)

    expected = manifest.paradigm.total_samples(manifest.sample_rate)
    if len(frame) != expected:
        raise DataFileError(f"Sample-count mismatch: expected {expected} samples, found {len(frame)}", filepath)

    numeric = frame.apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(numeric)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DataFileError("Non-finite or non-numeric sample", filepath, (int(row) + 2, columns[col]))
    return numeric.T


def load_recording(manifest_path: str) -> Recording:
    """
    Loads a session directory described by a manifest.

    Channel rows come back in standard montage order whatever order the
    files store them in.

    Args:
        manifest_path (str): Path to `manifest.json`, or to the directory holding it.

    Returns:
        Recording: The validated recording.
    """
    if os.path.isdir(manifest_path):
        manifest_path = os.path.join(manifest_path, MANIFEST_NAME)
    manifest = SessionManifest.from_json_file(manifest_path)
    base_dir = os.path.dirname(os.path.abspath(manifest_path))
    montage = standard_montage()
    order = [manifest.channel_order.index(label) for label in montage.channels]

    trials = []
    for name in manifest.trial_files:
        samples = _read_trial_csv(os.path.join(base_dir, name), manifest)
        trials.append(Trial(samples=samples[order], paradigm=manifest.paradigm, sample_rate=manifest.sample_rate))
    logger.info("Loaded %s/%s: %d trials", manifest.subject_id, manifest.condition.value, len(trials))
    return Recording(
        subject_id=manifest.subject_id,
        condition=manifest.condition,
        trials=tuple(trials),
        sample_rate=manifest.sample_rate,
        montage=montage,
        paradigm=manifest.paradigm,
    )


def save_recording(recording: Recording, dir_path: str,
                   channel_order: Optional[Sequence[str]] = None) -> SessionManifest:
    """
    Writes `manifest.json` and one CSV per trial into `dir_path`.

    Args:
        recording (Recording): The recording to persist.
        dir_path (str): Target directory, created if missing.
        channel_order (Sequence[str], optional): Column order of the trial files.
            Defaults to the recording's montage order.

    Returns:
        SessionManifest: The manifest that was written.
    """
    montage = recording.montage
    columns = list(channel_order) if channel_order is not None else list(montage.channels)
    rows = [montage.index(label) for label in columns]
    width = max(2, len(str(len(recording.trials))))
    trial_files = [f"trial_{i + 1:0{width}d}.csv" for i in range(len(recording.trials))]
    manifest = SessionManifest(
        subject_id=recording.subject_id,
        condition=recording.condition,
        sample_rate=int(recording.sample_rate),
        paradigm=recording.paradigm,
        channel_order=columns,
        trial_files=trial_files,
    )
    manifest.check()

    manifest_path = os.path.join(dir_path, MANIFEST_NAME)
    try:
        os.makedirs(dir_path, exist_ok=True)
        for trial, name in zip(recording.trials, trial_files):
            frame = pd.DataFrame(trial.samples[rows].T, columns=columns)
            frame.to_csv(os.path.join(dir_path, name), index=False, lineterminator="\n")
        with open(manifest_path, "w", encoding="utf-8") as f:
            json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise DataFileError(f"Cannot write session: {e.strerror or e}", getattr(e, "filename", None) or dir_path) from e
    logger.info("Saved %s/%s to %s", recording.subject_id, recording.condition.value, dir_path)
    return manifest


def validate(recording: Recording, artifact_threshold_uv: float = DEFAULT_ARTIFACT_THRESHOLD_UV) -> ValidationReport:
    """
    Checks structural invariants and flags artifact samples.

    A sample is an artifact when its absolute amplitude exceeds
    `artifact_threshold_uv`. Artifacts are reported, never removed.
    """
    report = ValidationReport()
    montage = recording.montage
    paradigm = recording.paradigm
    expected_cols = paradigm.total_samples(recording.sample_rate)

    if len(montage.channels) != 20:
        report.errors.append(f"Montage has {len(montage.channels)} channels, expected 20.")
    if len(recording.trials) != paradigm.trials_per_condition:
        report.errors.append(
            f"Recording has {len(recording.trials)} trials, paradigm expects {paradigm.trials_per_condition}.")

    for i, trial in enumerate(recording.trials):
        samples = trial.samples
        if samples.shape[0] != len(montage.channels):
            report.errors.append(f"Trial {i}: {samples.shape[0]} channel rows, expected {len(montage.channels)}.")
        if samples.shape[1] != expected_cols:
            report.errors.append(f"Trial {i}: {samples.shape[1]} samples, expected {expected_cols}.")
        finite = np.isfinite(samples)
        if not finite.all():
            row, col = np.argwhere(~finite)[0]
            report.errors.append(f"Trial {i}: non-finite sample at row {row}, column {col}.")
        count = int(np.count_nonzero(np.abs(samples[finite]) > artifact_threshold_uv))
        report.artifact_counts.append(count)
        if count:
            report.warnings.append(f"Trial {i}: {count} samples exceed {artifact_threshold_uv:g} uV.")
    return report


def save_cohort(participants: Sequence[Participant], out_dir: str) -> str:
    """Saves every participant's sessions under `out_dir/<subject>/<condition>/` and writes the cohort index."""
    entries = []
    for participant in participants:
        entry = {"subject_id": participant.subject_id}
        for condition, recording in sorted(participant.recordings.items(), key=lambda kv: kv[0].value):
            relative = os.path.join(participant.subject_id, condition.value)
            save_recording(recording, os.path.join(out_dir, relative))
            entry[condition.value] = os.path.join(relative, MANIFEST_NAME).replace(os.sep, "/")
        entries.append(entry)
    path = os.path.join(out_dir, COHORT_NAME)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"participants": entries}, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise DataFileError(f"Cannot write cohort index: {e.strerror or e}", path) from e
    return path


def load_cohort(path: str) -> List[Participant]:
    """Loads every recording listed in a cohort index."""
    data = _read_json(path)
    base_dir = os.path.dirname(os.path.abspath(path))
    entries = data.get("participants")
    if not isinstance(entries, list) or not entries:
        raise DataFileError("Cohort index lists no participants", path)
    participants = []
    for entry in entries:
        recordings = {}
        for condition in Condition:
            if condition.value in entry:
                recordings[condition] = load_recording(os.path.join(base_dir, entry[condition.value]))
        participants.append(Participant(subject_id=str(entry.get("subject_id", "")), recordings=recordings))
    return participants


def load_inputs(path: str) -> List[Participant]:
    """
    Resolves a cohort index, a directory holding one, or a single session manifest.

    A single manifest yields one participant with one recording.
    """
    if os.path.isdir(path):
        cohort = os.path.join(path, COHORT_NAME)
        if os.path.isfile(cohort):
            return load_cohort(cohort)
        path = os.path.join(path, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DataFileError("Input not found", path)
    if os.path.basename(path) == COHORT_NAME or "participants" in _read_json(path):
        return load_cohort(path)
    recording = load_recording(path)
    return [Participant(subject_id=recording.subject_id, recordings={recording.condition: recording})]


def session_paths(path: str) -> List[str]:
    """Manifest paths referenced by an input, without loading trial data."""
    if os.path.isdir(path):
        cohort = os.path.join(path, COHORT_NAME)
        path = cohort if os.path.isfile(cohort) else os.path.join(path, MANIFEST_NAME)
    data = _read_json(path)
    if "participants" not in data:
        return [path]
    base_dir = os.path.dirname(os.path.abspath(path))
    return [os.path.join(base_dir, entry[c.value])
            for entry in data["participants"] for c in Condition if c.value in entry]
