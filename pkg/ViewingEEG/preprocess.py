"""
Artifact screening, trial averaging, 50 Hz notch and zero-phase Butterworth band-pass.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.signal import butter, iirnotch, sosfilt, sosfiltfilt, tf2sos

from .errors import ParameterError, StructuralError
from .ingest import validate
from .paradigm import DEFAULT_SAMPLE_RATE, Recording, StageSegment, Trial

logger = logging.getLogger(__name__)


class FilterKind(Enum):
    BANDPASS = "bandpass"
    NOTCH = "notch"


@dataclass(frozen=True)
class FilterSpec:
    """
    A zero-phase IIR filter. Bandpass uses (order, f_lo, f_hi); notch uses (f0, q).

    Forward-backward application squares the magnitude response and cancels phase.
    Edges are padded by even (mirror) extension of 3x the transfer-function length.
    """
    kind: FilterKind
    sample_rate: int = DEFAULT_SAMPLE_RATE
    order: int = 3
    f_lo: float = 1.0
    f_hi: float = 55.0
    f0: float = 50.0
    q: float = 35.0
    zero_phase: bool = True

    def __post_init__(self):
        nyquist = self.sample_rate / 2.0
        if self.kind is FilterKind.BANDPASS:
            if self.order < 1:
                raise ParameterError(f"Filter order must be >= 1, got {self.order}.")
            if not 0 < self.f_lo < self.f_hi:
                raise ParameterError(f"Band-pass needs 0 < f_lo < f_hi, got ({self.f_lo}, {self.f_hi}).")
            if self.f_hi >= nyquist:
                raise ParameterError(
                    f"Band-pass cutoff {self.f_hi} Hz is not below Nyquist ({nyquist} Hz at {self.sample_rate} Hz).")
        else:
            if self.sample_rate <= 2 * self.f0:
                raise ParameterError(
                    f"A {self.f0:g} Hz notch needs sample_rate > {2 * self.f0:g} Hz, got {self.sample_rate}.")
            if self.q <= 0:
                raise ParameterError(f"Notch quality factor must be > 0, got {self.q}.")

    def sos(self) -> np.ndarray:
        """Second-order sections of the single-pass filter."""
        if self.kind is FilterKind.BANDPASS:
            return butter(self.order, [self.f_lo, self.f_hi], btype="bandpass", fs=self.sample_rate, output="sos")
        b, a = iirnotch(self.f0, self.q, fs=self.sample_rate)
        return tf2sos(b, a)

    def apply(self, data: np.ndarray, axis: int = -1) -> np.ndarray:
        sos = self.sos()
        data = np.asarray(data, dtype=float)
        padlen = 3 * (2 * sos.shape[0] + 1)
        if data.shape[axis] <= padlen:
            raise ParameterError(f"Signal of {data.shape[axis]} samples is too short for {self.kind.value} filtering.")
        if not self.zero_phase:
            return sosfilt(sos, data, axis=axis)
        return sosfiltfilt(sos, data, axis=axis, padtype="even", padlen=padlen)


@dataclass(frozen=True)
class PreprocessSettings:
    """Knobs of the two preprocessing chains."""
    notch_f0: float = 50.0
    notch_q: float = 35.0
    order: int = 3
    band_selection_range: tuple = (1.0, 55.0)
    classification_range: tuple = (1.0, 35.0)
    artifact_threshold_uv: float = 100.0
    # None keeps every trial; otherwise drop trials whose artifact share exceeds it.
    max_artifact_fraction: Optional[float] = None
    notch_first: bool = False


def notch_50(signal, sample_rate: int = DEFAULT_SAMPLE_RATE, q: float = 35.0) -> np.ndarray:
    """Zero-phase 50 Hz notch along the last axis."""
    if sample_rate <= 100:
        raise ParameterError(f"The 50 Hz notch needs sample_rate > 100 Hz, got {sample_rate}.")
    return FilterSpec(FilterKind.NOTCH, sample_rate=sample_rate, f0=50.0, q=q).apply(signal)


def butter_bandpass_zero_phase(signal, f_lo: float, f_hi: float, order: int = 3,
                               sample_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Forward-backward Butterworth band-pass along the last axis."""
    spec = FilterSpec(FilterKind.BANDPASS, sample_rate=sample_rate, order=order, f_lo=f_lo, f_hi=f_hi)
    return spec.apply(signal)


def average_trials(trials: Sequence[Trial]) -> Trial:
    """Element-wise mean of equally shaped trials."""
    trials = list(trials)
    if not trials:
        raise StructuralError("Cannot average an empty list of trials.")
    shape = trials[0].samples.shape
    for i, trial in enumerate(trials):
        if trial.samples.shape != shape:
            raise StructuralError(f"Trial {i} has shape {trial.samples.shape}, expected {shape}.")
    mean = np.mean(np.stack([t.samples for t in trials]), axis=0)
    return Trial(samples=mean, paradigm=trials[0].paradigm, sample_rate=trials[0].sample_rate)


def _screen_trials(recording: Recording, settings: PreprocessSettings) -> list:
    report = validate(recording, settings.artifact_threshold_uv)
    if report.errors:
        raise StructuralError(f"Recording {recording.subject_id}/{recording.condition.value} is invalid: "
                              f"{report.errors[0]}")
    trials = list(recording.trials)
    if settings.max_artifact_fraction is None:
        if any(report.artifact_counts):
            logger.warning("%s/%s: artifacts flagged in %d trials, kept for averaging",
                           recording.subject_id, recording.condition.value,
                           sum(1 for c in report.artifact_counts if c))
        return trials
    kept = [t for t, count in zip(trials, report.artifact_counts)
            if count / t.samples.size <= settings.max_artifact_fraction]
    if not kept:
        raise StructuralError(f"Artifact rejection removed every trial of "
                              f"{recording.subject_id}/{recording.condition.value}.")
    if len(kept) < len(trials):
        logger.warning("%s/%s: rejected %d of %d trials for artifacts", recording.subject_id,
                       recording.condition.value, len(trials) - len(kept), len(trials))
    return kept


def preprocess_for_band_selection(recording: Recording, settings: Optional[PreprocessSettings] = None) -> Trial:
    """
    Artifact screen, trial average, 50 Hz notch, then 1-55 Hz band-pass per channel.

    Returns:
        Trial: A single averaged, filtered trial.
    """
    settings = settings or PreprocessSettings()
    sample_rate = recording.sample_rate
    trials = _screen_trials(recording, settings)
    notch = FilterSpec(FilterKind.NOTCH, sample_rate=sample_rate, f0=settings.notch_f0, q=settings.notch_q)
    lo, hi = settings.band_selection_range
    bandpass = FilterSpec(FilterKind.BANDPASS, sample_rate=sample_rate, order=settings.order, f_lo=lo, f_hi=hi)

    if settings.notch_first:
        trials = [Trial(notch.apply(t.samples), t.paradigm, t.sample_rate) for t in trials]
        averaged = average_trials(trials).samples
    else:
        averaged = notch.apply(average_trials(trials).samples)
    return Trial(samples=bandpass.apply(averaged), paradigm=recording.paradigm, sample_rate=sample_rate)


def preprocess_for_classification(segment: StageSegment,
                                  settings: Optional[PreprocessSettings] = None) -> StageSegment:
    """50 Hz notch then 1-35 Hz band-pass on a single stage segment; no averaging."""
    settings = settings or PreprocessSettings()
    notch = FilterSpec(FilterKind.NOTCH, sample_rate=segment.sample_rate, f0=settings.notch_f0, q=settings.notch_q)
    lo, hi = settings.classification_range
    bandpass = FilterSpec(FilterKind.BANDPASS, sample_rate=segment.sample_rate, order=settings.order,
                          f_lo=lo, f_hi=hi)
    return StageSegment(stage=segment.stage, samples=bandpass.apply(notch.apply(segment.samples)),
                        sample_rate=segment.sample_rate)
