"""
STFT spectrograms, PSD, band-power integration and dominant-band selection.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import rfft, rfftfreq
from scipy.integrate import trapezoid
from scipy.signal import get_window

from .errors import DegenerateInputError, ParameterError, StructuralError
from .paradigm import (
    BandDef,
    CANONICAL_BANDS,
    ComparisonStage,
    Condition,
    DEFAULT_SAMPLE_RATE,
    Montage,
    Stage,
    StageSegment,
    TOTAL_POWER_RANGE,
)

logger = logging.getLogger(__name__)

# Frames transformed per FFT call; bounds memory on hop-1 spectrograms of long series.
_FRAME_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Frames x frequency grid of window-energy normalized one-sided power."""
    values: np.ndarray
    freq_axis: np.ndarray
    time_axis: np.ndarray
    window_len: int
    hop: int
    sample_rate: int

    @property
    def freq_resolution(self) -> float:
        return self.sample_rate / self.window_len


@dataclass(frozen=True, eq=False)
class PsdCurve:
    """Power density per bin over [0, Nyquist], uV^2/Hz."""
    values: np.ndarray
    freq_axis: np.ndarray


@dataclass(frozen=True, eq=False)
class BandPowerMatrix:
    """Channels x bands normalized power percentages of one stage segment."""
    values: np.ndarray
    channels: Tuple[str, ...]
    bands: Tuple[BandDef, ...] = CANONICAL_BANDS
    label: str = ""

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.channels), columns=[b.name.value for b in self.bands])


@dataclass(frozen=True, eq=False)
class DifferenceMatrix:
    """Signed channels x bands difference of two BandPowerMatrix grids, percentage points."""
    values: np.ndarray
    channels: Tuple[str, ...]
    bands: Tuple[BandDef, ...] = CANONICAL_BANDS
    label: str = ""

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, index=list(self.channels), columns=[b.name.value for b in self.bands])
        frame.index.name = "channel"
        return frame

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, float_format="%.6f", lineterminator="\n")

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {ch: {b.name.value: float(self.values[i, j]) for j, b in enumerate(self.bands)}
                for i, ch in enumerate(self.channels)}


@dataclass
class BandSelection:
    """Outcome for one band: meaningful channels and whether the band is dominant."""
    band: BandDef
    dominant: bool
    channels: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def n_positive(self) -> int:
        return sum(1 for _, d in self.channels if d > 0)

    @property
    def n_negative(self) -> int:
        return sum(1 for _, d in self.channels if d < 0)

    def to_dict(self) -> dict:
        return {
            "band": self.band.name.value,
            "f_lo": self.band.f_lo,
            "f_hi": self.band.f_hi,
            "dominant": self.dominant,
            "channels": [{"channel": ch, "difference": round(float(d), 6)} for ch, d in self.channels],
            "n_positive": self.n_positive,
            "n_negative": self.n_negative,
        }


@dataclass
class DominantBandReport:
    """Band selection for one comparison stage."""
    stage: str
    threshold: float
    min_channels: int
    aggregation: str
    n_participants: int
    bands: List[BandSelection]
    mean_difference: DifferenceMatrix

    @property
    def selected(self) -> List[BandDef]:
        return [b.band for b in self.bands if b.dominant]

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "threshold": self.threshold,
            "min_channels": self.min_channels,
            "aggregation": self.aggregation,
            "n_participants": self.n_participants,
            "selected_bands": [b.name.value for b in self.selected],
            "bands": [b.to_dict() for b in self.bands],
            "mean_difference": {ch: {band: round(v, 6) for band, v in row.items()}
                                for ch, row in self.mean_difference.to_dict().items()},
        }


def stft_spectrogram(series, sample_rate: int = DEFAULT_SAMPLE_RATE, window: str = "hann",
                     window_len: int = 512, hop: int = 1) -> Spectrogram:
    """
    Sliding-window power spectrogram.

    Each frame is |DFT(w * x)|^2 / (window_len * sum(w^2)), doubled on the
    interior one-sided bins, so the bins of a frame sum to the frame's mean
    square (0.5 for a unit sinusoid).

    Args:
        series: One channel.
        sample_rate (int): Hz.
        window (str): Any scipy.signal.get_window name; periodic form is used.
        window_len (int): Samples per frame.
        hop (int): Frame advance in samples. 1 means overlap of window_len - 1.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ParameterError(f"stft_spectrogram expects a single channel, got shape {x.shape}.")
    if window_len < 2 or hop < 1:
        raise ParameterError(f"window_len must be >= 2 and hop >= 1, got {window_len} and {hop}.")
    if x.size < window_len:
        raise ParameterError(f"Series of {x.size} samples is shorter than the {window_len}-sample window.")

    w = get_window(window, window_len)
    frames = sliding_window_view(x, window_len)[::hop]
    n_frames = frames.shape[0]
    values = np.empty((n_frames, window_len // 2 + 1))
    for start in range(0, n_frames, _FRAME_CHUNK):
        block = frames[start:start + _FRAME_CHUNK] * w
        values[start:start + _FRAME_CHUNK] = np.abs(rfft(block, axis=1)) ** 2
    values /= window_len * np.sum(w ** 2)
    if window_len % 2 == 0:
        values[:, 1:-1] *= 2.0
    else:
        values[:, 1:] *= 2.0

    return Spectrogram(
        values=values,
        freq_axis=rfftfreq(window_len, d=1.0 / sample_rate),
        time_axis=(np.arange(n_frames) * hop + window_len / 2.0) / sample_rate,
        window_len=window_len,
        hop=hop,
        sample_rate=sample_rate,
    )


def psd_from_spectrogram(spectrogram: Spectrogram, frames: Optional[slice] = None) -> PsdCurve:
    """Time average of the frames divided by the bin width. `frames` restricts the average."""
    values = spectrogram.values if frames is None else spectrogram.values[frames]
    if values.shape[0] == 0:
        raise ParameterError("A PSD needs at least one spectrogram frame.")
    return PsdCurve(values=values.mean(axis=0) / spectrogram.freq_resolution, freq_axis=spectrogram.freq_axis)


def band_power(psd: PsdCurve, band: Union[BandDef, Tuple[float, float]]) -> float:
    """
    Trapezoidal area of the PSD over [f_lo, f_hi].

    The PSD is linearly interpolated at edges falling between bins.
    """
    f_lo, f_hi = (band.f_lo, band.f_hi) if isinstance(band, BandDef) else (float(band[0]), float(band[1]))
    freqs = psd.freq_axis
    if not f_lo < f_hi:
        raise ParameterError(f"Band needs f_lo < f_hi, got ({f_lo}, {f_hi}).")
    if f_lo < freqs[0] or f_hi > freqs[-1]:
        raise ParameterError(f"Band ({f_lo}, {f_hi}) Hz lies outside the PSD range [{freqs[0]}, {freqs[-1]}] Hz.")
    inner = freqs[(freqs > f_lo) & (freqs < f_hi)]
    grid = np.concatenate(([f_lo], inner, [f_hi]))
    return float(trapezoid(np.interp(grid, freqs, psd.values), grid))


def normalized_band_powers(psd: PsdCurve, bands: Sequence[BandDef] = CANONICAL_BANDS,
                           total_range: Tuple[float, float] = TOTAL_POWER_RANGE) -> np.ndarray:
    """Percent of the 1-49 Hz power carried by each band."""
    total = band_power(psd, total_range)
    if not total > 0:
        raise DegenerateInputError(
            f"Total power over {total_range[0]:g}-{total_range[1]:g} Hz is zero; cannot normalize.")
    return np.array([100.0 * band_power(psd, b) / total for b in bands])


def stage_band_powers(segment: StageSegment, montage: Montage, window_len: int = 512, hop: int = 1,
                      label: str = "", bands: Sequence[BandDef] = CANONICAL_BANDS) -> BandPowerMatrix:
    """20 x 5 normalized band powers of a stage segment, one row per montage channel."""
    if segment.samples.shape[0] != len(montage.channels):
        raise StructuralError(
            f"Segment has {segment.samples.shape[0]} rows but the montage has {len(montage.channels)} channels.")
    rows = []
    for channel, series in zip(montage.channels, segment.samples):
        spec = stft_spectrogram(series, segment.sample_rate, window_len=window_len, hop=hop)
        try:
            rows.append(normalized_band_powers(psd_from_spectrogram(spec), bands))
        except DegenerateInputError as e:
            raise DegenerateInputError(f"Channel {channel} ({label or segment.stage.value}): {e}") from None
    return BandPowerMatrix(values=np.array(rows), channels=montage.channels, bands=tuple(bands), label=label)


def comparison_pair(stage) -> Tuple[Tuple[Condition, Stage], Tuple[Condition, Stage]]:
    """(minuend, subtrahend) segments of a comparison stage, each as (condition, stage)."""
    return ComparisonStage(stage).operands


def band_difference_matrix(mat_a: BandPowerMatrix, mat_b: BandPowerMatrix) -> DifferenceMatrix:
    """Element-wise A - B."""
    if tuple(mat_a.channels) != tuple(mat_b.channels):
        raise StructuralError("Band-power matrices use different channel labels or order.")
    if tuple(mat_a.bands) != tuple(mat_b.bands):
        raise StructuralError("Band-power matrices use different band sets.")
    if mat_a.values.shape != mat_b.values.shape:
        raise StructuralError(f"Shape mismatch {mat_a.values.shape} vs {mat_b.values.shape}.")
    label = f"{mat_a.label} - {mat_b.label}" if mat_a.label or mat_b.label else ""
    return DifferenceMatrix(values=mat_a.values - mat_b.values, channels=tuple(mat_a.channels),
                            bands=tuple(mat_a.bands), label=label)


def select_dominant_bands(diff_matrices: Sequence[DifferenceMatrix], threshold: float = 2.0,
                          min_channels: int = 3, aggregation: str = "mean",
                          stage: str = "") -> DominantBandReport:
    """
    Picks the bands whose averaged difference is meaningful on enough channels.

    A cell is meaningful when |mean difference| > threshold. With
    aggregation="majority" it must also exceed the threshold, with the sign
    of the mean, for a strict majority of participants. A band is dominant
    when at least `min_channels` of its cells are meaningful.
    """
    diff_matrices = list(diff_matrices)
    if not diff_matrices:
        raise ParameterError("select_dominant_bands needs at least one participant matrix.")
    if aggregation not in ("mean", "majority"):
        raise ParameterError(f"aggregation must be 'mean' or 'majority', got '{aggregation}'.")
    if min_channels < 1:
        raise ParameterError(f"min_channels must be >= 1, got {min_channels}.")
    first = diff_matrices[0]
    for m in diff_matrices[1:]:
        if tuple(m.channels) != tuple(first.channels) or tuple(m.bands) != tuple(first.bands):
            raise StructuralError("Participant matrices disagree on channels or bands.")

    stack = np.stack([m.values for m in diff_matrices])
    mean = stack.mean(axis=0)
    meaningful = np.abs(mean) > threshold
    if aggregation == "majority":
        agreeing = (np.abs(stack) > threshold) & (np.sign(stack) == np.sign(mean))
        meaningful &= agreeing.sum(axis=0) * 2 > len(diff_matrices)

    selections = []
    for j, band in enumerate(first.bands):
        channels = [(first.channels[i], float(mean[i, j])) for i in np.flatnonzero(meaningful[:, j])]
        selections.append(BandSelection(band=band, dominant=len(channels) >= min_channels, channels=channels))
    report = DominantBandReport(
        stage=stage,
        threshold=threshold,
        min_channels=min_channels,
        aggregation=aggregation,
        n_participants=len(diff_matrices),
        bands=selections,
        mean_difference=DifferenceMatrix(values=mean, channels=tuple(first.channels), bands=tuple(first.bands),
                                         label=f"mean {stage}".strip()),
    )
    logger.info("Stage %s dominant bands: %s", stage or "?", [b.name.value for b in report.selected])
    return report
