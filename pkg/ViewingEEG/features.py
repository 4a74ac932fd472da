"""
Rest-stage epoching and STFT / DWT feature datasets with a fixed train/test split.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split

from .errors import ParameterError, StructuralError
from .paradigm import BandDef, Condition, DEFAULT_SAMPLE_RATE, Recording, Stage, StageSegment, stage_slice
from .preprocess import PreprocessSettings, preprocess_for_classification
from .spectral import normalized_band_powers, psd_from_spectrogram, stft_spectrogram
from .wavelet import SubbandMode, WaveletSpec, default_subband_selection, dwt_decompose

logger = logging.getLogger(__name__)

DWT_STATISTICS = ("min", "max", "mean", "sd")


class FeatureKind(Enum):
    STFT = "stft"
    DWT = "dwt"


@dataclass(frozen=True, eq=False)
class Epoch:
    """A 4 s slice of a filtered Rest segment."""
    samples: np.ndarray
    trial_index: int
    offset_s: float
    condition: Optional[Condition] = None
    sample_rate: int = DEFAULT_SAMPLE_RATE


@dataclass(frozen=True)
class FeatureSettings:
    epoch_s: float = 4.0
    step_s: float = 0.5
    window_len: int = 512
    hop: int = 1
    wavelet: WaveletSpec = WaveletSpec()
    subband_mode: SubbandMode = SubbandMode.PAPER_TABLE
    subband_selection: Optional[Tuple[str, ...]] = None
    # None -> ceil(half) of each class, 83 of 165.
    train_per_class: Optional[int] = None
    chronological: bool = False
    preprocess: PreprocessSettings = field(default_factory=PreprocessSettings)


@dataclass(eq=False)
class FeatureDataset:
    """
    Per-channel features of every epoch of both classes.

    `features` is channels x epochs x dim. Epochs of the first (TwoD) input
    come first, each class in (trial, offset) order.
    """
    features: np.ndarray
    labels: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    kind: FeatureKind
    channels: Tuple[str, ...]
    feature_names: Tuple[str, ...]
    epoch_trials: np.ndarray
    epoch_offsets: np.ndarray
    subject_id: str = ""

    @property
    def n_epochs(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[2]

    def channel_index(self, channel: str) -> int:
        try:
            return self.channels.index(channel)
        except ValueError:
            raise StructuralError(f"Channel '{channel}' is not in the dataset.") from None

    def combined(self, channels: Sequence[str]) -> np.ndarray:
        """Epochs x (dim * len(channels)) matrix, channel blocks side by side."""
        rows = [self.channel_index(c) for c in channels]
        return np.concatenate([self.features[r] for r in rows], axis=1)

    def subset(self, channels: Sequence[str]) -> "FeatureDataset":
        rows = [self.channel_index(c) for c in channels]
        return FeatureDataset(
            features=self.features[rows], labels=self.labels, train_idx=self.train_idx, test_idx=self.test_idx,
            kind=self.kind, channels=tuple(channels), feature_names=self.feature_names,
            epoch_trials=self.epoch_trials, epoch_offsets=self.epoch_offsets, subject_id=self.subject_id)

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per epoch and channel."""
        split = np.full(self.n_epochs, "test", dtype=object)
        split[self.train_idx] = "train"
        frames = []
        for c, channel in enumerate(self.channels):
            frame = pd.DataFrame(self.features[c], columns=list(self.feature_names))
            frame.insert(0, "offset_s", self.epoch_offsets)
            frame.insert(0, "trial", self.epoch_trials)
            frame.insert(0, "epoch", np.arange(self.n_epochs))
            frame.insert(0, "channel", channel)
            frame["label"] = [Condition.from_label(v).value for v in self.labels]
            frame["split"] = split
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def epoch_segment(segment: StageSegment, win_s: float = 4.0, step_s: float = 0.5, trial_index: int = 0,
                  condition: Optional[Condition] = None) -> List[Epoch]:
    """Epochs at offsets 0, step, ..., duration - win."""
    win = int(round(win_s * segment.sample_rate))
    step = int(round(step_s * segment.sample_rate))
    if win < 1 or step < 1:
        raise ParameterError(f"Epoch window and step must be at least one sample, got {win_s} s / {step_s} s.")
    if segment.n_samples < win:
        raise ParameterError(f"Segment of {segment.duration_s:g} s is shorter than the {win_s:g} s epoch.")
    count = (segment.n_samples - win) // step + 1
    return [
        Epoch(samples=segment.samples[:, i * step:i * step + win], trial_index=trial_index,
              offset_s=i * step / segment.sample_rate, condition=condition, sample_rate=segment.sample_rate)
        for i in range(count)
    ]


def stft_features(epoch: Epoch, dominant_bands: Sequence[BandDef], window_len: int = 512,
                  hop: int = 1) -> np.ndarray:
    """Channels x len(dominant_bands) normalized powers (percent of 1-49 Hz power)."""
    if not dominant_bands:
        raise ParameterError("stft_features needs at least one dominant band.")
    window_len = min(window_len, epoch.samples.shape[1])
    rows = []
    for series in epoch.samples:
        spec = stft_spectrogram(series, epoch.sample_rate, window_len=window_len, hop=hop)
        rows.append(normalized_band_powers(psd_from_spectrogram(spec), dominant_bands))
    return np.array(rows)


def _subband_statistics(coefficients: np.ndarray) -> np.ndarray:
    return np.array([coefficients.min(), coefficients.max(), coefficients.mean(), coefficients.std()])


def dwt_features(epoch: Epoch, subband_selection: Sequence[str] = ("A7", "D6"),
                 spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Channels x 4: min, max, mean and population SD of the concatenated selected sub-bands."""
    if not subband_selection:
        raise ParameterError("dwt_features needs at least one sub-band.")
    rows = []
    for series in epoch.samples:
        coeffs = dwt_decompose(series, spec)
        rows.append(_subband_statistics(np.concatenate([coeffs.subband(s) for s in subband_selection])))
    return np.array(rows)


def _segment_stft_features(segment: StageSegment, epochs: List[Epoch], bands: Sequence[BandDef],
                           settings: FeatureSettings) -> np.ndarray:
    """
    STFT features of every epoch from one spectrogram per channel.

    An epoch's frames are a contiguous run of the segment's frames when its
    offset is a multiple of the hop, so the result equals calling
    stft_features per epoch.
    """
    win = epochs[0].samples.shape[1]
    window_len = min(settings.window_len, win)
    hop = settings.hop
    frames_per_epoch = (win - window_len) // hop + 1
    starts = [int(round(e.offset_s * segment.sample_rate)) for e in epochs]
    if any(s % hop for s in starts):
        return np.stack([stft_features(e, bands, settings.window_len, hop) for e in epochs], axis=1)

    out = np.empty((segment.samples.shape[0], len(epochs), len(bands)))
    for c, series in enumerate(segment.samples):
        spec = stft_spectrogram(series, segment.sample_rate, window_len=window_len, hop=hop)
        for e, start in enumerate(starts):
            first = start // hop
            psd = psd_from_spectrogram(spec, slice(first, first + frames_per_epoch))
            out[c, e] = normalized_band_powers(psd, bands)
    return out


def _recording_features(recording: Recording, kind: FeatureKind, bands: Sequence[BandDef],
                        subbands: Sequence[str], settings: FeatureSettings):
    blocks, trials, offsets = [], [], []
    for t, trial in enumerate(recording.trials):
        if trial.paradigm.rest_s < settings.epoch_s:
            raise StructuralError(f"Trial {t} of {recording.subject_id}/{recording.condition.value} has no "
                                  f"Rest stage long enough for {settings.epoch_s:g} s epochs.")
        segment = preprocess_for_classification(stage_slice(trial, Stage.REST), settings.preprocess)
        epochs = epoch_segment(segment, settings.epoch_s, settings.step_s, t, recording.condition)
        if kind is FeatureKind.STFT:
            blocks.append(_segment_stft_features(segment, epochs, bands, settings))
        else:
            blocks.append(np.stack([dwt_features(e, subbands, settings.wavelet) for e in epochs], axis=1))
        trials.extend(e.trial_index for e in epochs)
        offsets.extend(e.offset_s for e in epochs)
    return np.concatenate(blocks, axis=1), trials, offsets


def _split(n_per_class: int, train_per_class: int, seed: int, chronological: bool):
    train, test = [], []
    for c in range(2):
        idx = np.arange(c * n_per_class, (c + 1) * n_per_class)
        if chronological:
            tr, te = idx[:train_per_class], idx[train_per_class:]
        else:
            tr, te = train_test_split(idx, train_size=train_per_class, shuffle=True, random_state=seed)
        train.append(tr)
        test.append(te)
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def assemble_dataset(recording_2d: Recording, recording_3d: Recording, feature_kind, dominant_bands:
                     Sequence[BandDef], seed: int = 0, settings: Optional[FeatureSettings] = None) -> FeatureDataset:
    """
    Builds the labelled per-channel feature dataset of one participant.

    The first recording is labelled TwoD (+1), the second ThreeD (-1).

    Args:
        recording_2d (Recording): TwoD session.
        recording_3d (Recording): ThreeD session.
        feature_kind (FeatureKind | str): 'stft' or 'dwt'.
        dominant_bands (Sequence[BandDef]): Bands from band selection.
        seed (int): Split seed.
        settings (FeatureSettings, optional): Epoching, STFT, DWT and split knobs.
    """
    settings = settings or FeatureSettings()
    kind = FeatureKind(feature_kind)
    if not dominant_bands:
        raise ParameterError("assemble_dataset needs at least one dominant band.")
    if len(recording_2d.trials) != len(recording_3d.trials):
        raise StructuralError(f"Unequal class sizes: {len(recording_2d.trials)} TwoD trials vs "
                              f"{len(recording_3d.trials)} ThreeD trials.")
    if tuple(recording_2d.montage.channels) != tuple(recording_3d.montage.channels):
        raise StructuralError("TwoD and ThreeD recordings use different montages.")
    if recording_2d.condition is not Condition.TWO_D or recording_3d.condition is not Condition.THREE_D:
        logger.warning("Recording conditions (%s, %s) differ from their TwoD/ThreeD argument slots",
                       recording_2d.condition.value, recording_3d.condition.value)

    subbands = settings.subband_selection or default_subband_selection(
        dominant_bands, recording_2d.sample_rate, settings.wavelet, settings.subband_mode)
    feats_2d, trials_2d, offsets_2d = _recording_features(recording_2d, kind, dominant_bands, subbands, settings)
    feats_3d, trials_3d, offsets_3d = _recording_features(recording_3d, kind, dominant_bands, subbands, settings)
    n_per_class = feats_2d.shape[1]

    train_per_class = settings.train_per_class or math.ceil(n_per_class / 2)
    if not 1 <= train_per_class < n_per_class:
        raise ParameterError(f"train_per_class must be in 1..{n_per_class - 1}, got {train_per_class}.")
    train_idx, test_idx = _split(n_per_class, train_per_class, seed, settings.chronological)

    if kind is FeatureKind.STFT:
        names = tuple(f"{b.name.value.lower()}_pct" for b in dominant_bands)
    else:
        names = DWT_STATISTICS
    logger.info("Assembled %s dataset for %s: %d epochs/class, %d train/class (sub-bands %s)",
                kind.value, recording_2d.subject_id, n_per_class, train_per_class,
                ",".join(subbands) if kind is FeatureKind.DWT else "-")
    return FeatureDataset(
        features=np.concatenate([feats_2d, feats_3d], axis=1),
        labels=np.concatenate([np.ones(n_per_class, dtype=int), -np.ones(n_per_class, dtype=int)]),
        train_idx=train_idx,
        test_idx=test_idx,
        kind=kind,
        channels=tuple(recording_2d.montage.channels),
        feature_names=names,
        epoch_trials=np.array(trials_2d + trials_3d),
        epoch_offsets=np.array(offsets_2d + offsets_3d, dtype=float),
        subject_id=recording_2d.subject_id,
    )
