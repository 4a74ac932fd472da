"""
Domain types for the viewing paradigm: montage, stage timing, frequency bands,
trials and recordings, plus sample-exact stage slicing.

All types are immutable once built; sample matrices are stored read-only.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from .errors import ParameterError, StructuralError

DEFAULT_SAMPLE_RATE = 512

# Listing order used everywhere rows are indexed by channel.
STANDARD_CHANNELS = (
    "Fp1", "Fpz", "Fp2", "F3", "F4", "F7", "F8", "C3", "C4", "Fz",
    "P3", "P4", "Pz", "O1", "O2", "T3", "T4", "T5", "T6", "Oz",
)

TEN_TWENTY_LABELS = frozenset(STANDARD_CHANNELS) | {
    "Cz", "A1", "A2", "T7", "T8", "P7", "P8", "M1", "M2",
}

LOBES = {
    "frontal": ("Fp1", "Fpz", "Fp2", "F3", "F4", "F7", "F8", "Fz"),
    "central": ("C3", "C4", "Cz"),
    "parietal": ("P3", "P4", "Pz"),
    "occipital": ("O1", "O2", "Oz"),
    "temporal": ("T3", "T4", "T5", "T6", "T7", "T8", "P7", "P8"),
}


class Condition(Enum):
    """Viewing condition preceding the Rest stage."""
    TWO_D = "TwoD"
    THREE_D = "ThreeD"

    @property
    def label(self) -> int:
        """Classifier label: TwoD is the positive class."""
        return 1 if self is Condition.TWO_D else -1

    @classmethod
    def from_label(cls, label: int) -> "Condition":
        return cls.TWO_D if label > 0 else cls.THREE_D


class Stage(Enum):
    RELAX = "Relax"
    WATCH = "Watch"
    REST = "Rest"


class BandName(Enum):
    DELTA = "Delta"
    THETA = "Theta"
    ALPHA = "Alpha"
    BETA = "Beta"
    GAMMA = "Gamma"

    @classmethod
    def parse(cls, text: str) -> "BandName":
        """Accepts 'Delta', 'delta' or the Greek letter."""
        symbols = {"δ": cls.DELTA, "θ": cls.THETA, "α": cls.ALPHA, "β": cls.BETA, "γ": cls.GAMMA}
        if text in symbols:
            return symbols[text]
        for member in cls:
            if member.value.lower() == text.strip().lower():
                return member
        raise ParameterError(f"Unknown band '{text}'. Expected one of {[m.value for m in cls]}.")


class ComparisonStage(Enum):
    """
    Pairs of (condition, stage) segments whose band powers are subtracted.

    I:   TwoD Relax - TwoD Rest
    II:  ThreeD Relax - ThreeD Rest
    III: TwoD Rest - ThreeD Rest
    """
    I = "I"
    II = "II"
    III = "III"

    @property
    def operands(self) -> Tuple[Tuple[Condition, Stage], Tuple[Condition, Stage]]:
        return _COMPARISON_OPERANDS[self]


_COMPARISON_OPERANDS = {
    ComparisonStage.I: ((Condition.TWO_D, Stage.RELAX), (Condition.TWO_D, Stage.REST)),
    ComparisonStage.II: ((Condition.THREE_D, Stage.RELAX), (Condition.THREE_D, Stage.REST)),
    ComparisonStage.III: ((Condition.TWO_D, Stage.REST), (Condition.THREE_D, Stage.REST)),
}


@dataclass(frozen=True)
class Montage:
    """Ordered data channels plus the reference electrode."""
    channels: Tuple[str, ...] = STANDARD_CHANNELS
    reference: str = "Cz"

    def __post_init__(self):
        channels = tuple(self.channels)
        object.__setattr__(self, "channels", channels)
        if len(channels) != 20:
            raise StructuralError(f"A montage needs exactly 20 data channels, got {len(channels)}.")
        if len(set(channels)) != len(channels):
            raise StructuralError(f"Montage channel labels must be unique: {list(channels)}")
        unknown = [c for c in channels + (self.reference,) if c not in TEN_TWENTY_LABELS]
        if unknown:
            raise StructuralError(f"Labels outside the 10-20 system: {unknown}")

    def index(self, label: str) -> int:
        try:
            return self.channels.index(label)
        except ValueError:
            raise StructuralError(f"Channel '{label}' is not in the montage.") from None

    def lobe(self, label: str) -> str:
        for lobe, members in LOBES.items():
            if label in members:
                return lobe
        raise StructuralError(f"Channel '{label}' has no lobe assignment.")

    def by_lobe(self) -> Dict[str, Tuple[str, ...]]:
        """Montage channels grouped by lobe, montage order kept inside each group."""
        grouped = {lobe: tuple(c for c in self.channels if c in members) for lobe, members in LOBES.items()}
        return {lobe: members for lobe, members in grouped.items() if members}


@dataclass(frozen=True)
class ParadigmSpec:
    """Stage durations (seconds) of one trial and how many trials a condition holds."""
    relax_s: float = 9.0
    watch_s: float = 14.0
    rest_s: float = 9.0
    trials_per_condition: int = 15

    def __post_init__(self):
        for name in ("relax_s", "watch_s", "rest_s"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"ParadigmSpec.{name} must be > 0, got {getattr(self, name)}.")
        if int(self.trials_per_condition) < 1:
            raise ParameterError(f"trials_per_condition must be >= 1, got {self.trials_per_condition}.")

    @property
    def total_s(self) -> float:
        return self.relax_s + self.watch_s + self.rest_s

    def duration(self, stage: Stage) -> float:
        return {Stage.RELAX: self.relax_s, Stage.WATCH: self.watch_s, Stage.REST: self.rest_s}[stage]

    def total_samples(self, sample_rate: int) -> int:
        return _to_samples(self.total_s, sample_rate)

    def stage_bounds(self, stage: Stage, sample_rate: int) -> Tuple[int, int]:
        """Closed-open sample range [start, end) of a stage."""
        start_s = {Stage.RELAX: 0.0, Stage.WATCH: self.relax_s, Stage.REST: self.relax_s + self.watch_s}[stage]
        start = _to_samples(start_s, sample_rate)
        return start, start + _to_samples(self.duration(stage), sample_rate)

    def to_dict(self) -> dict:
        return {
            "relax_s": self.relax_s,
            "watch_s": self.watch_s,
            "rest_s": self.rest_s,
            "trials_per_condition": self.trials_per_condition,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParadigmSpec":
        return cls(
            relax_s=float(data.get("relax_s", 9.0)),
            watch_s=float(data.get("watch_s", 14.0)),
            rest_s=float(data.get("rest_s", 9.0)),
            trials_per_condition=int(data.get("trials_per_condition", 15)),
        )


def _to_samples(seconds: float, sample_rate: int) -> int:
    exact = seconds * sample_rate
    count = int(round(exact))
    if abs(exact - count) > 1e-6:
        raise ParameterError(f"{seconds} s is not a whole number of samples at {sample_rate} Hz.")
    return count


@dataclass(frozen=True)
class BandDef:
    """A named frequency band [f_lo, f_hi] in Hz."""
    name: BandName
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not 0 < self.f_lo < self.f_hi:
            raise ParameterError(f"Band {self.name.value} needs 0 < f_lo < f_hi, got ({self.f_lo}, {self.f_hi}).")

    @property
    def width(self) -> float:
        return self.f_hi - self.f_lo


# PSD integration ranges. Alpha and beta leave 12-13 Hz uncovered.
CANONICAL_BANDS = (
    BandDef(BandName.DELTA, 1.0, 4.0),
    BandDef(BandName.THETA, 4.0, 8.0),
    BandDef(BandName.ALPHA, 8.0, 12.0),
    BandDef(BandName.BETA, 13.0, 30.0),
    BandDef(BandName.GAMMA, 30.0, 49.0),
)

TOTAL_POWER_RANGE = (1.0, 49.0)


def canonical_band(name) -> BandDef:
    """Look a canonical band up by BandName or by text."""
    if not isinstance(name, BandName):
        name = BandName.parse(str(name))
    for band in CANONICAL_BANDS:
        if band.name is name:
            return band
    raise ParameterError(f"No canonical band named {name}.")


def _readonly(samples) -> np.ndarray:
    array = np.array(samples, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Trial:
    """One repetition of the paradigm: channels x time, microvolts."""
    samples: np.ndarray
    paradigm: ParadigmSpec = field(default_factory=ParadigmSpec)
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        array = _readonly(self.samples)
        if array.ndim != 2:
            raise StructuralError(f"Trial samples must be a channels x time matrix, got shape {array.shape}.")
        object.__setattr__(self, "samples", array)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def expected_samples(self) -> int:
        return self.paradigm.total_samples(self.sample_rate)


@dataclass(frozen=True, eq=False)
class Recording:
    """A subject's condition-labelled session."""
    subject_id: str
    condition: Condition
    trials: Tuple[Trial, ...]
    sample_rate: int = DEFAULT_SAMPLE_RATE
    montage: Montage = field(default_factory=Montage)
    paradigm: ParadigmSpec = field(default_factory=ParadigmSpec)

    def __post_init__(self):
        object.__setattr__(self, "trials", tuple(self.trials))
        if int(self.sample_rate) <= 0:
            raise ParameterError(f"sample_rate must be a positive integer, got {self.sample_rate}.")


@dataclass(frozen=True, eq=False)
class StageSegment:
    """One stage of a trial, channels x time."""
    stage: Stage
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        array = np.asarray(self.samples, dtype=float)
        if array.ndim != 2:
            raise StructuralError(f"Segment samples must be a channels x time matrix, got shape {array.shape}.")
        object.__setattr__(self, "samples", array)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate


def standard_montage() -> Montage:
    """The fixed 20-channel 10-20 montage referenced to Cz."""
    return Montage(channels=STANDARD_CHANNELS, reference="Cz")


def stage_slice(trial: Trial, stage: Stage, trim_s: float = 0.0) -> StageSegment:
    """
    Cuts one stage out of a trial.

    Args:
        trial (Trial): A trial whose length matches its paradigm.
        stage (Stage): Relax, Watch or Rest.
        trim_s (float, optional): Seconds dropped at each end of the stage. Defaults to 0.

    Returns:
        StageSegment: A read-only view of samples [start, end).
    """
    expected = trial.expected_samples
    if trial.n_samples != expected:
        raise StructuralError(
            f"Malformed trial: expected {expected} samples "
            f"({trial.paradigm.total_s} s at {trial.sample_rate} Hz), got {trial.n_samples}."
        )
    if trial.n_channels != 20:
        raise StructuralError(f"Malformed trial: expected 20 channel rows, got {trial.n_channels}.")
    start, end = trial.paradigm.stage_bounds(stage, trial.sample_rate)
    if trim_s:
        guard = _to_samples(trim_s, trial.sample_rate)
        if trim_s < 0 or 2 * guard >= end - start:
            raise ParameterError(f"trim_s={trim_s} leaves nothing of the {stage.value} stage.")
        start, end = start + guard, end - guard
    return StageSegment(stage=stage, samples=trial.samples[:, start:end], sample_rate=trial.sample_rate)
