"""
Synthetic EEG sessions with known band-power structure.

Each channel is a sum of band oscillators (5 random-phase sinusoids per band
whose RMS follows a per-stage envelope), pink noise, an optional 50 Hz tone
and scheduled spikes.

Seeding (all via numpy.random.SeedSequence(spec.seed, spawn_key=...)):
    (0, channel)                   oscillator frequencies and phases; shared by
                                   every trial and both conditions
    (1, condition, trial, channel) pink noise and line-noise phase
    (2,)                           per-participant envelope jitter in presets
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter, sosfreqz, zpk2tf

from .errors import ParameterError
from .ingest import Participant, _read_json
from .paradigm import (
    BandName,
    CANONICAL_BANDS,
    ComparisonStage,
    Condition,
    DEFAULT_SAMPLE_RATE,
    Montage,
    ParadigmSpec,
    Recording,
    Stage,
    Trial,
    stage_slice,
    standard_montage,
)
from .preprocess import FilterKind, FilterSpec, PreprocessSettings, preprocess_for_band_selection
from .spectral import band_power, normalized_band_powers, psd_from_spectrogram, stft_spectrogram

logger = logging.getLogger(__name__)

PRESETS_PATH = os.path.join(os.path.dirname(__file__), "Assets", "synth_presets.json")

STAGES = (Stage.RELAX, Stage.WATCH, Stage.REST)
BANDS = tuple(b.name for b in CANONICAL_BANDS)
N_OSCILLATORS = 5
LINE_FREQUENCY = 50.0

# Cascaded first-order pole/zero pairs giving a -3 dB/octave slope from about
# 0.35 Hz up to ~100 Hz at 512 Hz.
_PINK_ZEROS = (0.98443604, 0.83392334, 0.07568359)
_PINK_POLES = (0.99572754, 0.94790649, 0.53567505)
_PINK_BURN_IN_S = 4.0


@dataclass(frozen=True)
class SpikeEvent:
    """A single-sample spike added to one channel of one trial."""
    trial: int
    channel: str
    time_s: float
    amplitude_uv: float
    # None adds the spike to both conditions.
    condition: Optional[Condition] = None

    def to_dict(self) -> dict:
        return {"trial": self.trial, "channel": self.channel, "time_s": self.time_s,
                "amplitude_uv": self.amplitude_uv,
                "condition": self.condition.value if self.condition else None}

    @classmethod
    def from_dict(cls, data: dict) -> "SpikeEvent":
        condition = data.get("condition")
        return cls(trial=int(data["trial"]), channel=str(data["channel"]), time_s=float(data["time_s"]),
                   amplitude_uv=float(data["amplitude_uv"]),
                   condition=Condition(condition) if condition else None)


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """
    Generator parameters.

    envelopes: stages x channels x bands oscillator RMS in uV, axes ordered as
    STAGES, the standard montage and BANDS.
    """
    envelopes: np.ndarray
    pink_noise_uv: float = 0.0
    line_noise_uv: float = 0.0
    spikes: Tuple[SpikeEvent, ...] = ()
    seed: int = 0

    def __post_init__(self):
        env = np.array(self.envelopes, dtype=float)
        if env.shape != (len(STAGES), 20, len(BANDS)):
            raise ParameterError(f"envelopes must be {len(STAGES)} x 20 x {len(BANDS)}, got {env.shape}.")
        if (env < 0).any() or not np.isfinite(env).all():
            raise ParameterError("Envelope amplitudes must be finite and >= 0.")
        if self.pink_noise_uv < 0 or self.line_noise_uv < 0:
            raise ParameterError("Noise amplitudes must be >= 0.")
        env.setflags(write=False)
        object.__setattr__(self, "envelopes", env)
        object.__setattr__(self, "spikes", tuple(self.spikes))

    @classmethod
    def zeros(cls, seed: int = 0) -> "SynthSpec":
        return cls(envelopes=np.zeros((len(STAGES), 20, len(BANDS))), seed=seed)

    @classmethod
    def uniform(cls, stage_bands: Mapping[Stage, Mapping[BandName, float]], seed: int = 0,
                **kwargs) -> "SynthSpec":
        """Same envelope on every channel; unlisted stages and bands stay at 0."""
        env = np.zeros((len(STAGES), 20, len(BANDS)))
        for stage, bands in stage_bands.items():
            for band, rms in bands.items():
                env[STAGES.index(stage), :, BANDS.index(band)] = rms
        return cls(envelopes=env, seed=seed, **kwargs)

    def envelope(self, stage: Stage, channel: int, band: BandName) -> float:
        return float(self.envelopes[STAGES.index(stage), channel, BANDS.index(band)])

    def with_envelope(self, stage: Stage, channel: int, band: BandName, rms: float) -> "SynthSpec":
        env = np.array(self.envelopes)
        env[STAGES.index(stage), channel, BANDS.index(band)] = rms
        return replace(self, envelopes=env)

    def to_dict(self, montage: Optional[Montage] = None) -> dict:
        montage = montage or standard_montage()
        return {
            "seed": self.seed,
            "pink_noise_uv": self.pink_noise_uv,
            "line_noise_uv": self.line_noise_uv,
            "spikes": [s.to_dict() for s in self.spikes],
            "envelopes": {
                stage.value: {
                    channel: {band.value: float(self.envelopes[s, c, b]) for b, band in enumerate(BANDS)}
                    for c, channel in enumerate(montage.channels)
                }
                for s, stage in enumerate(STAGES)
            },
        }

    @classmethod
    def from_dict(cls, data: dict, montage: Optional[Montage] = None) -> "SynthSpec":
        """
        Reads `to_dict` output. Per stage, a "default" entry applies to every
        channel and channel entries override it band by band.
        """
        montage = montage or standard_montage()
        env = np.zeros((len(STAGES), 20, len(BANDS)))
        for stage_name, entries in data.get("envelopes", {}).items():
            s = STAGES.index(Stage(stage_name))
            for band_name, rms in entries.get("default", {}).items():
                env[s, :, BANDS.index(BandName.parse(band_name))] = float(rms)
            for channel, bands in entries.items():
                if channel == "default":
                    continue
                c = montage.index(channel)
                for band_name, rms in bands.items():
                    env[s, c, BANDS.index(BandName.parse(band_name))] = float(rms)
        return cls(
            envelopes=env,
            pink_noise_uv=float(data.get("pink_noise_uv", 0.0)),
            line_noise_uv=float(data.get("line_noise_uv", 0.0)),
            spikes=tuple(SpikeEvent.from_dict(s) for s in data.get("spikes", [])),
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def from_json_file(cls, filepath: str, encoding: str = "utf-8") -> "SynthSpec":
        return cls.from_dict(_read_json(filepath, encoding))


@dataclass(frozen=True, eq=False)
class StagePowers:
    """Band powers of one stage measured through the band-selection chain."""
    normalized: np.ndarray
    absolute: np.ndarray
    total: np.ndarray


def _band_interior(lo: float, hi: float) -> Tuple[float, float]:
    # Keep the Hann main lobe (+/-2 bins at 1 Hz resolution) inside the band.
    margin = min(1.5, (hi - lo) / 2.0 - 0.5)
    return lo + margin, hi - margin


def oscillator_bank(seed: int, channel: int, n_oscillators: int = N_OSCILLATORS) -> Tuple[np.ndarray, np.ndarray]:
    """Frequencies and phases, each bands x n_oscillators, stratified over the band interior."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, channel)))
    freqs = np.empty((len(BANDS), n_oscillators))
    phases = np.empty((len(BANDS), n_oscillators))
    for b, band in enumerate(CANONICAL_BANDS):
        lo, hi = _band_interior(band.f_lo, band.f_hi)
        edges = np.linspace(lo, hi, n_oscillators + 1)
        freqs[b] = rng.uniform(edges[:-1], edges[1:])
        phases[b] = rng.uniform(0.0, 2.0 * np.pi, n_oscillators)
    return freqs, phases


def pink_noise(n_samples: int, rng: np.random.Generator, sample_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Unit-RMS 1/f noise; a burn-in is discarded so the slow pole has settled."""
    burn = int(_PINK_BURN_IN_S * sample_rate)
    b, a = zpk2tf(_PINK_ZEROS, _PINK_POLES, 1.0)
    noise = lfilter(b, a, rng.standard_normal(n_samples + burn))[burn:]
    std = noise.std()
    return noise / std if std > 0 else noise


def _stage_envelope_matrix(spec: SynthSpec, channel: int, paradigm: ParadigmSpec, sample_rate: int) -> np.ndarray:
    env = np.empty((len(BANDS), paradigm.total_samples(sample_rate)))
    for s, stage in enumerate(STAGES):
        start, end = paradigm.stage_bounds(stage, sample_rate)
        env[:, start:end] = spec.envelopes[s, channel][:, None]
    return env


def _phase_locked_part(spec: SynthSpec, paradigm: ParadigmSpec, sample_rate: int, n_channels: int) -> np.ndarray:
    t = np.arange(paradigm.total_samples(sample_rate)) / sample_rate
    out = np.zeros((n_channels, t.size))
    scale = np.sqrt(2.0 / N_OSCILLATORS)
    for c in range(n_channels):
        freqs, phases = oscillator_bank(spec.seed, c)
        env = _stage_envelope_matrix(spec, c, paradigm, sample_rate)
        for b in range(len(BANDS)):
            if not env[b].any():
                continue
            carrier = np.sin(2.0 * np.pi * freqs[b][:, None] * t[None, :] + phases[b][:, None]).sum(axis=0)
            out[c] += scale * env[b] * carrier
    return out


def generate_recording(spec: SynthSpec, paradigm: ParadigmSpec = ParadigmSpec(), montage: Optional[Montage] = None,
                       condition: Condition = Condition.TWO_D, subject_id: str = "S01",
                       sample_rate: int = DEFAULT_SAMPLE_RATE) -> Recording:
    """
    Generates every trial of one condition.

    Args:
        spec (SynthSpec): Envelopes, noise levels, spikes and seed.
        paradigm (ParadigmSpec): Stage durations and trial count.
        montage (Montage, optional): Defaults to the standard montage.
        condition (Condition): Selects the noise streams and the label.
        subject_id (str): Stored on the recording.
        sample_rate (int): Hz.
    """
    montage = montage or standard_montage()
    n_channels = len(montage.channels)
    n_samples = paradigm.total_samples(sample_rate)
    t = np.arange(n_samples) / sample_rate
    locked = _phase_locked_part(spec, paradigm, sample_rate, n_channels)
    cond_index = 0 if condition is Condition.TWO_D else 1

    trials = []
    for k in range(paradigm.trials_per_condition):
        samples = locked.copy()
        for c in range(n_channels):
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1, cond_index, k, c)))
            noise = pink_noise(n_samples, rng, sample_rate)
            line_phase = rng.uniform(0.0, 2.0 * np.pi)
            if spec.pink_noise_uv:
                samples[c] += spec.pink_noise_uv * noise
            if spec.line_noise_uv:
                samples[c] += spec.line_noise_uv * np.sin(2.0 * np.pi * LINE_FREQUENCY * t + line_phase)
        for spike in spec.spikes:
            if spike.trial == k and spike.condition in (None, condition):
                index = int(round(spike.time_s * sample_rate))
                if not 0 <= index < n_samples:
                    raise ParameterError(f"Spike at {spike.time_s} s falls outside the {paradigm.total_s} s trial.")
                samples[montage.index(spike.channel), index] += spike.amplitude_uv
        trials.append(Trial(samples=samples, paradigm=paradigm, sample_rate=sample_rate))
    return Recording(subject_id=subject_id, condition=condition, trials=tuple(trials), sample_rate=sample_rate,
                     montage=montage, paradigm=paradigm)


def measure_stage_powers(recording: Recording, stage: Stage, hop: int = 1,
                         settings: Optional[PreprocessSettings] = None) -> StagePowers:
    """Runs the band-selection chain and returns normalized, absolute and 1-49 Hz total powers per channel."""
    segment = stage_slice(preprocess_for_band_selection(recording, settings), stage)
    normalized, absolute, total = [], [], []
    for series in segment.samples:
        psd = psd_from_spectrogram(stft_spectrogram(series, segment.sample_rate, hop=hop))
        normalized.append(normalized_band_powers(psd))
        absolute.append([band_power(psd, b) for b in CANONICAL_BANDS])
        total.append(band_power(psd, (1.0, 49.0)))
    return StagePowers(normalized=np.array(normalized), absolute=np.array(absolute), total=np.array(total))


def _oscillator_power_gain(seed: int, channel: int, band: int, sample_rate: int,
                           settings: PreprocessSettings) -> float:
    """Mean zero-phase power gain (|H|^4) of notch + band-pass at the band's oscillator frequencies."""
    freqs = oscillator_bank(seed, channel)[0][band]
    lo, hi = settings.band_selection_range
    gain = np.ones_like(freqs)
    for spec in (FilterSpec(FilterKind.BANDPASS, sample_rate=sample_rate, order=settings.order, f_lo=lo, f_hi=hi),
                 FilterSpec(FilterKind.NOTCH, sample_rate=sample_rate, f0=settings.notch_f0, q=settings.notch_q)):
        _, h = sosfreqz(spec.sos(), worN=freqs, fs=sample_rate)
        gain *= np.abs(h) ** 4
    return float(gain.mean())


def apply_band_shift(reference: Recording, reference_stage: Stage, target_spec: SynthSpec, target_stage: Stage,
                     target_condition: Condition, shifts: Mapping[BandName, float], channels: Sequence[str],
                     paradigm: ParadigmSpec = ParadigmSpec(), montage: Optional[Montage] = None,
                     subject_id: str = "S01", tolerance: float = 0.25, max_rounds: int = 6,
                     settings: Optional[PreprocessSettings] = None) -> SynthSpec:
    """
    Adjusts target-stage envelopes so that reference - target normalized power
    equals `shifts` (percentage points) on `channels`.

    Each round regenerates the target, measures it, and solves the oscillator
    power each shifted band needs given the measured residual power of the
    other bands.

    Raises:
        ParameterError: A shift would need negative oscillator power.
    """
    montage = montage or standard_montage()
    settings = settings or PreprocessSettings()
    shifts = {BandName.parse(b) if not isinstance(b, BandName) else b: float(v) for b, v in shifts.items()}
    band_idx = [BANDS.index(b) for b in shifts]
    delta = np.array([shifts[BANDS[j]] for j in band_idx])
    rows = [montage.index(ch) for ch in channels]
    ref = measure_stage_powers(reference, reference_stage, settings=settings).normalized
    stage_pos = STAGES.index(target_stage)

    spec = target_spec
    worst = float("inf")
    for round_no in range(max_rounds):
        recording = generate_recording(spec, paradigm, montage, target_condition, subject_id, reference.sample_rate)
        measured = measure_stage_powers(recording, target_stage, settings=settings)
        error = (ref[np.ix_(rows, band_idx)] - measured.normalized[np.ix_(rows, band_idx)]) - delta
        worst = float(np.abs(error).max())
        logger.debug("Band shift round %d: worst error %.3f points", round_no, worst)
        if worst <= tolerance:
            return spec
        env = np.array(spec.envelopes)
        for c in rows:
            targets = (ref[c, band_idx] - delta) / 100.0
            if (targets < 0).any() or targets.sum() >= 1.0:
                raise ParameterError(f"Shift on {montage.channels[c]} is infeasible: target shares {targets * 100}.")
            residual = measured.total[c] - measured.absolute[c, band_idx].sum()
            new_total = residual / (1.0 - targets.sum())
            for j, share in zip(band_idx, targets):
                gain = _oscillator_power_gain(spec.seed, c, j, reference.sample_rate, settings)
                power = env[stage_pos, c, j] ** 2 + (share * new_total - measured.absolute[c, j]) / gain
                if power < 0:
                    raise ParameterError(f"Shift of {BANDS[j].value} on {montage.channels[c]} needs negative "
                                         f"oscillator power.")
                env[stage_pos, c, j] = np.sqrt(power)
        spec = replace(spec, envelopes=env)
    logger.warning("Band shift did not reach %.2f points in %d rounds (worst %.3f)", tolerance, max_rounds, worst)
    return spec


def make_stage_pair(comparison: ComparisonStage, specs: Dict[Condition, SynthSpec],
                    shifts: Mapping[BandName, float], channels: Sequence[str],
                    paradigm: ParadigmSpec = ParadigmSpec(), montage: Optional[Montage] = None,
                    subject_id: str = "S01", tolerance: float = 0.25) -> Dict[Condition, SynthSpec]:
    """Returns `specs` with the second operand of `comparison` solved for the requested shift."""
    (ref_cond, ref_stage), (tgt_cond, tgt_stage) = comparison.operands
    if not any(shifts.values()) or not channels:
        return dict(specs)
    reference = generate_recording(specs[ref_cond], paradigm, montage, ref_cond, subject_id)
    solved = apply_band_shift(reference, ref_stage, specs[tgt_cond], tgt_stage, tgt_cond, shifts, channels,
                              paradigm, montage, subject_id, tolerance)
    out = dict(specs)
    out[tgt_cond] = solved
    return out


def make_stage3_pair(base_spec: SynthSpec, delta_shift: float, alpha_shift: float, channels: Sequence[str],
                     paradigm: ParadigmSpec = ParadigmSpec(), montage: Optional[Montage] = None,
                     subject_id: str = "S01", tolerance: float = 0.25) -> Tuple[Recording, Recording]:
    """
    TwoD and ThreeD recordings whose Rest stages differ (TwoD - ThreeD) by the
    given delta and alpha shifts, in percentage points, on `channels`.
    """
    specs = make_stage_pair(ComparisonStage.III, {Condition.TWO_D: base_spec, Condition.THREE_D: base_spec},
                            {BandName.DELTA: delta_shift, BandName.ALPHA: alpha_shift}, channels,
                            paradigm, montage, subject_id, tolerance)
    return (generate_recording(specs[Condition.TWO_D], paradigm, montage, Condition.TWO_D, subject_id),
            generate_recording(specs[Condition.THREE_D], paradigm, montage, Condition.THREE_D, subject_id))


def load_presets(path: str = PRESETS_PATH) -> dict:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Synthetic preset file not found at '{path}'.")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def participant_seed(seed: int, index: int) -> int:
    """Seed of the index-th participant derived from a cohort seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _jittered(spec: SynthSpec, jitter: float) -> SynthSpec:
    if not jitter:
        return spec
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2,)))
    factors = rng.uniform(1.0 - jitter, 1.0 + jitter, size=spec.envelopes.shape[1:])
    return replace(spec, envelopes=spec.envelopes * factors[None, :, :])


@dataclass
class CohortPlan:
    """A preset resolved into a base spec and the shifts to inject."""
    name: str
    spec: SynthSpec
    participants: int = 1
    channel_jitter: float = 0.0
    shifts: List[dict] = field(default_factory=list)

    @classmethod
    def from_dict(cls, name: str, entry: dict) -> "CohortPlan":
        """A preset entry, or a bare SynthSpec dict (no shifts) when there is no "spec" key."""
        if "spec" not in entry:
            return cls(name=name, spec=SynthSpec.from_dict(entry))
        return cls(name=name, spec=SynthSpec.from_dict(entry["spec"]),
                   participants=int(entry.get("participants", 1)),
                   channel_jitter=float(entry.get("channel_jitter", 0.0)),
                   shifts=list(entry.get("shifts", [])))

    @classmethod
    def from_preset(cls, name: str, presets: Optional[dict] = None) -> "CohortPlan":
        presets = presets if presets is not None else load_presets()
        if name not in presets:
            raise ParameterError(f"Unknown preset '{name}'. Available presets: {', '.join(sorted(presets))}")
        return cls.from_dict(name, presets[name])

    @classmethod
    def from_json_file(cls, filepath: str, encoding: str = "utf-8") -> "CohortPlan":
        return cls.from_dict(os.path.splitext(os.path.basename(filepath))[0], _read_json(filepath, encoding))


def build_cohort(plan: CohortPlan, seed: int, participants: Optional[int] = None,
                 paradigm: ParadigmSpec = ParadigmSpec(), montage: Optional[Montage] = None) -> List[Participant]:
    """Generates TwoD and ThreeD recordings for each participant of a plan."""
    count = participants if participants is not None else plan.participants
    if count < 1:
        raise ParameterError(f"participants must be >= 1, got {count}.")
    cohort = []
    for index in range(count):
        subject_id = f"S{index + 1:02d}"
        base = _jittered(replace(plan.spec, seed=participant_seed(seed, index)), plan.channel_jitter)
        specs = {Condition.TWO_D: base, Condition.THREE_D: base}
        for shift in plan.shifts:
            bands = {BandName.parse(b): float(v) for b, v in shift.get("bands", {}).items()}
            specs = make_stage_pair(ComparisonStage(shift["comparison"]), specs, bands, shift.get("channels", []),
                                    paradigm, montage, subject_id)
        recordings = {cond: generate_recording(specs[cond], paradigm, montage, cond, subject_id)
                      for cond in (Condition.TWO_D, Condition.THREE_D)}
        logger.info("Generated participant %s from preset %s", subject_id, plan.name)
        cohort.append(Participant(subject_id=subject_id, recordings=recordings))
    return cohort
