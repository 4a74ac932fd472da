"""
Multi-level Daubechies DWT built on PyWavelets, with sub-band frequency bookkeeping.

Extension mode per decomposition, by ExtensionPolicy:
    length divisible by 2**levels -> 'periodization' (both policies)
    energy, db1                   -> 'zero' (Haar pairs stay orthogonal, so energy is kept)
    energy, dbN with N > 1        -> 'symmetric'
    symmetric                     -> 'symmetric' (half-point) for every family
Every level halves with ceil for db1; reconstruction truncates back to the
recorded per-level input lengths.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple, Union

import numpy as np
import pywt

from .errors import ParameterError, StructuralError
from .paradigm import BandDef, DEFAULT_SAMPLE_RATE


class SubbandMode(Enum):
    STANDARD = "standard"
    PAPER_TABLE = "paper_table"


class ExtensionPolicy(Enum):
    ENERGY = "energy"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class WaveletSpec:
    family: int = 1
    levels: int = 7
    extension: ExtensionPolicy = ExtensionPolicy.ENERGY

    def __post_init__(self):
        if not 1 <= int(self.family) <= 20:
            raise ParameterError(f"Daubechies index must be in 1..20, got {self.family}.")
        if int(self.levels) < 1:
            raise ParameterError(f"levels must be >= 1, got {self.levels}.")
        try:
            object.__setattr__(self, "extension", ExtensionPolicy(self.extension))
        except ValueError:
            raise ParameterError(f"Unknown extension policy '{self.extension}'.") from None

    @property
    def name(self) -> str:
        return f"db{self.family}"

    def mode_for(self, length: int) -> str:
        if length % (2 ** self.levels) == 0:
            return "periodization"
        if self.extension is ExtensionPolicy.ENERGY and self.family == 1:
            return "zero"
        return "symmetric"


@dataclass(frozen=True, eq=False)
class DwtCoeffs:
    """Details D1..DL (finest first), approximation AL and what is needed to invert them."""
    details: Tuple[np.ndarray, ...]
    approximation: np.ndarray
    spec: WaveletSpec
    original_len: int
    mode: str
    level_lengths: Tuple[int, ...]

    def subband(self, name: str) -> np.ndarray:
        kind, level = parse_subband(name, self.spec.levels)
        if kind == "A":
            if level != self.spec.levels:
                raise ParameterError(f"Only A{self.spec.levels} is kept, not {name}.")
            return self.approximation
        return self.details[level - 1]

    def all_coefficients(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.details) + (self.approximation,)


def parse_subband(name: Union[str, int], levels: int) -> Tuple[str, int]:
    """'D3' -> ('D', 3), 'A7' -> ('A', 7), 3 -> ('D', 3)."""
    if isinstance(name, (int, np.integer)):
        kind, level = "D", int(name)
    else:
        match = re.fullmatch(r"([ADad])(\d+)", str(name).strip())
        if not match:
            raise ParameterError(f"Sub-band must look like 'D3' or 'A7', got '{name}'.")
        kind, level = match.group(1).upper(), int(match.group(2))
    if not 1 <= level <= levels:
        raise ParameterError(f"Sub-band level {level} is outside 1..{levels}.")
    if kind == "A" and level != levels:
        raise ParameterError(f"The approximation sub-band is A{levels}, got {kind}{level}.")
    return kind, level


def dwt_decompose(series, spec: WaveletSpec = WaveletSpec()) -> DwtCoeffs:
    """
    Cascade filter bank: split the running approximation into (A, D) and recurse on A.

    Args:
        series: One channel, at least 2**levels samples.
        spec (WaveletSpec): Family and depth.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ParameterError(f"dwt_decompose expects a single channel, got shape {x.shape}.")
    if x.size < 2 ** spec.levels:
        raise ParameterError(f"Series of {x.size} samples is too short for {spec.levels} levels "
                             f"(needs {2 ** spec.levels}).")
    wavelet = pywt.Wavelet(spec.name)
    mode = spec.mode_for(x.size)
    details, lengths = [], []
    approx = x
    for _ in range(spec.levels):
        lengths.append(approx.size)
        approx, detail = pywt.dwt(approx, wavelet, mode=mode)
        details.append(detail)
    return DwtCoeffs(details=tuple(details), approximation=approx, spec=spec, original_len=x.size,
                     mode=mode, level_lengths=tuple(lengths))


def dwt_reconstruct(coeffs: DwtCoeffs) -> np.ndarray:
    """Inverse cascade; returns `original_len` samples."""
    levels = coeffs.spec.levels
    if len(coeffs.details) != levels or len(coeffs.level_lengths) != levels:
        raise StructuralError(f"Expected {levels} detail series and level lengths, got "
                              f"{len(coeffs.details)} and {len(coeffs.level_lengths)}.")
    if coeffs.level_lengths[0] != coeffs.original_len:
        raise StructuralError("First level length does not match original_len.")
    wavelet = pywt.Wavelet(coeffs.spec.name)
    approx = np.asarray(coeffs.approximation, dtype=float)
    for level in range(levels, 0, -1):
        detail = np.asarray(coeffs.details[level - 1], dtype=float)
        if detail.size != approx.size:
            raise StructuralError(f"Level {level}: approximation has {approx.size} coefficients, "
                                  f"detail has {detail.size}.")
        target = coeffs.level_lengths[level - 1]
        approx = pywt.idwt(approx, detail, wavelet, mode=coeffs.mode)
        if approx.size < target:
            raise StructuralError(f"Level {level} reconstructs {approx.size} samples, expected {target}.")
        approx = approx[:target]
    return approx


def subband_range(subband: Union[int, str], sample_rate: int = DEFAULT_SAMPLE_RATE, levels: int = 7,
                  mode: Union[SubbandMode, str] = SubbandMode.PAPER_TABLE) -> Tuple[float, float]:
    """
    Nominal frequency range of a sub-band.

    standard:     Dk = (fs/2^(k+1), fs/2^k],  AL = [0, fs/2^(L+1)]
    paper_table:  Dk = (fs/2^k, fs/2^(k-1)),  AL = [0, fs/2^L]

    paper_table is the standard mapping shifted up one octave (Nyquist taken
    as fs); at 512 Hz it gives D7 = 4-8, D6 = 8-16, A7 = 0-4 but also
    D1 = 256-512, above Nyquist. Both are kept, neither is corrected.
    """
    mode = SubbandMode(mode)
    kind, level = parse_subband(subband, levels)
    shift = 0 if mode is SubbandMode.PAPER_TABLE else 1
    if kind == "A":
        return 0.0, sample_rate / 2 ** (level + shift)
    return sample_rate / 2 ** (level + shift), sample_rate / 2 ** (level + shift - 1)


def subband_for_band(band: BandDef, sample_rate: int = DEFAULT_SAMPLE_RATE, levels: int = 7,
                     mode: Union[SubbandMode, str] = SubbandMode.PAPER_TABLE) -> str:
    """The sub-band whose nominal range overlaps `band` the most (deepest wins ties)."""
    names = [f"A{levels}"] + [f"D{k}" for k in range(levels, 0, -1)]
    best, best_overlap = names[0], -1.0
    for name in names:
        lo, hi = subband_range(name, sample_rate, levels, mode)
        overlap = min(hi, band.f_hi) - max(lo, band.f_lo)
        if overlap > best_overlap:
            best, best_overlap = name, overlap
    return best


def default_subband_selection(bands: Sequence[BandDef], sample_rate: int = DEFAULT_SAMPLE_RATE,
                              spec: WaveletSpec = WaveletSpec(),
                              mode: Union[SubbandMode, str] = SubbandMode.PAPER_TABLE) -> Tuple[str, ...]:
    """Maps dominant bands to sub-bands in band order, dropping repeats (delta -> A7, alpha -> D6)."""
    chosen = []
    for band in bands:
        name = subband_for_band(band, sample_rate, spec.levels, mode)
        if name not in chosen:
            chosen.append(name)
    return tuple(chosen)
