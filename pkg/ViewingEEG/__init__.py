# ViewingEEG/__init__.py

"""
ViewingEEG Package
------------------

Band selection and channel-wise PLSR/SVM classification of resting-state
EEG recorded after 2D and 3D video viewing, plus a synthetic session
generator with known band-power differences.
"""

__version__ = "0.1.0"

from .paradigm import BandName, ComparisonStage, Condition, Montage, ParadigmSpec, Recording, Stage, Trial
from .ingest import Participant, load_inputs, load_recording, save_cohort, save_recording, validate
from .spectral import select_dominant_bands, stage_band_powers, stft_spectrogram
from .wavelet import ExtensionPolicy, WaveletSpec, dwt_decompose, dwt_reconstruct
from .features import FeatureKind, assemble_dataset
from .synth import SynthSpec, generate_recording, make_stage3_pair
from .pipeline import PipelineConfig

__all__ = [
    'BandName',
    'ComparisonStage',
    'Condition',
    'ExtensionPolicy',
    'FeatureKind',
    'Montage',
    'ParadigmSpec',
    'Participant',
    'PipelineConfig',
    'Recording',
    'Stage',
    'SynthSpec',
    'Trial',
    'WaveletSpec',
    'assemble_dataset',
    'dwt_decompose',
    'dwt_reconstruct',
    'generate_recording',
    'load_inputs',
    'load_recording',
    'make_stage3_pair',
    'save_cohort',
    'save_recording',
    'select_dominant_bands',
    'stage_band_powers',
    'stft_spectrogram',
    'validate',
]
