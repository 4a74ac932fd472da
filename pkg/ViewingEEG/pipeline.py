"""
Batch pipeline: configuration plus the band-selection, featurization and
classification runs behind the CLI subcommands.

Every run writes into `PipelineConfig.output_dir`:

    bandselect/stage_<S>/report.json, difference_mean.csv, difference_<subject>.csv
    features/<subject>_<kind>.csv
    classify/<subject>/<kind>_<classifier>.json, classify/summary.json
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classify import ChannelSearchResult, ClassifierKind, SearchSettings, SearchStrategy, channel_combination_search
from .classify.channels import MAX_EXHAUSTIVE_K, RankBy
from .classify.evaluation import DEFAULT_C_VALUES, DEFAULT_MAX_COMPONENTS, DEFAULT_SIGMA_SCALES
from .errors import DataFileError, DegenerateInputError, ParameterError, StructuralError
from .features import FeatureDataset, FeatureKind, FeatureSettings, assemble_dataset
from .ingest import Participant, _read_json, load_inputs
from .paradigm import BandDef, ComparisonStage, Condition, Stage, canonical_band, stage_slice
from .preprocess import PreprocessSettings, preprocess_for_band_selection
from .spectral import (
    BandPowerMatrix,
    DominantBandReport,
    band_difference_matrix,
    comparison_pair,
    select_dominant_bands,
    stage_band_powers,
)
from .wavelet import SubbandMode, WaveletSpec

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """
    Parameters of a pipeline run. Defaults reproduce the study setup.

    `decimation` is the STFT hop in samples (1 = full overlap). Leaving
    `dominant_bands` unset derives the classification bands from band
    selection on `band_source_stage`.
    """
    input: Optional[str] = None
    output_dir: str = "results"
    # Band selection
    stages: List[str] = field(default_factory=lambda: ["I", "II", "III"])
    threshold: float = 2.0
    min_channels: int = 3
    aggregation: str = "mean"
    # Preprocessing
    artifact_threshold_uv: float = 100.0
    max_artifact_fraction: Optional[float] = None
    notch_first: bool = False
    notch_q: float = 35.0
    filter_order: int = 3
    # STFT and epoching
    window_len: int = 512
    decimation: int = 1
    epoch_s: float = 4.0
    epoch_step_s: float = 0.5
    # Features
    feature_kinds: List[str] = field(default_factory=lambda: ["stft", "dwt"])
    dominant_bands: Optional[List[str]] = None
    band_source_stage: str = "III"
    wavelet_family: int = 1
    wavelet_levels: int = 7
    wavelet_extension: str = "energy"
    subband_mode: str = "paper_table"
    subband_selection: Optional[List[str]] = None
    # Classification
    classifiers: List[str] = field(default_factory=lambda: ["plsr", "svm"])
    channels: Optional[List[str]] = None
    cv_folds: int = 10
    plsr_components: int = DEFAULT_MAX_COMPONENTS
    svm_sigma_scales: List[float] = field(default_factory=lambda: list(DEFAULT_SIGMA_SCALES))
    svm_c_values: List[float] = field(default_factory=lambda: list(DEFAULT_C_VALUES))
    standardize: bool = True
    search_strategy: str = "ranked-prefix"
    exhaustive_k: int = 2
    max_prefix: Optional[int] = None
    rank_by: str = "test"
    cross_evaluate: bool = True
    n_jobs: int = 1
    # Seeds and split
    split_seed: int = 0
    cv_seed: int = 0
    train_per_class: Optional[int] = None
    chronological_split: bool = False

    def validate(self) -> "PipelineConfig":
        """Checks value ranges and enum spellings; returns self."""
        try:
            for stage in self.stages:
                ComparisonStage(stage)
            ComparisonStage(self.band_source_stage)
            for kind in self.feature_kinds:
                FeatureKind(kind)
            for kind in self.classifiers:
                ClassifierKind(kind)
            SubbandMode(self.subband_mode)
            SearchStrategy(self.search_strategy)
            RankBy(self.rank_by)
        except ValueError as e:
            raise ParameterError(f"Invalid configuration value: {e}") from None
        if not self.stages or not self.feature_kinds or not self.classifiers:
            raise ParameterError("stages, feature_kinds and classifiers must each list at least one entry.")
        if self.aggregation not in ("mean", "majority"):
            raise ParameterError(f"aggregation must be 'mean' or 'majority', got '{self.aggregation}'.")
        if self.threshold < 0 or self.min_channels < 1:
            raise ParameterError("threshold must be >= 0 and min_channels >= 1.")
        if self.decimation < 1 or self.window_len < 2:
            raise ParameterError("decimation must be >= 1 and window_len >= 2.")
        if self.cv_folds < 2:
            raise ParameterError(f"cv_folds must be >= 2, got {self.cv_folds}.")
        if not 1 <= self.exhaustive_k <= MAX_EXHAUSTIVE_K:
            raise ParameterError(f"exhaustive_k must be in 1..{MAX_EXHAUSTIVE_K}, got {self.exhaustive_k}.")
        if self.dominant_bands is not None:
            for name in self.dominant_bands:
                canonical_band(name)
        WaveletSpec(self.wavelet_family, self.wavelet_levels, self.wavelet_extension)
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"Unknown configuration keys: {unknown}")
        return cls(**data).validate()

    @classmethod
    def from_json_file(cls, filepath: str, encoding: str = "utf-8") -> "PipelineConfig":
        data = _read_json(filepath, encoding)
        if not isinstance(data, dict):
            raise DataFileError("Configuration must be a JSON object", filepath)
        return cls.from_dict(data)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None}).validate()

    def preprocess_settings(self) -> PreprocessSettings:
        return PreprocessSettings(notch_q=self.notch_q, order=self.filter_order,
                                  artifact_threshold_uv=self.artifact_threshold_uv,
                                  max_artifact_fraction=self.max_artifact_fraction, notch_first=self.notch_first)

    def feature_settings(self) -> FeatureSettings:
        return FeatureSettings(
            epoch_s=self.epoch_s,
            step_s=self.epoch_step_s,
            window_len=self.window_len,
            hop=self.decimation,
            wavelet=WaveletSpec(self.wavelet_family, self.wavelet_levels, self.wavelet_extension),
            subband_mode=SubbandMode(self.subband_mode),
            subband_selection=tuple(self.subband_selection) if self.subband_selection else None,
            train_per_class=self.train_per_class,
            chronological=self.chronological_split,
            preprocess=self.preprocess_settings(),
        )

    def search_settings(self) -> SearchSettings:
        return SearchSettings(
            k_folds=self.cv_folds,
            cv_seed=self.cv_seed,
            standardize=self.standardize,
            n_jobs=self.n_jobs,
            rank_by=RankBy(self.rank_by),
            exhaustive_k=self.exhaustive_k,
            max_prefix=self.max_prefix,
            max_components=self.plsr_components,
            sigma_scales=tuple(self.svm_sigma_scales),
            c_values=tuple(self.svm_c_values),
        )


def write_json(path: str, data) -> str:
    """Writes sorted, indented JSON with a trailing newline."""
    try:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise DataFileError(f"Cannot write output: {e.strerror or e}", path) from e
    return path


def load_participants(config: PipelineConfig) -> List[Participant]:
    if not config.input:
        raise ParameterError("No input given; set 'input' in the configuration or pass INPUT.")
    if not os.path.exists(config.input):
        raise DataFileError("Input not found", config.input)
    return load_inputs(config.input)


class _StageMatrices:
    """Band-selection preprocessing and stage matrices, computed once per (participant, condition)."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._averaged = {}
        self._matrices = {}

    def matrix(self, participant: Participant, condition: Condition, stage: Stage) -> BandPowerMatrix:
        key = (participant.subject_id, condition, stage)
        if key not in self._matrices:
            recording = participant.recording(condition)
            averaged_key = (participant.subject_id, condition)
            if averaged_key not in self._averaged:
                self._averaged[averaged_key] = preprocess_for_band_selection(
                    recording, self.config.preprocess_settings())
            segment = stage_slice(self._averaged[averaged_key], stage)
            self._matrices[key] = stage_band_powers(
                segment, recording.montage, window_len=self.config.window_len, hop=self.config.decimation,
                label=f"{condition.value} {stage.value}")
            logger.info("Computed %s %s %s band powers", participant.subject_id, condition.value, stage.value)
        return self._matrices[key]


def band_reports(config: PipelineConfig, participants: Sequence[Participant],
                 stages: Optional[Sequence[str]] = None):
    """
    Band selection per comparison stage.

    Returns:
        list: (stage, DominantBandReport, per-participant DifferenceMatrix list) tuples.
    """
    matrices = _StageMatrices(config)
    out = []
    for name in stages or config.stages:
        stage = ComparisonStage(name)
        (cond_a, stage_a), (cond_b, stage_b) = comparison_pair(stage)
        diffs = []
        for participant in participants:
            diff = band_difference_matrix(matrices.matrix(participant, cond_a, stage_a),
                                          matrices.matrix(participant, cond_b, stage_b))
            diffs.append(replace(diff, label=participant.subject_id))
        report = select_dominant_bands(diffs, config.threshold, config.min_channels, config.aggregation,
                                       stage=stage.value)
        out.append((stage, report, diffs))
    return out


def run_bandselect(config: PipelineConfig,
                   participants: Optional[Sequence[Participant]] = None) -> Dict[ComparisonStage, DominantBandReport]:
    """Runs band selection for every configured stage and writes its reports and difference CSVs."""
    participants = participants if participants is not None else load_participants(config)
    reports = {}
    for stage, report, diffs in band_reports(config, participants):
        stage_dir = os.path.join(config.output_dir, "bandselect", f"stage_{stage.value}")
        write_json(os.path.join(stage_dir, "report.json"), report.to_dict())
        report.mean_difference.to_csv(os.path.join(stage_dir, "difference_mean.csv"))
        for diff in diffs:
            diff.to_csv(os.path.join(stage_dir, f"difference_{diff.label}.csv"))
        reports[stage] = report
    return reports


def resolve_dominant_bands(config: PipelineConfig, participants: Sequence[Participant]) -> List[BandDef]:
    """Configured bands, or the bands band selection picks on `band_source_stage`."""
    if config.dominant_bands:
        return [canonical_band(name) for name in config.dominant_bands]
    (_, report, _), = band_reports(config, participants, [config.band_source_stage])
    if not report.selected:
        raise DegenerateInputError(
            f"Band selection on stage {config.band_source_stage} found no dominant band; "
            f"set dominant_bands (e.g. --bands Delta Alpha) to classify anyway.")
    return report.selected


def build_datasets(config: PipelineConfig, participants: Sequence[Participant],
                   bands: Sequence[BandDef]) -> List[FeatureDataset]:
    """One dataset per participant and feature kind, in participant then kind order."""
    datasets = []
    settings = config.feature_settings()
    for participant in participants:
        for kind in config.feature_kinds:
            dataset = assemble_dataset(participant.recording(Condition.TWO_D),
                                       participant.recording(Condition.THREE_D), kind, bands,
                                       seed=config.split_seed, settings=settings)
            if config.channels:
                dataset = dataset.subset(config.channels)
            datasets.append(dataset)
    return datasets


def run_featurize(config: PipelineConfig,
                  participants: Optional[Sequence[Participant]] = None) -> List[FeatureDataset]:
    """Builds the feature datasets and writes one long-format CSV per participant and kind."""
    participants = participants if participants is not None else load_participants(config)
    datasets = build_datasets(config, participants, resolve_dominant_bands(config, participants))
    for dataset in datasets:
        path = os.path.join(config.output_dir, "features", f"{dataset.subject_id}_{dataset.kind.value}.csv")
        os.makedirs(os.path.dirname(path), exist_ok=True)
        dataset.to_csv(path)
    return datasets


def _mean_or_none(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def summarize(results: Sequence[ChannelSearchResult], bands: Sequence[BandDef]) -> dict:
    """Per-run best combinations plus cohort averages per (feature kind, classifier)."""
    rows = []
    for result in results:
        best = result.best.evaluations[result.kind]
        rows.append({
            "subject_id": result.subject_id,
            "feature_kind": result.feature_kind,
            "classifier": result.kind.value,
            "best_channels": list(result.best.channels),
            "best_cv_accuracy": best.cv_accuracy,
            "best_test": best.test.to_dict(),
            "channel_ranking": [r.channels[0] for r in result.ranking],
        })
    cohort = []
    keys = sorted({(r["feature_kind"], r["classifier"]) for r in rows})
    for feature_kind, classifier in keys:
        group = [r for r in rows if r["feature_kind"] == feature_kind and r["classifier"] == classifier]
        cohort.append({
            "feature_kind": feature_kind,
            "classifier": classifier,
            "n_participants": len(group),
            "mean_test_accuracy": _mean_or_none([r["best_test"]["accuracy"] for r in group]),
            "mean_sensitivity": _mean_or_none([r["best_test"]["sensitivity"] for r in group]),
            "mean_specificity": _mean_or_none([r["best_test"]["specificity"] for r in group]),
            "mean_cv_accuracy": _mean_or_none([r["best_cv_accuracy"] for r in group]),
        })
    return {"dominant_bands": [b.name.value for b in bands], "results": rows, "cohort": cohort}


def run_classify(config: PipelineConfig,
                 participants: Optional[Sequence[Participant]] = None) -> Tuple[List[ChannelSearchResult], dict]:
    """
    Channel ranking and combination search for every participant, feature
    kind and classifier. Writes one JSON per search and `classify/summary.json`.
    """
    participants = participants if participants is not None else load_participants(config)
    for participant in participants:
        for condition in Condition:
            participant.recording(condition)
    bands = resolve_dominant_bands(config, participants)
    settings = config.search_settings()
    also = list(config.classifiers) if config.cross_evaluate else []
    results = []
    for dataset in build_datasets(config, participants, bands):
        for classifier in config.classifiers:
            result = channel_combination_search(dataset, classifier, config.search_strategy, settings,
                                                also_evaluate=also)
            write_json(os.path.join(config.output_dir, "classify", dataset.subject_id,
                                    f"{dataset.kind.value}_{classifier}.json"), result.to_dict())
            best = result.best.evaluations[result.kind]
            logger.info("%s %s/%s best %s: test accuracy %s", dataset.subject_id, dataset.kind.value, classifier,
                        ",".join(result.best.channels), best.test.accuracy)
            results.append(result)
    if not results:
        raise StructuralError("Nothing to classify.")
    summary = summarize(results, bands)
    write_json(os.path.join(config.output_dir, "classify", "summary.json"), summary)
    return results, summary
