"""
Command-line interface for ViewingEEG.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import fields

from . import __version__ as pkg_version
from .errors import DataFileError, ViewingEEGError
from .ingest import load_recording, save_cohort, session_paths, validate
from .paradigm import ParadigmSpec
from .pipeline import PipelineConfig, run_bandselect, run_classify, run_featurize
from .report import ResultsReport
from .synth import CohortPlan, build_cohort

logger = logging.getLogger(__name__)

DEFAULTS = PipelineConfig()


def _default(name):
    value = getattr(DEFAULTS, name)
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return value


def _add_input_output(parser, input_required=True):
    parser.add_argument("input", nargs=None if input_required else "?", default=None,
                        help="Cohort index, directory holding cohort.json, or a session manifest.")
    parser.add_argument("-o", "--out-dir", dest="output_dir", default=None,
                        help=f"Results directory. Default is {_default('output_dir')}.")


def _add_spectral_options(parser):
    parser.add_argument("--window-len", type=int, default=None,
                        help=f"Hann window length in samples. Default is {_default('window_len')}.")
    parser.add_argument("--decimation", type=int, default=None,
                        help=f"STFT hop in samples (1 = overlap of window-1). Default is {_default('decimation')}.")
    parser.add_argument("--filter-order", type=int, default=None,
                        help=f"Butterworth order before forward-backward filtering. Default is "
                             f"{_default('filter_order')}.")
    parser.add_argument("--notch-q", type=float, default=None,
                        help=f"Quality factor of the 50 Hz notch. Default is {_default('notch_q')}.")
    parser.add_argument("--artifact-threshold", dest="artifact_threshold_uv", type=float, default=None,
                        help=f"Artifact amplitude in uV. Default is {_default('artifact_threshold_uv')}.")


def _add_band_options(parser):
    parser.add_argument("--stages", nargs="+", choices=["I", "II", "III"], default=None,
                        help=f"Comparison stages. Default is {_default('stages')}.")
    parser.add_argument("--threshold", type=float, default=None,
                        help=f"Meaningful difference in percentage points. Default is {_default('threshold')}.")
    parser.add_argument("--min-channels", type=int, default=None,
                        help=f"Meaningful channels needed for a dominant band. Default is "
                             f"{_default('min_channels')}.")
    parser.add_argument("--aggregation", choices=["mean", "majority"], default=None,
                        help=f"How participant matrices are combined. Default is {_default('aggregation')}.")


def _add_feature_options(parser):
    parser.add_argument("--features", dest="feature_kinds", nargs="+", choices=["stft", "dwt"], default=None,
                        help=f"Feature kinds. Default is {_default('feature_kinds')}.")
    parser.add_argument("--bands", dest="dominant_bands", nargs="+", default=None,
                        help="Bands to classify with. Default: dominant bands of --band-source-stage.")
    parser.add_argument("--band-source-stage", choices=["I", "II", "III"], default=None,
                        help=f"Stage whose dominant bands feed classification. Default is "
                             f"{_default('band_source_stage')}.")
    parser.add_argument("--epoch", dest="epoch_s", type=float, default=None,
                        help=f"Epoch length in seconds. Default is {_default('epoch_s')}.")
    parser.add_argument("--epoch-step", dest="epoch_step_s", type=float, default=None,
                        help=f"Epoch step in seconds. Default is {_default('epoch_step_s')}.")
    parser.add_argument("--wavelet", dest="wavelet_family", type=int, default=None,
                        help=f"Daubechies index N of dbN. Default is {_default('wavelet_family')}.")
    parser.add_argument("--levels", dest="wavelet_levels", type=int, default=None,
                        help=f"DWT levels. Default is {_default('wavelet_levels')}.")
    parser.add_argument("--wavelet-extension", choices=["energy", "symmetric"], default=None,
                        help=f"Boundary extension for lengths not divisible by 2^levels. Default is "
                             f"{_default('wavelet_extension')}.")
    parser.add_argument("--subband-mode", choices=["paper_table", "standard"], default=None,
                        help=f"Sub-band frequency mapping. Default is {_default('subband_mode')}.")
    parser.add_argument("--subbands", dest="subband_selection", nargs="+", default=None,
                        help="DWT sub-bands, e.g. A7 D6. Default: mapped from the dominant bands.")
    parser.add_argument("--split-seed", type=int, default=None,
                        help=f"Train/test split seed. Default is {_default('split_seed')}.")
    parser.add_argument("--chronological-split", action="store_true", default=None,
                        help="Train on the earliest epochs of each class instead of a random split.")


def _add_classify_options(parser):
    parser.add_argument("--classifiers", nargs="+", choices=["plsr", "svm"], default=None,
                        help=f"Classifiers. Default is {_default('classifiers')}.")
    parser.add_argument("--channels", nargs="+", default=None, help="Restrict the search to these channels.")
    parser.add_argument("--folds", dest="cv_folds", type=int, default=None,
                        help=f"K of stratified K-fold CV. Default is {_default('cv_folds')}.")
    parser.add_argument("--cv-seed", type=int, default=None, help=f"CV shuffle seed. Default is {_default('cv_seed')}.")
    parser.add_argument("--strategy", dest="search_strategy", choices=["ranked-prefix", "exhaustive-k"],
                        default=None, help=f"Channel-combination strategy. Default is {_default('search_strategy')}.")
    parser.add_argument("--exhaustive-k", type=int, default=None,
                        help=f"Largest combination for exhaustive-k. Default is {_default('exhaustive_k')}.")
    parser.add_argument("--max-prefix", type=int, default=None, help="Evaluate only the first N ranked prefixes.")
    parser.add_argument("--rank-by", choices=["test", "cv"], default=None,
                        help=f"Single-channel ranking score. Default is {_default('rank_by')}.")
    parser.add_argument("--n-jobs", type=int, default=None, help=f"joblib workers. Default is {_default('n_jobs')}.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyviewingeeg-cli",
        description="Band selection and PLSR/SVM classification of resting EEG after 2D and 3D viewing."
    )
    parser.add_argument("--config", help="JSON file of PipelineConfig fields; flags override it.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level. Default is WARNING.")
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s (PyViewingEEG {pkg_version})",
        help="Show program's version number and exit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Write a synthetic cohort.")
    source = synth.add_mutually_exclusive_group()
    source.add_argument("--preset", default="stage3-paper-like", help="Named preset. Default is stage3-paper-like.")
    source.add_argument("--spec-file", help="SynthSpec or preset-style JSON file.")
    synth.add_argument("--seed", type=int, default=0, help="Cohort seed. Default is 0.")
    synth.add_argument("--participants", type=int, default=None, help="Participants. Default: the preset's count.")
    synth.add_argument("--trials", type=int, default=None, help="Trials per condition. Default is 15.")
    synth.add_argument("-o", "--out-dir", required=True, help="Directory receiving cohort.json and sessions.")

    check = sub.add_parser("ingest-check", help="Validate recordings and print a JSON report.")
    check.add_argument("input", help="Cohort index, directory holding cohort.json, or a session manifest.")
    check.add_argument("--artifact-threshold", type=float, default=DEFAULTS.artifact_threshold_uv,
                       help=f"Artifact amplitude in uV. Default is {DEFAULTS.artifact_threshold_uv}.")

    bandselect = sub.add_parser("bandselect", help="Dominant-band selection per comparison stage.")
    _add_input_output(bandselect, input_required=False)
    _add_spectral_options(bandselect)
    _add_band_options(bandselect)

    featurize = sub.add_parser("featurize", help="Write STFT/DWT feature CSVs.")
    _add_input_output(featurize, input_required=False)
    _add_spectral_options(featurize)
    _add_band_options(featurize)
    _add_feature_options(featurize)

    classify = sub.add_parser("classify", help="Per-channel classification and channel-combination search.")
    _add_input_output(classify, input_required=False)
    _add_spectral_options(classify)
    _add_band_options(classify)
    _add_feature_options(classify)
    _add_classify_options(classify)

    report = sub.add_parser("report", help="Summarize a results directory.")
    report.add_argument("results_dir", help="Directory written by bandselect/classify.")
    report.add_argument("-o", "--out-dir", default=None, help="Default is RESULTS_DIR/report.")
    return parser


def _config_from_args(args) -> PipelineConfig:
    config = PipelineConfig.from_json_file(args.config) if args.config else PipelineConfig()
    names = {f.name for f in fields(PipelineConfig)}
    return config.with_overrides(**{k: v for k, v in vars(args).items() if k in names})


def cmd_synth(args) -> int:
    plan = CohortPlan.from_json_file(args.spec_file) if args.spec_file else CohortPlan.from_preset(args.preset)
    paradigm = ParadigmSpec(trials_per_condition=args.trials) if args.trials else ParadigmSpec()
    participants = build_cohort(plan, args.seed, args.participants, paradigm)
    path = save_cohort(participants, args.out_dir)
    print(f"Wrote {len(participants)} participant(s) from '{plan.name}' to '{path}'")
    return 0


def cmd_ingest_check(args) -> int:
    if not os.path.exists(args.input):
        raise DataFileError("Input not found", args.input)
    reports = {}
    for path in session_paths(args.input):
        try:
            reports[path] = validate(load_recording(path), args.artifact_threshold).to_dict()
        except ViewingEEGError as e:
            reports[path] = {"ok": False, "errors": [str(e)], "warnings": [], "artifact_counts": []}
    print(json.dumps(reports, indent=2, sort_keys=True))
    return 0 if all(r["ok"] for r in reports.values()) else 3


def cmd_bandselect(args) -> int:
    config = _config_from_args(args)
    reports = run_bandselect(config)
    for stage, report in reports.items():
        print(f"Stage {stage.value}: {', '.join(b.name.value for b in report.selected) or 'no dominant band'}")
    return 0


def cmd_featurize(args) -> int:
    config = _config_from_args(args)
    datasets = run_featurize(config)
    print(f"Wrote {len(datasets)} feature file(s) to '{os.path.join(config.output_dir, 'features')}'")
    return 0


def cmd_classify(args) -> int:
    config = _config_from_args(args)
    _, summary = run_classify(config)
    for row in summary["cohort"]:
        accuracy = row["mean_test_accuracy"]
        print(f"{row['feature_kind']}/{row['classifier']}: mean best-combination test accuracy "
              f"{'-' if accuracy is None else f'{accuracy:.4f}'}")
    return 0


def cmd_report(args) -> int:
    report = ResultsReport.from_results_dir(args.results_dir)
    out_dir = args.out_dir or os.path.join(args.results_dir, "report")
    written = report.write(out_dir)
    print(f"Wrote {len(written)} report file(s) to '{out_dir}'")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "ingest-check": cmd_ingest_check,
    "bandselect": cmd_bandselect,
    "featurize": cmd_featurize,
    "classify": cmd_classify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    """
    Entry point of `pyviewingeeg-cli`.

    Returns:
        int: 0 on success, 2 usage error, 3 data error, 4 numerical failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s - %(levelname)s - %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ViewingEEGError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
