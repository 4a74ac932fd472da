import json
import os
import tempfile
import unittest

import numpy as np

from ViewingEEG.errors import DataFileError
from ViewingEEG.ingest import (
    COHORT_NAME,
    Participant,
    load_cohort,
    load_inputs,
    load_recording,
    save_cohort,
    save_recording,
    session_paths,
    validate,
)
from ViewingEEG.paradigm import Condition, ParadigmSpec, Recording, STANDARD_CHANNELS, Trial, standard_montage

SMALL = ParadigmSpec(relax_s=1.0, watch_s=1.0, rest_s=1.0, trials_per_condition=2)


def make_recording(condition=Condition.TWO_D, subject_id="S01", seed=0, scale=10.0):
    rng = np.random.default_rng(seed)
    trials = [Trial(rng.normal(scale=scale, size=(20, SMALL.total_samples(512))), SMALL)
              for _ in range(SMALL.trials_per_condition)]
    return Recording(subject_id=subject_id, condition=condition, trials=tuple(trials), montage=standard_montage(),
                     paradigm=SMALL)


class TestIngest(unittest.TestCase):

    def test_round_trip_reorders_channels(self):
        recording = make_recording()
        shuffled = list(reversed(STANDARD_CHANNELS))
        with tempfile.TemporaryDirectory() as tmp:
            manifest = save_recording(recording, tmp, channel_order=shuffled)
            self.assertEqual(manifest.channel_order, shuffled)
            loaded = load_recording(tmp)
        self.assertEqual(loaded.subject_id, "S01")
        self.assertIs(loaded.condition, Condition.TWO_D)
        self.assertEqual(loaded.montage.channels, STANDARD_CHANNELS)
        for original, restored in zip(recording.trials, loaded.trials):
            np.testing.assert_array_equal(original.samples, restored.samples)

    def test_missing_manifest(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(DataFileError) as ctx:
                load_recording(tmp)
            self.assertIn("manifest.json", str(ctx.exception))

    def test_channel_count_mismatch_names_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_recording(make_recording(), tmp)
            path = os.path.join(tmp, "trial_01.csv")
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
            with open(path, "w", encoding="utf-8") as f:
                f.write("\n".join(line.rsplit(",", 1)[0] for line in lines) + "\n")
            with self.assertRaises(DataFileError) as ctx:
                load_recording(tmp)
            self.assertEqual(ctx.exception.path, path)
            self.assertIn("Channel-count mismatch", str(ctx.exception))

    def test_non_numeric_sample_location(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_recording(make_recording(), tmp)
            path = os.path.join(tmp, "trial_02.csv")
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
            fields = lines[2].split(",")
            fields[0] = "abc"
            lines[2] = ",".join(fields)
            with open(path, "w", encoding="utf-8") as f:
                f.write("\n".join(lines) + "\n")
            with self.assertRaises(DataFileError) as ctx:
                load_recording(tmp)
        self.assertEqual(ctx.exception.location, (3, STANDARD_CHANNELS[0]))

    def test_sample_count_mismatch(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_recording(make_recording(), tmp)
            path = os.path.join(tmp, "trial_01.csv")
            with open(path, "r", encoding="utf-8") as f:
                lines = f.read().splitlines()
            with open(path, "w", encoding="utf-8") as f:
                f.write("\n".join(lines[:-10]) + "\n")
            with self.assertRaises(DataFileError) as ctx:
                load_recording(tmp)
            self.assertIn("Sample-count mismatch", str(ctx.exception))

    def test_manifest_with_wrong_trial_count(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_recording(make_recording(), tmp)
            manifest_path = os.path.join(tmp, "manifest.json")
            with open(manifest_path, "r", encoding="utf-8") as f:
                data = json.load(f)
            data["trial_files"] = data["trial_files"][:1]
            with open(manifest_path, "w", encoding="utf-8") as f:
                json.dump(data, f)
            with self.assertRaises(DataFileError):
                load_recording(manifest_path)

    def test_validate_flags_artifacts(self):
        report = validate(make_recording(scale=1.0))
        self.assertTrue(report.ok)
        self.assertEqual(report.artifact_counts, [0, 0])

        samples = np.zeros((20, SMALL.total_samples(512)))
        samples[3, 100] = 150.0
        samples[4, 200] = -120.0
        trials = (Trial(samples, SMALL), Trial(np.zeros_like(samples), SMALL))
        report = validate(Recording("S02", Condition.THREE_D, trials, montage=standard_montage(), paradigm=SMALL))
        self.assertTrue(report.ok)
        self.assertEqual(report.artifact_counts, [2, 0])
        self.assertEqual(len(report.warnings), 1)

    def test_validate_structural_errors(self):
        trials = (Trial(np.zeros((20, 100)), SMALL),)
        report = validate(Recording("S03", Condition.TWO_D, trials, montage=standard_montage(), paradigm=SMALL))
        self.assertFalse(report.ok)
        self.assertEqual(len(report.errors), 2)

    def test_cohort_round_trip(self):
        participants = [
            Participant("S01", {Condition.TWO_D: make_recording(Condition.TWO_D, "S01", 1),
                                Condition.THREE_D: make_recording(Condition.THREE_D, "S01", 2)}),
            Participant("S02", {Condition.TWO_D: make_recording(Condition.TWO_D, "S02", 3),
                                Condition.THREE_D: make_recording(Condition.THREE_D, "S02", 4)}),
        ]
        with tempfile.TemporaryDirectory() as tmp:
            path = save_cohort(participants, tmp)
            self.assertEqual(os.path.basename(path), COHORT_NAME)
            self.assertEqual(len(session_paths(tmp)), 4)
            loaded = load_cohort(path)
            from_dir = load_inputs(tmp)
            single = load_inputs(os.path.join(tmp, "S02", "ThreeD"))
        self.assertEqual([p.subject_id for p in loaded], ["S01", "S02"])
        self.assertEqual([p.subject_id for p in from_dir], ["S01", "S02"])
        np.testing.assert_array_equal(loaded[1].recording(Condition.THREE_D).trials[0].samples,
                                      participants[1].recording(Condition.THREE_D).trials[0].samples)
        self.assertEqual(list(single[0].recordings), [Condition.THREE_D])

    def test_load_inputs_missing_path(self):
        with self.assertRaises(DataFileError) as ctx:
            load_inputs("/nonexistent/cohort.json")
        self.assertIn("/nonexistent/cohort.json", str(ctx.exception))


if __name__ == '__main__':
    unittest.main()
