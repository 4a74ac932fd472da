import unittest

import numpy as np

from ViewingEEG.errors import ParameterError, StructuralError
from ViewingEEG.paradigm import (
    BandName,
    CANONICAL_BANDS,
    ComparisonStage,
    Condition,
    Montage,
    ParadigmSpec,
    STANDARD_CHANNELS,
    Stage,
    Trial,
    canonical_band,
    stage_slice,
    standard_montage,
)


class TestParadigm(unittest.TestCase):

    def test_standard_montage(self):
        montage = standard_montage()
        self.assertEqual(len(montage.channels), 20)
        self.assertEqual(montage.reference, "Cz")
        self.assertEqual(montage.index("Oz"), 19)
        self.assertEqual(montage.lobe("T5"), "temporal")
        grouped = montage.by_lobe()
        self.assertEqual(sum(len(v) for v in grouped.values()), 20)
        self.assertEqual(grouped["occipital"], ("O1", "O2", "Oz"))

    def test_montage_rejects_bad_labels(self):
        with self.assertRaises(StructuralError):
            Montage(channels=STANDARD_CHANNELS[:19] + ("Fp1",))
        with self.assertRaises(StructuralError):
            Montage(channels=STANDARD_CHANNELS[:19] + ("X9",))
        with self.assertRaises(StructuralError):
            standard_montage().index("Cz")

    def test_paradigm_bookkeeping(self):
        paradigm = ParadigmSpec()
        self.assertEqual(paradigm.total_samples(512), 16384)
        self.assertEqual(paradigm.stage_bounds(Stage.RELAX, 512), (0, 4608))
        self.assertEqual(paradigm.stage_bounds(Stage.WATCH, 512), (4608, 11776))
        self.assertEqual(paradigm.stage_bounds(Stage.REST, 512), (11776, 16384))
        self.assertEqual(ParadigmSpec.from_dict(paradigm.to_dict()), paradigm)

    def test_fractional_samples_rejected(self):
        with self.assertRaises(ParameterError):
            ParadigmSpec(rest_s=9.001).total_samples(512)
        with self.assertRaises(ParameterError):
            ParadigmSpec(trials_per_condition=0)

    def test_stage_slice(self):
        samples = np.tile(np.arange(16384, dtype=float), (20, 1))
        segment = stage_slice(Trial(samples), Stage.REST)
        self.assertEqual(segment.samples.shape, (20, 4608))
        self.assertEqual(segment.samples[0, 0], 11776.0)
        self.assertAlmostEqual(segment.duration_s, 9.0)
        trimmed = stage_slice(Trial(samples), Stage.REST, trim_s=0.5)
        self.assertEqual(trimmed.samples.shape, (20, 4608 - 512))

    def test_stage_slice_malformed_trial(self):
        with self.assertRaises(StructuralError) as ctx:
            stage_slice(Trial(np.zeros((20, 16000))), Stage.REST)
        self.assertIn("16384", str(ctx.exception))
        with self.assertRaises(StructuralError):
            stage_slice(Trial(np.zeros((19, 16384))), Stage.RELAX)

    def test_trial_samples_are_read_only(self):
        trial = Trial(np.zeros((20, 16384)))
        with self.assertRaises(ValueError):
            trial.samples[0, 0] = 1.0

    def test_bands_and_conditions(self):
        self.assertIs(BandName.parse("α"), BandName.ALPHA)
        self.assertIs(BandName.parse("delta"), BandName.DELTA)
        with self.assertRaises(ParameterError):
            BandName.parse("mu")
        self.assertEqual(canonical_band("Beta").f_lo, 13.0)
        self.assertEqual([b.name for b in CANONICAL_BANDS][-1], BandName.GAMMA)
        self.assertEqual(Condition.TWO_D.label, 1)
        self.assertIs(Condition.from_label(-1), Condition.THREE_D)
        self.assertEqual(ComparisonStage.III.operands,
                         ((Condition.TWO_D, Stage.REST), (Condition.THREE_D, Stage.REST)))
        self.assertEqual(ComparisonStage.I.operands[1], (Condition.TWO_D, Stage.REST))


if __name__ == '__main__':
    unittest.main()
