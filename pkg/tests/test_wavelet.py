import unittest

import numpy as np

from ViewingEEG.errors import ParameterError
from ViewingEEG.paradigm import CANONICAL_BANDS, canonical_band
from ViewingEEG.wavelet import (
    ExtensionPolicy,
    SubbandMode,
    WaveletSpec,
    default_subband_selection,
    dwt_decompose,
    dwt_reconstruct,
    parse_subband,
    subband_for_band,
    subband_range,
)


def energy(coeffs):
    return float(sum(np.sum(c ** 2) for c in coeffs.all_coefficients()))


class TestWavelet(unittest.TestCase):

    def test_haar_round_trip_and_energy(self):
        rng = np.random.default_rng(1)
        for n in (1024, 2048, 4608, 5000):
            x = rng.normal(size=n)
            coeffs = dwt_decompose(x, WaveletSpec(family=1, levels=7))
            self.assertEqual(len(coeffs.details), 7)
            np.testing.assert_allclose(dwt_reconstruct(coeffs), x, atol=1e-9)
            self.assertAlmostEqual(energy(coeffs) / float(np.sum(x ** 2)), 1.0, delta=1e-9)

    def test_extension_mode(self):
        spec = WaveletSpec()
        self.assertEqual(spec.mode_for(4608), "periodization")
        self.assertEqual(spec.mode_for(5000), "zero")
        self.assertEqual(WaveletSpec(family=4).mode_for(5000), "symmetric")
        self.assertEqual(dwt_decompose(np.ones(2048)).details[0].size, 1024)

    def test_db4_round_trip(self):
        x = np.random.default_rng(2).normal(size=5000)
        coeffs = dwt_decompose(x, WaveletSpec(family=4, levels=7))
        self.assertEqual(coeffs.mode, "symmetric")
        np.testing.assert_allclose(dwt_reconstruct(coeffs), x, atol=1e-9)


    def test_symmetric_extension_policy(self):
        spec = WaveletSpec(extension="symmetric")
        self.assertIs(spec.extension, ExtensionPolicy.SYMMETRIC)
        self.assertEqual(spec.mode_for(4608), "periodization")
        self.assertEqual(spec.mode_for(5000), "symmetric")
        rng = np.random.default_rng(4)
        for n in (4999, 5000):
            x = rng.normal(size=n)
            coeffs = dwt_decompose(x, spec)
            self.assertEqual(coeffs.mode, "symmetric")
            for length, detail in zip(coeffs.level_lengths, coeffs.details):
                self.assertEqual(detail.size, -(-length // 2))
            np.testing.assert_allclose(dwt_reconstruct(coeffs), x, atol=1e-9)
        with self.assertRaises(ParameterError):
            WaveletSpec(extension="reflect")

    def test_constant_signal(self):
        c = 3.0
        for family in (1, 4):
            coeffs = dwt_decompose(np.full(2048, c), WaveletSpec(family=family, levels=7))
            for detail in coeffs.details:
                np.testing.assert_allclose(detail, 0.0, atol=1e-9)
            np.testing.assert_allclose(coeffs.approximation, c * 2 ** 3.5, rtol=1e-9)

    def test_haar_single_level(self):
        coeffs = dwt_decompose(np.array([1.0, -1.0]), WaveletSpec(family=1, levels=1))
        np.testing.assert_allclose(coeffs.details[0], [np.sqrt(2.0)], atol=1e-12)
        np.testing.assert_allclose(coeffs.approximation, [0.0], atol=1e-12)

    def test_haar_detail_of_ramp_is_constant(self):
        x = 0.5 + 0.25 * np.arange(2048)
        d1 = dwt_decompose(x).details[0]
        np.testing.assert_allclose(d1, -0.25 / np.sqrt(2.0), rtol=1e-9)

    def test_power_of_two_lengths(self):
        coeffs = dwt_decompose(np.random.default_rng(5).normal(size=2048))
        self.assertEqual(coeffs.details[0].size, 1024)
        self.assertEqual(coeffs.subband("D7").size, 16)
        self.assertEqual(coeffs.subband("A7").size, 16)
    def test_subband_access(self):
        coeffs = dwt_decompose(np.random.default_rng(3).normal(size=4608))
        self.assertIs(coeffs.subband("A7"), coeffs.approximation)
        self.assertIs(coeffs.subband("D6"), coeffs.details[5])
        self.assertEqual(coeffs.subband("D7").size, 36)

    def test_subband_ranges(self):
        self.assertEqual(subband_range("D7"), (4.0, 8.0))
        self.assertEqual(subband_range("D6"), (8.0, 16.0))
        self.assertEqual(subband_range("A7"), (0.0, 4.0))
        self.assertEqual(subband_range("D1"), (256.0, 512.0))
        self.assertEqual(subband_range("D1", mode="standard"), (128.0, 256.0))
        self.assertEqual(subband_range("A7", mode=SubbandMode.STANDARD), (0.0, 2.0))
        self.assertEqual(subband_range(3), (64.0, 128.0))

    def test_default_selection(self):
        delta, alpha = canonical_band("Delta"), canonical_band("Alpha")
        self.assertEqual(default_subband_selection([delta, alpha]), ("A7", "D6"))
        self.assertEqual(subband_for_band(delta, mode="standard"), "D7")
        self.assertEqual(len(default_subband_selection(CANONICAL_BANDS)), 5)

    def test_errors(self):
        with self.assertRaises(ParameterError):
            WaveletSpec(family=0)
        with self.assertRaises(ParameterError):
            WaveletSpec(levels=0)
        with self.assertRaises(ParameterError):
            dwt_decompose(np.zeros(100))
        with self.assertRaises(ParameterError):
            dwt_decompose(np.zeros((2, 1024)))
        for bad in ("X3", "D8", "A3"):
            with self.assertRaises(ParameterError):
                parse_subband(bad, 7)
        with self.assertRaises(ValueError):
            subband_range("D2", mode="octave")


if __name__ == '__main__':
    unittest.main()
