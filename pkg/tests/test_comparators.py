import sys
import unittest
from pathlib import Path

import numpy as np

# Dodaj katalog główny projektu do ścieżki
project_root = Path(__file__).resolve().parent.parent
sys.path.append(str(project_root))

from src.core.comparators import (
    DYNAMIC,
    STATIC,
    absdiff_score,
    compare,
    dct2,
    dct_score,
    effective_k,
    entropy_score,
    idct2,
    score_grid,
    xor_score,
    zigzag_order,
    zigzag_take,
)
from src.core.errors import ParameterError, ShapeError
from src.core.schema import ComparatorConfig, default_configs


def naive_dct2(block):
    """DCT-II z definicji: cztery zagnieżdżone sumy (dwie wewnętrzne jako suma numpy)."""
    block = np.asarray(block, dtype=np.float64)
    h, w = block.shape
    ys = np.arange(h).reshape(-1, 1)
    xs = np.arange(w).reshape(1, -1)
    out = np.zeros((h, w))
    for u in range(h):
        au = np.sqrt(1.0 / h) if u == 0 else np.sqrt(2.0 / h)
        for v in range(w):
            av = np.sqrt(1.0 / w) if v == 0 else np.sqrt(2.0 / w)
            basis = np.cos(np.pi * (2 * ys + 1) * u / (2 * h)) * np.cos(np.pi * (2 * xs + 1) * v / (2 * w))
            out[u, v] = au * av * float((block * basis).sum())
    return out


SCORERS = {
    "absdiff": absdiff_score,
    "entropy": entropy_score,
    "xor": lambda a, b: xor_score(a, b, 3),
    "dct": lambda a, b: dct_score(a, b, 10),
}


class TestSimpleScores(unittest.TestCase):
    def test_absdiff(self):
        a = np.array([[0, 10], [20, 30]], dtype=np.uint8)
        b = np.array([[5, 10], [20, 26]], dtype=np.uint8)
        self.assertEqual(absdiff_score(a, b), 2.25)
        self.assertEqual(absdiff_score(a, a), 0.0)
        black = np.zeros((4, 4), dtype=np.uint8)
        white = np.full((4, 4), 255, dtype=np.uint8)
        self.assertEqual(absdiff_score(black, white), 255.0)
        self.assertEqual(absdiff_score(white, black), 255.0)

    def test_entropy(self):
        constant = np.zeros((4, 4), dtype=np.uint8)
        two_levels = np.array([[0, 255] * 2] * 4, dtype=np.uint8)
        self.assertAlmostEqual(entropy_score(constant, two_levels), 1.0, delta=1e-12)

    def test_entropy_ignores_pixel_positions(self):
        rng = np.random.default_rng(2)
        a = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
        b = rng.permutation(a.ravel()).reshape(8, 8)
        self.assertEqual(entropy_score(a, b), 0.0)

    def test_xor(self):
        zeros = np.zeros((4, 4), dtype=np.uint8)
        self.assertEqual(xor_score(zeros, zeros + 255, 3), 1.0)
        self.assertEqual(xor_score(zeros + 100, zeros + 103, 3), 0.0)
        with self.assertRaises(ParameterError):
            xor_score(zeros, zeros, 8)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            absdiff_score(np.zeros((4, 4)), np.zeros((4, 5)))


class TestDct(unittest.TestCase):
    def test_constant_block(self):
        coeffs = dct2(np.full((8, 8), 128, dtype=np.uint8))
        self.assertAlmostEqual(coeffs[0, 0], 1024.0, delta=1e-9)
        rest = coeffs.copy()
        rest[0, 0] = 0.0
        self.assertLessEqual(float(np.abs(rest).max()), 1e-9)

    def test_zero_block(self):
        self.assertEqual(float(np.abs(dct2(np.zeros((4, 4)))).max()), 0.0)

    def test_matches_naive_definition(self):
        rng = np.random.default_rng(2024)
        for size in (4, 8):
            for _ in range(500):
                block = rng.integers(0, 256, size=(size, size)).astype(np.float64)
                expected = naive_dct2(block)
                scale = max(float(np.abs(expected).max()), 1.0)
                np.testing.assert_allclose(dct2(block), expected, rtol=0, atol=1e-9 * scale)

    def test_rectangular_block(self):
        rng = np.random.default_rng(4)
        block = rng.integers(0, 256, size=(15, 20)).astype(np.float64)
        expected = naive_dct2(block)
        np.testing.assert_allclose(dct2(block), expected, rtol=0, atol=1e-9 * float(np.abs(expected).max()))

    def test_parseval_and_inverse(self):
        rng = np.random.default_rng(99)
        for size in (4, 8):
            for _ in range(500):
                block = rng.integers(0, 256, size=(size, size)).astype(np.float64)
                coeffs = dct2(block)
                energy = float((block ** 2).sum())
                self.assertAlmostEqual(float((coeffs ** 2).sum()), energy, delta=1e-9 * max(energy, 1.0))
                np.testing.assert_allclose(idct2(coeffs), block, rtol=0, atol=1e-6)


class TestZigzag(unittest.TestCase):
    def test_smallest_zigzag(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        self.assertEqual(zigzag_take(m, 4).tolist(), [1.0, 2.0, 3.0, 4.0])
        self.assertEqual(zigzag_take(m, 1).tolist(), [1.0])

    def test_4x4_prefix(self):
        self.assertEqual(
            list(zigzag_order(4, 4)[:6]),
            [(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2)],
        )

    def test_order_is_a_permutation(self):
        for h, w in ((8, 8), (15, 20), (3, 7)):
            order = zigzag_order(h, w)
            self.assertEqual(len(order), h * w)
            self.assertEqual(len(set(order)), h * w)

    def test_k_out_of_range(self):
        with self.assertRaises(ParameterError):
            zigzag_take(np.zeros((2, 2)), 5)
        with self.assertRaises(ParameterError):
            zigzag_take(np.zeros((2, 2)), 0)


class TestDctScore(unittest.TestCase):
    def test_constant_blocks(self):
        a = np.full((8, 8), 100, dtype=np.uint8)
        b = np.full((8, 8), 110, dtype=np.uint8)
        self.assertAlmostEqual(dct_score(a, b, 10), 8.0, delta=1e-9)

    def test_matches_naive_composition(self):
        rng = np.random.default_rng(12)
        a = rng.integers(0, 256, size=(8, 8)).astype(np.float64)
        b = rng.integers(0, 256, size=(8, 8)).astype(np.float64)
        order = zigzag_order(8, 8)[:10]
        fa = np.array([naive_dct2(a)[r, c] for r, c in order])
        fb = np.array([naive_dct2(b)[r, c] for r, c in order])
        self.assertAlmostEqual(dct_score(a, b, 10), float(np.abs(fa - fb).mean()), delta=1e-9)

    def test_k_clipped_to_block_area(self):
        cfg = ComparatorConfig(method="dct", dct_keep=10)
        self.assertEqual(effective_k(cfg, 4), 4)
        self.assertEqual(effective_k(cfg, 300), 10)


class TestComparatorAlgebra(unittest.TestCase):
    def test_symmetry_and_identity(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            a = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
            b = rng.integers(0, 256, size=(8, 8), dtype=np.uint8)
            for name, score in SCORERS.items():
                self.assertEqual(score(a, a), 0.0, name)
                if name == "dct":
                    self.assertAlmostEqual(score(a, b), score(b, a), delta=1e-12)
                else:
                    self.assertEqual(score(a, b), score(b, a), name)

    def test_batched_equals_single_pair(self):
        rng = np.random.default_rng(17)
        a = rng.integers(0, 256, size=(20, 6, 5), dtype=np.uint8)
        b = rng.integers(0, 256, size=(20, 6, 5), dtype=np.uint8)
        for cfg in default_configs():
            scores = score_grid(a, b, cfg)
            for i in range(20):
                self.assertAlmostEqual(float(scores[i]), compare(a[i], b[i], cfg).score, delta=1e-12)


class TestCompare(unittest.TestCase):
    def test_identical_blocks_are_static(self):
        block = np.arange(64, dtype=np.uint8).reshape(8, 8)
        for cfg in default_configs():
            verdict = compare(block, block, cfg)
            self.assertEqual(verdict.score, 0.0)
            self.assertEqual(verdict.verdict, STATIC)

    def test_threshold_is_strict(self):
        a = np.array([[0, 10], [20, 30]], dtype=np.uint8)
        b = np.array([[5, 10], [20, 26]], dtype=np.uint8)
        verdict = compare(a, b, ComparatorConfig(method="absdiff", threshold=2.25))
        self.assertEqual(verdict.score, 2.25)
        self.assertEqual(verdict.verdict, DYNAMIC)

    def test_dct_constant_blocks_below_threshold(self):
        a = np.full((8, 8), 100, dtype=np.uint8)
        b = np.full((8, 8), 110, dtype=np.uint8)
        verdict = compare(a, b, ComparatorConfig(method="dct", threshold=10.0, dct_keep=10))
        self.assertAlmostEqual(verdict.score, 8.0, delta=1e-9)
        self.assertTrue(verdict.is_static)


if __name__ == "__main__":
    unittest.main()
