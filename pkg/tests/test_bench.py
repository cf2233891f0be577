import os
import sys
import tempfile
import time
import unittest
from pathlib import Path

import numpy as np

# Dodaj katalog główny projektu do ścieżki
project_root = Path(__file__).resolve().parent.parent
sys.path.append(str(project_root))

from src.core.background import build_srbi, coverage
from src.core.bench import (
    REPORT_COLUMNS,
    bench_methods,
    evaluate,
    format_report,
    greedy_match,
    iou,
    noise_sensitivity,
    report_csv,
    scene_params,
    truth_for,
    write_report,
)
from src.core.errors import ParameterError, SequenceTooShortError
from src.core.foreground import mask_from_array
from src.core.pipeline import choose_grid
from src.core.scene import gen_scene, reference_scene
from src.core.schema import ComparatorConfig, Mover, PipelineParams, SceneSpec
from src.utils.config import NOISY_MEDIAN_WINDOW, NOISY_PREFILTER, NOISY_SUBTRACT_SHIFT


def box_mask(boxes, width=20, height=20):
    bits = np.zeros((height, width), dtype=np.uint8)
    for x, y, w, h in boxes:
        bits[y:y + h, x:x + w] = 1
    return mask_from_array(bits)


class TestIou(unittest.TestCase):
    def test_identical_and_disjoint(self):
        self.assertEqual(iou((1, 2, 5, 4), (1, 2, 5, 4)), 1.0)
        self.assertEqual(iou((0, 0, 4, 4), (4, 0, 4, 4)), 0.0)

    def test_hand_computed(self):
        # Przecięcie 3x3 = 9, suma 16 + 16 - 9 = 23
        self.assertEqual(iou((0, 0, 4, 4), (1, 1, 4, 4)), 9 / 23)

    def test_greedy_is_injective(self):
        preds = [(0, 0, 4, 4), (1, 0, 4, 4), (10, 10, 2, 2)]
        truths = [(0, 0, 4, 4)]
        pairs = greedy_match(preds, truths)
        self.assertEqual(pairs, [(0, 0, 1.0)])

    def test_greedy_prefers_best_overlap(self):
        preds = [(0, 0, 4, 4), (2, 0, 4, 4)]
        truths = [(1, 0, 4, 4), (2, 0, 4, 4)]
        pairs = greedy_match(preds, truths)
        self.assertEqual(sorted((i, j) for i, j, _ in pairs), [(0, 0), (1, 1)])


class TestEvaluate(unittest.TestCase):
    def test_perfect_prediction(self):
        boxes = [[(2, 2, 5, 4)], [(8, 3, 5, 4)]]
        masks = [box_mask(b) for b in boxes]
        metrics = evaluate(masks, boxes, masks, boxes)
        self.assertEqual(
            (metrics.pixel_precision, metrics.pixel_recall, metrics.pixel_f1, metrics.det_accuracy, metrics.mean_iou),
            (1.0, 1.0, 1.0, 1.0, 1.0),
        )
        self.assertEqual((metrics.tp, metrics.fp, metrics.fn), (2, 0, 0))

    def test_empty_prediction(self):
        boxes = [[(2, 2, 5, 4)]]
        metrics = evaluate([box_mask([])], [[]], [box_mask(boxes[0])], boxes)
        self.assertEqual(metrics.pixel_recall, 0.0)
        self.assertEqual(metrics.pixel_f1, 0.0)
        self.assertEqual(metrics.det_accuracy, 0.0)
        self.assertEqual(metrics.fn, 1)

    def test_low_overlap_counts_twice(self):
        pred, truth = [(0, 0, 4, 4)], [(1, 1, 4, 4)]
        metrics = evaluate([box_mask(pred)], [pred], [box_mask(truth)], [truth])
        self.assertEqual((metrics.tp, metrics.fp, metrics.fn), (0, 1, 1))
        self.assertEqual(metrics.det_accuracy, 0.0)
        self.assertAlmostEqual(metrics.mean_iou, 9 / 23)

    def test_empty_frames_contribute_nothing(self):
        boxes = [[(2, 2, 5, 4)], []]
        masks = [box_mask(b) for b in boxes]
        metrics = evaluate(masks, boxes, masks, boxes)
        self.assertEqual(metrics.det_accuracy, 1.0)
        self.assertEqual((metrics.tp, metrics.fp, metrics.fn), (1, 0, 0))

    def test_swapping_sides_swaps_precision_and_recall(self):
        pred = [[(0, 0, 6, 6)]]
        truth = [[(2, 2, 6, 5)]]
        forward = evaluate([box_mask(pred[0])], pred, [box_mask(truth[0])], truth)
        backward = evaluate([box_mask(truth[0])], truth, [box_mask(pred[0])], pred)
        self.assertEqual(forward.pixel_precision, backward.pixel_recall)
        self.assertEqual(forward.pixel_recall, backward.pixel_precision)
        self.assertNotEqual(forward.pixel_precision, forward.pixel_recall)

    def test_ignored_region_is_not_false_positive(self):
        pred = [[(0, 5, 2, 8)]]
        metrics = evaluate([box_mask(pred[0])], pred, [box_mask([])], [[]], ignore_boxes=[[(0, 5, 1, 8)]])
        self.assertEqual((metrics.tp, metrics.fp, metrics.fn), (0, 0, 0))

    def test_length_mismatch(self):
        with self.assertRaises(ParameterError):
            evaluate([box_mask([])], [[], []], [box_mask([])], [[]])

    def test_ratios_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            preds, truths = [], []
            for _ in range(3):
                preds.append([tuple(int(v) for v in rng.integers(0, 10, size=2)) + (4, 3)
                              for _ in range(rng.integers(0, 3))])
                truths.append([tuple(int(v) for v in rng.integers(0, 10, size=2)) + (4, 3)
                               for _ in range(rng.integers(0, 3))])
            metrics = evaluate([box_mask(b) for b in preds], preds, [box_mask(b) for b in truths], truths)
            for value in (metrics.pixel_precision, metrics.pixel_recall, metrics.pixel_f1,
                          metrics.mean_iou, metrics.det_accuracy):
                self.assertTrue(0.0 <= value <= 1.0)


class TestNoiseSensitivity(unittest.TestCase):
    def test_dct_is_less_noise_sensitive_than_absdiff(self):
        ratios = noise_sensitivity(seed=7)
        self.assertEqual(list(ratios), ["absdiff", "entropy", "xor", "dct"])
        self.assertLess(ratios["dct"], ratios["absdiff"])
        for value in ratios.values():
            self.assertGreater(value, 0.0)

    def test_no_noise_gives_zero(self):
        ratios = noise_sensitivity(sigma=0.0)
        self.assertEqual(set(ratios.values()), {0.0})

    def test_deterministic(self):
        self.assertEqual(noise_sensitivity(seed=3), noise_sensitivity(seed=3))

    def test_invalid_arguments(self):
        with self.assertRaises(ParameterError):
            noise_sensitivity(pairs=0)


class TestBenchReferenceScenes(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        started = time.perf_counter()
        cls.s1 = bench_methods(reference_scene("S1"))
        cls.s1_seconds = time.perf_counter() - started

    def test_noise_free_scene_is_solved_by_every_method(self):
        self.assertEqual([row.method for row in self.s1.rows], ["absdiff", "entropy", "xor", "dct"])
        for row in self.s1.rows:
            self.assertEqual(row.coverage, 1.0, row.method)
            self.assertTrue(1 < row.frames_to_cover <= 10, row.method)
            self.assertEqual(row.det_accuracy, 1.0, row.method)
            self.assertEqual(row.fp, 0, row.method)
            self.assertGreater(row.tp, 0, row.method)
            self.assertGreater(row.pixel_f1, 0.9, row.method)

    def test_four_methods_within_time_budget(self):
        self.assertLess(self.s1_seconds, 5.0)

    def test_report_is_deterministic(self):
        again = bench_methods(reference_scene("S1"), jobs=4)
        self.assertEqual(report_csv(again), report_csv(self.s1))

    def test_report_layout(self):
        lines = report_csv(self.s1).splitlines()
        self.assertEqual(lines[0], ",".join(REPORT_COLUMNS))
        self.assertEqual(len(lines), 5)
        text = format_report(self.s1)
        self.assertTrue(text.startswith("scena: seed=42 sigma=0"))
        self.assertIn("ignorowane", text.splitlines()[1])

    def test_write_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.csv")
            write_report(self.s1, path)
            with open(path, "rb") as f:
                self.assertEqual(f.read(), report_csv(self.s1).encode("utf-8"))

    def test_noisy_scene_dct_coverage(self):
        scene = gen_scene(reference_scene("S2"))
        grid, _ = choose_grid(scene.frames[0], scene.frames[1], PipelineParams())
        model = build_srbi(scene.frames, grid, ComparatorConfig(method="dct"), max_frames=30)
        self.assertGreaterEqual(coverage(model), 0.95)

    def test_noisy_scene_is_deterministic(self):
        spec = reference_scene("S2")
        configs = [ComparatorConfig(method="dct")]
        first = bench_methods(spec, configs)
        second = bench_methods(spec, configs, jobs=2)
        self.assertEqual(report_csv(first), report_csv(second))

    def test_single_frame_scene(self):
        spec = reference_scene("S1").model_copy(update={"frame_count": 1})
        with self.assertRaises(SequenceTooShortError):
            bench_methods(spec)


class TestPartialMovers(unittest.TestCase):
    def test_plain_truth_counts_partial_movers(self):
        spec = reference_scene("S1")
        lenient = bench_methods(spec, [ComparatorConfig(method="dct")])
        strict = bench_methods(spec, [ComparatorConfig(method="dct")], PipelineParams(ignore_partial=False))
        a, b = lenient.rows[0], strict.rows[0]
        # Maski te same, zmienia się tylko ocena obiektów
        self.assertEqual(a.pixel_f1, b.pixel_f1)
        self.assertGreater(b.fn, a.fn)
        self.assertLess(b.det_accuracy, a.det_accuracy)
        self.assertFalse(strict.ignore_partial)
        self.assertIn("każdy widoczny fragment", format_report(strict))

    def test_truth_for(self):
        spec = SceneSpec(width=40, height=30, frame_count=3, seed=1,
                         movers=[Mover(x=-9, y=5, w=10, h=8, intensity=250, dx=3, dy=0)])
        scene = gen_scene(spec)
        boxes, ignored = truth_for(scene)
        self.assertEqual((boxes[0], ignored[0]), ([], [(0, 5, 1, 8)]))
        boxes, ignored = truth_for(scene, ignore_partial=False)
        self.assertEqual(boxes[0], [(0, 5, 1, 8)])
        self.assertIsNone(ignored)


class TestNoisyReferenceScene(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.spec = reference_scene("S2")
        cls.s2 = bench_methods(cls.spec)
        cls.rows = {row.method: row for row in cls.s2.rows}

    def test_scene_profile_is_applied(self):
        params = scene_params(self.spec)
        self.assertEqual(
            (params.prefilter, params.subtract_shift, params.median_window),
            (NOISY_PREFILTER, NOISY_SUBTRACT_SHIFT, NOISY_MEDIAN_WINDOW),
        )
        kept = scene_params(self.spec, PipelineParams(median_window=5), keep=["median_window"])
        self.assertEqual((kept.median_window, kept.subtract_shift), (5, NOISY_SUBTRACT_SHIFT))

    def test_every_method_covers_quickly(self):
        for row in self.s2.rows:
            self.assertEqual(row.coverage, 1.0, row.method)
            self.assertTrue(1 < row.frames_to_cover <= 30, row.method)

    def test_dct_and_xor_find_the_movers(self):
        for method in ("dct", "xor"):
            row = self.rows[method]
            self.assertGreater(row.pixel_f1, 0.7, method)
            self.assertGreater(row.det_accuracy, 0.7, method)
            self.assertGreater(row.tp, row.fp, method)

    def test_method_ordering(self):
        accuracy = [self.rows[m].det_accuracy for m in ("dct", "xor", "entropy", "absdiff")]
        self.assertEqual(accuracy, sorted(accuracy, reverse=True))


if __name__ == "__main__":
    unittest.main()
