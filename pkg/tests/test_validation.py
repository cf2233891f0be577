import sys
import unittest
from pathlib import Path

import numpy as np
from pydantic import ValidationError

# Dodaj katalog główny projektu do ścieżki
project_root = Path(__file__).resolve().parent.parent
sys.path.append(str(project_root))

from src.core.errors import ParameterError
from src.core.foreground import DetectedObject
from src.core.imaging import Frame
from src.core.schema import HeuristicParams
from src.core.validation import (
    NON_VEHICLE,
    VEHICLE,
    AcceptAllClassifier,
    ClassifierVerdict,
    HeuristicClassifier,
    classify_all,
    make_classifier,
    validate,
)

FRAME_AREA = 160000
PARAMS = HeuristicParams()
BLANK = Frame(np.zeros((16, 16), dtype=np.uint8))


def obj(w, h, area, x=0, y=0):
    return DetectedObject(bbox=(x, y, w, h), area=area, centroid=(x + w / 2, y + h / 2))


class TestValidate(unittest.TestCase):
    def test_typical_vehicle(self):
        # 40x25 (proporcje 1.6), wypełnienie 0.8, pole 0.5% klatki
        verdict = validate(BLANK, obj(40, 25, 800), PARAMS, FRAME_AREA)
        self.assertEqual(verdict.label, VEHICLE)
        self.assertEqual(verdict.score, 1.0)
        self.assertTrue(verdict.is_vehicle)

    def test_too_small(self):
        verdict = validate(BLANK, obj(10, 8, 72), PARAMS, FRAME_AREA)
        self.assertEqual(verdict.label, NON_VEHICLE)
        self.assertEqual(verdict.score, 0.0)

    def test_too_elongated(self):
        verdict = validate(BLANK, obj(100, 10, 800), PARAMS, FRAME_AREA)
        self.assertEqual(verdict.label, NON_VEHICLE)
        self.assertEqual(verdict.score, 0.0)

    def test_band_edges_are_inclusive(self):
        verdict = validate(BLANK, obj(40, 10, 400), PARAMS, FRAME_AREA)
        self.assertEqual(verdict.label, VEHICLE)
        self.assertEqual(verdict.score, 0.0)

    def test_sparse_box(self):
        verdict = validate(BLANK, obj(40, 25, 300), PARAMS, FRAME_AREA)
        self.assertEqual(verdict.label, NON_VEHICLE)

    def test_degenerate_box(self):
        verdict = validate(BLANK, obj(0, 5, 0), PARAMS, FRAME_AREA)
        self.assertEqual((verdict.label, verdict.score), (NON_VEHICLE, 0.0))

    def test_invalid_frame_area(self):
        with self.assertRaises(ParameterError):
            validate(BLANK, obj(40, 25, 800), PARAMS, 0)

    def test_score_grows_with_fill(self):
        scores = [validate(BLANK, obj(40, 25, area), PARAMS, FRAME_AREA).score for area in range(380, 1001, 10)]
        self.assertEqual(scores, sorted(scores))
        self.assertEqual(scores[0], 0.0)
        self.assertEqual(scores[-1], 1.0)

    def test_score_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            w, h = (int(v) for v in rng.integers(1, 200, size=2))
            area = int(rng.integers(1, w * h + 1))
            verdict = validate(BLANK, obj(w, h, area), PARAMS, FRAME_AREA)
            self.assertTrue(0.0 <= verdict.score <= 1.0)


class TestClassifiers(unittest.TestCase):
    def test_empty_list(self):
        self.assertEqual(classify_all([], BLANK, PARAMS, FRAME_AREA), [])

    def test_labels_are_independent(self):
        objects = [obj(40, 25, 800), obj(100, 10, 800), obj(40, 25, 800, x=50)]
        labeled = classify_all(objects, BLANK, PARAMS, FRAME_AREA)
        self.assertEqual([o.label for o in labeled], [VEHICLE, NON_VEHICLE, VEHICLE])
        for single, together in zip(objects, labeled):
            alone = classify_all([single], BLANK, PARAMS, FRAME_AREA)[0]
            self.assertEqual((alone.label, alone.score), (together.label, together.score))
        self.assertEqual([o.bbox for o in labeled], [o.bbox for o in objects])

    def test_custom_classifier(self):
        class RejectAll:
            def __init__(self):
                self.seen = []

            def classify(self, object_image, detected, frame_area):
                self.seen.append((object_image.width, object_image.height))
                return ClassifierVerdict(NON_VEHICLE, 0.25)

        stub = RejectAll()
        image = Frame(np.ones((60, 60), dtype=np.uint8))
        labeled = classify_all([obj(40, 25, 800)], image, classifier=stub)
        self.assertEqual((labeled[0].label, labeled[0].score), (NON_VEHICLE, 0.25))
        self.assertEqual(stub.seen, [(40, 25)])

    def test_validation_disabled(self):
        classifier = make_classifier("heuristic", PARAMS, enabled=False)
        self.assertIsInstance(classifier, AcceptAllClassifier)
        verdict = classifier.classify(BLANK, obj(100, 1, 1), FRAME_AREA)
        self.assertEqual((verdict.label, verdict.score), (VEHICLE, 1.0))

    def test_factory(self):
        self.assertIsInstance(make_classifier("heuristic", PARAMS), HeuristicClassifier)
        with self.assertRaises(ParameterError):
            make_classifier("cnn", PARAMS)

    def test_verdict_checks(self):
        with self.assertRaises(ParameterError):
            ClassifierVerdict(VEHICLE, 1.5)
        with self.assertRaises(ParameterError):
            ClassifierVerdict("car", 0.5)

    def test_params_validation(self):
        with self.assertRaises(ValidationError):
            HeuristicParams(aspect_min=3.0, aspect_max=2.0)
        with self.assertRaises(ValidationError):
            HeuristicParams(area_min_frac=0.2, area_max_frac=0.1)


if __name__ == "__main__":
    unittest.main()
