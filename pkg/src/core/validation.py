"""
Walidacja wykrytych obiektów: pojazd / nie-pojazd.

Klasyfikator jest wymienny (protokół `Classifier`); wbudowana jest
deterministyczna heurystyka geometryczna (proporcje ramki, wypełnienie, pole).
"""

from dataclasses import dataclass
from typing import List, Optional, Protocol

from src.core.errors import ParameterError
from src.core.foreground import DetectedObject
from src.core.imaging import Frame
from src.core.schema import HeuristicParams

VEHICLE = "vehicle"
NON_VEHICLE = "non-vehicle"

# Szerokość rampy przy krawędzi pasma, jako ułamek wartości krawędzi
EDGE_MARGIN = 0.1


@dataclass(frozen=True)
class ClassifierVerdict:
    label: str
    score: float

    def __post_init__(self):
        if self.label not in (VEHICLE, NON_VEHICLE):
            raise ParameterError(f"Nieznana etykieta '{self.label}'")
        if not 0.0 <= self.score <= 1.0:
            raise ParameterError(f"Wynik klasyfikatora poza [0, 1]: {self.score}")

    @property
    def is_vehicle(self) -> bool:
        return self.label == VEHICLE


class Classifier(Protocol):
    def classify(self, object_image: Frame, obj: DetectedObject, frame_area: int) -> ClassifierVerdict:
        ...


def _lower_ramp(value: float, low: float) -> float:
    top = low * (1.0 + EDGE_MARGIN)
    if value < low:
        return 0.0
    if value >= top:
        return 1.0
    return (value - low) / (top - low)


def _upper_ramp(value: float, high: float) -> float:
    bottom = high * (1.0 - EDGE_MARGIN)
    if value > high:
        return 0.0
    if value <= bottom:
        return 1.0
    return (high - value) / (high - bottom)


def _band_score(value: float, low: float, high: float) -> float:
    return min(_lower_ramp(value, low), _upper_ramp(value, high))


def validate(object_image: Frame, obj: DetectedObject, params: HeuristicParams, frame_area: int) -> ClassifierVerdict:
    """
    Pojazd wtedy i tylko wtedy, gdy proporcje w/h, wypełnienie ramki i względne pole
    mieszczą się w pasmach `params` (granice włącznie). Wynik = iloczyn trzech
    ocen cząstkowych (1.0 wewnątrz pasma, liniowo do 0 przy krawędzi).
    """
    if frame_area <= 0:
        raise ParameterError(f"Pole klatki musi być dodatnie, jest {frame_area}")
    if obj.w <= 0 or obj.h <= 0:
        return ClassifierVerdict(NON_VEHICLE, 0.0)

    aspect = obj.w / obj.h
    fill = obj.area / (obj.w * obj.h)
    area_frac = obj.area / frame_area

    accepted = (
        params.aspect_min <= aspect <= params.aspect_max
        and fill >= params.fill_min
        and params.area_min_frac <= area_frac <= params.area_max_frac
    )
    score = (
        _band_score(aspect, params.aspect_min, params.aspect_max)
        * _lower_ramp(fill, params.fill_min)
        * _band_score(area_frac, params.area_min_frac, params.area_max_frac)
    )
    return ClassifierVerdict(VEHICLE if accepted else NON_VEHICLE, float(score))


class HeuristicClassifier:
    def __init__(self, params: Optional[HeuristicParams] = None):
        self.params = params or HeuristicParams()

    def classify(self, object_image: Frame, obj: DetectedObject, frame_area: int) -> ClassifierVerdict:
        return validate(object_image, obj, self.params, frame_area)


class AcceptAllClassifier:
    """Walidacja wyłączona: każdy obiekt to pojazd z wynikiem 1.0."""

    def classify(self, object_image: Frame, obj: DetectedObject, frame_area: int) -> ClassifierVerdict:
        return ClassifierVerdict(VEHICLE, 1.0)


def make_classifier(name: str, params: Optional[HeuristicParams] = None, enabled: bool = True) -> Classifier:
    if not enabled:
        return AcceptAllClassifier()
    if name == "heuristic":
        return HeuristicClassifier(params)
    raise ParameterError(f"Nieznany walidator '{name}'")


def object_crop(masked_frame: Frame, obj: DetectedObject) -> Frame:
    x, y, w, h = obj.bbox
    return Frame(masked_frame.pixels[y:y + h, x:x + w])


def classify_all(objects: List[DetectedObject], masked_frame: Frame, params: Optional[HeuristicParams] = None,
                 frame_area: Optional[int] = None, classifier: Optional[Classifier] = None) -> List[DetectedObject]:
    """Nadaje etykietę i wynik każdemu obiektowi niezależnie; kolejność zachowana."""
    if classifier is None:
        classifier = HeuristicClassifier(params)
    if frame_area is None:
        frame_area = masked_frame.width * masked_frame.height
    labeled = []
    for obj in objects:
        verdict = classifier.classify(object_crop(masked_frame, obj), obj, frame_area)
        labeled.append(obj.with_verdict(verdict.label, verdict.score))
    return labeled
