"""
Odejmowanie tła (XOR po kwantyzacji), filtr medianowy maski binarnej,
maska pierwszego planu, nałożenie maski na klatkę i wydzielanie obiektów
(składowe spójne, 8-sąsiedztwo).
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from src.core.background import BackgroundModel, coverage
from src.core.errors import MaskValueError, ModelIncompleteError, ParameterError, ShapeError
from src.core.imaging import Frame, load_frame, save_frame
from src.utils.config import DEFAULT_MEDIAN_WINDOW, DEFAULT_MIN_AREA_FRAC, DEFAULT_SUBTRACT_SHIFT

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class ForegroundMask:
    """
    Maska binarna o rozmiarze całej klatki: 1 = pierwszy plan, 0 = tło.

    `width` i `height` to przycięty obszar siatki; piksele marginesów są zawsze 0.
    """

    bits: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ShapeError(f"Maska musi być dwuwymiarowa, jest {bits.shape}")
        if not (0 <= self.width <= bits.shape[1] and 0 <= self.height <= bits.shape[0]):
            raise ShapeError(f"Obszar {self.width}x{self.height} większy niż maska {bits.shape[1]}x{bits.shape[0]}")
        bits = (bits != 0).astype(np.uint8)
        bits[self.height:, :] = 0
        bits[:, self.width:] = 0
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def frame_width(self) -> int:
        return int(self.bits.shape[1])

    @property
    def frame_height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def is_empty(self) -> bool:
        return self.count == 0

    def __eq__(self, other):
        if not isinstance(other, ForegroundMask):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and bool(
            np.array_equal(self.bits, other.bits)
        )


def mask_from_array(bits, width: Optional[int] = None, height: Optional[int] = None) -> ForegroundMask:
    bits = np.asarray(bits)
    return ForegroundMask(
        bits=bits,
        width=bits.shape[1] if width is None else width,
        height=bits.shape[0] if height is None else height,
    )


@dataclass(frozen=True)
class DetectedObject:
    bbox: Tuple[int, int, int, int]  # (x, y, w, h)
    area: int
    centroid: Tuple[float, float]    # (x, y)
    label: Optional[str] = None
    score: Optional[float] = None

    @property
    def x(self) -> int:
        return self.bbox[0]

    @property
    def y(self) -> int:
        return self.bbox[1]

    @property
    def w(self) -> int:
        return self.bbox[2]

    @property
    def h(self) -> int:
        return self.bbox[3]

    @property
    def fill(self) -> float:
        box_area = self.w * self.h
        return self.area / box_area if box_area else 0.0

    def with_verdict(self, label: str, score: float) -> "DetectedObject":
        return replace(self, label=label, score=score)


# ============================================================================
# ODEJMOWANIE I FILTR MEDIANOWY
# ============================================================================

def subtract(model: BackgroundModel, frame: Frame, q: int = DEFAULT_SUBTRACT_SHIFT) -> np.ndarray:
    """Mapa zmian {0, 1} na przyciętym obszarze: (model >> q) XOR (frame >> q) != 0."""
    if coverage(model) < 1.0:
        raise ModelIncompleteError(
            f"Model niekompletny (pokrycie {coverage(model):.6f}) - wymagane uzupełnienie (backfill)"
        )
    grid = model.grid
    if not grid.matches(frame):
        raise ShapeError(
            f"Klatka {frame.width}x{frame.height} niezgodna z modelem "
            f"{grid.source_width}x{grid.source_height}"
        )
    if not 0 <= q <= 7:
        raise ParameterError(f"Przesunięcie q musi być w [0, 7], jest {q}")
    cropped = frame.pixels[:grid.cropped_height, :grid.cropped_width]
    return (((model.pixels >> q) ^ (cropped >> q)) != 0).astype(np.uint8)


def median_filter_mask(mask, window: int = DEFAULT_MEDIAN_WINDOW) -> np.ndarray:
    """
    Mediana maski binarnej = głosowanie większościowe w oknie window x window.

    Na brzegach liczą się tylko piksele w granicach maski; remis daje 0.
    """
    if window < 3 or window % 2 == 0:
        raise ParameterError(f"Okno mediany musi być nieparzyste i >= 3, jest {window}")
    bits = (np.asarray(mask) != 0).astype(np.int32)
    kernel = np.ones((window, window), dtype=np.int32)
    ones = ndimage.correlate(bits, kernel, mode="constant", cval=0)
    in_bounds = ndimage.correlate(np.ones_like(bits), kernel, mode="constant", cval=0)
    return (2 * ones > in_bounds).astype(np.uint8)


def make_mask(model: BackgroundModel, frame: Frame, q: int = DEFAULT_SUBTRACT_SHIFT,
              window: int = DEFAULT_MEDIAN_WINDOW) -> ForegroundMask:
    filtered = median_filter_mask(subtract(model, frame, q), window)
    grid = model.grid
    bits = np.zeros(frame.shape, dtype=np.uint8)
    bits[:grid.cropped_height, :grid.cropped_width] = filtered
    return ForegroundMask(bits=bits, width=grid.cropped_width, height=grid.cropped_height)


def apply_mask(frame: Frame, mask: ForegroundMask) -> Frame:
    """Piksele klatki tam, gdzie maska = 1, w pozostałych miejscach 0."""
    if mask.bits.shape != frame.shape:
        raise ShapeError(
            f"Maska {mask.frame_width}x{mask.frame_height} niezgodna z klatką {frame.width}x{frame.height}"
        )
    return Frame(np.where(mask.bits != 0, frame.pixels, 0).astype(np.uint8))


# ============================================================================
# SKŁADOWE SPÓJNE
# ============================================================================

def default_min_area(cropped_area: int) -> float:
    return DEFAULT_MIN_AREA_FRAC * cropped_area


def connected_components(mask: Union[ForegroundMask, np.ndarray], min_area: float = 1) -> List[DetectedObject]:
    """
    Składowe 8-spójne pikseli 1; składowe o polu < min_area są odrzucane.

    Obiekty posortowane po (bbox.y, bbox.x), etykiety nieustalone.
    """
    bits = mask.bits if isinstance(mask, ForegroundMask) else np.asarray(mask)
    if min_area < 0:
        raise ParameterError(f"min_area musi być >= 0, jest {min_area}")

    labels, n = ndimage.label(bits != 0, structure=EIGHT_CONNECTED)
    if n == 0:
        return []

    flat = labels.ravel()
    areas = np.bincount(flat, minlength=n + 1)
    ys, xs = np.indices(labels.shape)
    sum_x = np.bincount(flat, weights=xs.ravel(), minlength=n + 1)
    sum_y = np.bincount(flat, weights=ys.ravel(), minlength=n + 1)

    found = []
    for label, slices in enumerate(ndimage.find_objects(labels), start=1):
        if slices is None or areas[label] < min_area:
            continue
        rows, cols = slices
        area = int(areas[label])
        found.append((
            rows.start, cols.start, label,
            DetectedObject(
                bbox=(cols.start, rows.start, cols.stop - cols.start, rows.stop - rows.start),
                area=area,
                centroid=(float(sum_x[label] / area), float(sum_y[label] / area)),
            ),
        ))
    found.sort(key=lambda item: item[:3])
    return [obj for _, _, _, obj in found]


# ============================================================================
# ZAPIS / ODCZYT MASEK (PGM {0, 255})
# ============================================================================

def save_mask(mask: ForegroundMask, path) -> None:
    save_frame(Frame(mask.bits * np.uint8(255)), path)


def load_mask(path) -> ForegroundMask:
    frame = load_frame(path, min_size=1)
    values = np.unique(frame.pixels)
    if not set(values.tolist()) <= {0, 255}:
        raise MaskValueError(path, f"wartości spoza {{0, 255}}: {values[(values != 0) & (values != 255)][:5].tolist()}")
    return mask_from_array(frame.pixels == 255)
