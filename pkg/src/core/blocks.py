"""
Entropia obrazu, automatyczny dobór siatki bloków i geometria podziału na bloki.

Entropia: H = -sum(p_i * log2(p_i)) po n = 256 poziomach szarości (wyrazy z p_i = 0
dają 0). Klatka jest dzielona na g x g równych bloków; marginesy z prawej i z dołu,
które nie dzielą się przez g, są pomijane we wszystkich dalszych etapach.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.core.errors import (
    CellIndexError,
    EmptyRegionError,
    FrameTooSmallError,
    InconsistentSequenceError,
    ParameterError,
)
from src.core.imaging import GRAY_LEVELS, Frame
from src.utils.config import DEFAULT_GRID_THRESHOLDS


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray  # 256 liczników, int64
    total: int

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


def _pixels_of(region) -> np.ndarray:
    if isinstance(region, Frame):
        return region.pixels
    return np.asarray(region)


def histogram(region) -> Histogram:
    """Histogram 256 poziomów szarości dla klatki lub dowolnego wycinka pikseli."""
    pixels = _pixels_of(region)
    if pixels.size == 0:
        raise EmptyRegionError("Pusty region - brak pikseli do histogramu")
    counts = np.bincount(pixels.ravel().astype(np.intp), minlength=GRAY_LEVELS).astype(np.int64)
    if counts.size > GRAY_LEVELS:
        raise ParameterError("Intensywności spoza zakresu [0, 255]")
    return Histogram(counts=counts, total=int(pixels.size))


def entropy_from_counts(counts: np.ndarray, totals) -> np.ndarray:
    """
    Entropia (bity) dla wierszy macierzy liczników (n, 256).

    Jedyna implementacja wzoru - wersje dla pojedynczego bloku i dla całej
    siatki przechodzą tędy, więc dają identyczne bity.
    """
    p = counts / np.asarray(totals, dtype=np.float64).reshape(-1, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    # -0.0 -> 0.0 dla regionów o jednym poziomie
    return -terms.sum(axis=1) + 0.0


def image_entropy(h: Histogram) -> float:
    """Entropia Shannona histogramu w bitach, 0 <= H <= 8."""
    return float(entropy_from_counts(h.counts.reshape(1, -1), [h.total])[0])


def frame_entropy(frame: Frame) -> float:
    return image_entropy(histogram(frame))


def grid_for_delta(delta_h: float, thresholds: Tuple[float, float] = DEFAULT_GRID_THRESHOLDS) -> int:
    """Mapowanie ΔH -> g: duża różnica (zatłoczenie) = więcej komórek = mniejsze bloki."""
    low, high = thresholds
    if delta_h < low:
        return 8
    if delta_h < high:
        return 16
    return 32


def select_grid(first: Frame, second: Frame,
                thresholds: Tuple[float, float] = DEFAULT_GRID_THRESHOLDS) -> int:
    """Dobiera g z {8, 16, 32} na podstawie |H(first) - H(second)| całych klatek."""
    if first.shape != second.shape:
        raise InconsistentSequenceError(1, (first.width, first.height), (second.width, second.height))
    return grid_for_delta(entropy_delta(first, second), thresholds)


def entropy_delta(first: Frame, second: Frame) -> float:
    return abs(frame_entropy(first) - frame_entropy(second))


@dataclass(frozen=True)
class BlockGrid:
    g: int
    source_width: int
    source_height: int
    cropped_width: int
    cropped_height: int
    block_width: int
    block_height: int
    origin_x: int = 0
    origin_y: int = 0

    @property
    def cell_count(self) -> int:
        return self.g * self.g

    @property
    def block_area(self) -> int:
        return self.block_width * self.block_height

    @property
    def cropped_area(self) -> int:
        return self.cropped_width * self.cropped_height

    def cell_slices(self, row: int, col: int) -> Tuple[slice, slice]:
        if not (0 <= row < self.g and 0 <= col < self.g):
            raise CellIndexError(f"Komórka ({row}, {col}) poza siatką {self.g}x{self.g}")
        y0 = row * self.block_height
        x0 = col * self.block_width
        return slice(y0, y0 + self.block_height), slice(x0, x0 + self.block_width)

    def matches(self, frame: Frame) -> bool:
        return frame.width == self.source_width and frame.height == self.source_height


def make_grid(width: int, height: int, g: int) -> BlockGrid:
    """Siatka g x g równych bloków; przycięcie od prawej i od dołu (origin = (0, 0))."""
    if g < 1:
        raise ParameterError(f"Liczba komórek g musi być >= 1, jest {g}")
    if width < g or height < g:
        raise FrameTooSmallError("<grid>", f"{width}x{height} mniejsze niż siatka g={g}")
    block_width = width // g
    block_height = height // g
    return BlockGrid(
        g=g,
        source_width=width,
        source_height=height,
        cropped_width=g * block_width,
        cropped_height=g * block_height,
        block_width=block_width,
        block_height=block_height,
    )


def extract_block(frame: Frame, grid: BlockGrid, row: int, col: int) -> np.ndarray:
    """Piksele komórki (row, col) jako tablica (block_height, block_width); czysty odczyt."""
    rows, cols = grid.cell_slices(row, col)
    if frame.width < grid.cropped_width or frame.height < grid.cropped_height:
        raise FrameTooSmallError("<frame>", f"klatka {frame.width}x{frame.height} mniejsza niż siatka")
    return frame.pixels[rows, cols]


def block_stack(frame: Frame, grid: BlockGrid) -> np.ndarray:
    """
    Wszystkie bloki klatki jako tablica (g*g, block_height, block_width).

    Komórki w kolejności row-major (indeks = row * g + col). Zwraca kopię.
    """
    g, bh, bw = grid.g, grid.block_height, grid.block_width
    cropped = frame.pixels[:grid.cropped_height, :grid.cropped_width]
    return cropped.reshape(g, bh, g, bw).swapaxes(1, 2).reshape(g * g, bh, bw).copy()


def unstack_blocks(blocks: np.ndarray, grid: BlockGrid) -> np.ndarray:
    """Odwrotność block_stack: (g*g, bh, bw) -> obraz (cropped_height, cropped_width)."""
    g, bh, bw = grid.g, grid.block_height, grid.block_width
    return blocks.reshape(g, g, bh, bw).swapaxes(1, 2).reshape(g * bh, g * bw)


def validate_thresholds(thresholds: Sequence[float]) -> Tuple[float, float]:
    low, high = (float(t) for t in thresholds)
    if low < 0 or high <= low:
        raise ParameterError(f"Progi siatki muszą spełniać 0 <= low < high, są {low}, {high}")
    return low, high
