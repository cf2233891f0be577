"""
Budowa statycznego obrazu tła (SRBI) blok po bloku.

Dla kolejnych par sąsiednich klatek (t, t+1) każda nieustalona komórka siatki
jest porównywana skonfigurowaną metodą; przy werdykcie Static blok z klatki t+1
trafia do bufora tła, a komórka zostaje oznaczona jako ustalona (t+1).
Budowa kończy się po ustaleniu wszystkich komórek albo po wyczerpaniu budżetu
klatek. Aktualizacja to pełna przebudowa z podmianą tylko przy sukcesie.
"""

import os
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

import numpy as np

from src.core.blocks import BlockGrid, block_stack, make_grid, unstack_blocks
from src.core.comparators import score_grid, static_mask
from src.core.errors import (
    FrameLoadError,
    InconsistentSequenceError,
    ModelFileError,
    SequenceTooShortError,
)
from src.core.imaging import Frame, load_frame, save_frame
from src.core.schema import ComparatorConfig
from src.utils.config import DEFAULT_MAX_FRAMES

UNSETTLED = -1
BACKFILLED = -2

STATUS_NAMES = {UNSETTLED: "unsettled", BACKFILLED: "backfilled"}


@dataclass(frozen=True, eq=False)
class BackgroundModel:
    """SRBI: bufor tła (przycięty obszar) + status każdej komórki (g x g)."""

    grid: BlockGrid
    pixels: np.ndarray       # (cropped_height, cropped_width), uint8
    cell_status: np.ndarray  # (g, g): -1 nieustalona, -2 uzupełniona, >= 0 indeks klatki
    built_from: Tuple[int, int] = (0, 0)  # [pierwsza, ostatnia] zużyta klatka
    frames_consumed: int = 0
    frames_to_cover: int = -1

    def __post_init__(self):
        self.pixels.setflags(write=False)
        self.cell_status.setflags(write=False)

    @property
    def unsettled_cells(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(self.cell_status == UNSETTLED)
        return list(zip(rows.tolist(), cols.tolist()))

    @property
    def backfilled_cells(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(self.cell_status == BACKFILLED)
        return list(zip(rows.tolist(), cols.tolist()))

    def as_frame(self) -> Frame:
        return Frame(self.pixels)


def empty_model(grid: BlockGrid) -> BackgroundModel:
    return BackgroundModel(
        grid=grid,
        pixels=np.zeros((grid.cropped_height, grid.cropped_width), dtype=np.uint8),
        cell_status=np.full((grid.g, grid.g), UNSETTLED, dtype=np.int64),
    )


def coverage(model: BackgroundModel) -> float:
    """Ułamek ustalonych komórek w [0, 1]."""
    return float(np.count_nonzero(model.cell_status != UNSETTLED)) / model.grid.cell_count


def _check_frame(frame: Frame, grid: BlockGrid, index: int) -> None:
    if not grid.matches(frame):
        raise InconsistentSequenceError(
            index, (grid.source_width, grid.source_height), (frame.width, frame.height)
        )


def build_srbi(frames: Iterable[Frame], grid: BlockGrid, cfg: ComparatorConfig,
               max_frames: int = DEFAULT_MAX_FRAMES, first_index: int = 0) -> BackgroundModel:
    """
    Buduje SRBI ze strumienia klatek (porównania wyłącznie sąsiednich klatek).

    Zwraca model z osiągniętym pokryciem - także częściowym, gdy budżet
    `max_frames` się wyczerpie. Kolejność komórek row-major, kolejność klatek
    jak w strumieniu, więc wynik jest deterministyczny.
    """
    if max_frames < 2:
        raise SequenceTooShortError(max_frames)

    stream = iter(frames)
    previous = next(stream, None)
    if previous is None:
        raise SequenceTooShortError(0)
    _check_frame(previous, grid, first_index)

    n_cells = grid.cell_count
    buffer = np.zeros((n_cells, grid.block_height, grid.block_width), dtype=np.uint8)
    status = np.full(n_cells, UNSETTLED, dtype=np.int64)
    previous_blocks = block_stack(previous, grid)
    consumed = 1
    frames_to_cover = -1

    for current in stream:
        if consumed >= max_frames:
            break
        index = first_index + consumed
        _check_frame(current, grid, index)
        consumed += 1

        current_blocks = block_stack(current, grid)
        pending = np.flatnonzero(status == UNSETTLED)
        scores = score_grid(previous_blocks[pending], current_blocks[pending], cfg)
        agreed = pending[static_mask(scores, cfg)]
        # Blok zapisywany dosłownie z późniejszej klatki pary
        buffer[agreed] = current_blocks[agreed]
        status[agreed] = index

        if not np.any(status == UNSETTLED):
            frames_to_cover = consumed
            break
        previous_blocks = current_blocks

    if consumed < 2:
        raise SequenceTooShortError(consumed)

    return BackgroundModel(
        grid=grid,
        pixels=np.ascontiguousarray(unstack_blocks(buffer, grid)),
        cell_status=status.reshape(grid.g, grid.g),
        built_from=(first_index, first_index + consumed - 1),
        frames_consumed=consumed,
        frames_to_cover=frames_to_cover,
    )


def backfill(model: BackgroundModel, fallback: Frame) -> BackgroundModel:
    """Uzupełnia nieustalone komórki pikselami z `fallback`; ustalone pozostają bez zmian."""
    grid = model.grid
    if not grid.matches(fallback):
        raise InconsistentSequenceError(
            -1, (grid.source_width, grid.source_height), (fallback.width, fallback.height)
        )
    missing = model.cell_status == UNSETTLED
    if not missing.any():
        return model

    blocks = block_stack(model.as_frame(), grid)
    fallback_blocks = block_stack(fallback, grid)
    flat_missing = missing.reshape(-1)
    blocks[flat_missing] = fallback_blocks[flat_missing]
    status = model.cell_status.copy()
    status[missing] = BACKFILLED
    return replace(
        model,
        pixels=np.ascontiguousarray(unstack_blocks(blocks, grid)),
        cell_status=status,
    )


def update_srbi(model: BackgroundModel, frames: Iterable[Frame], cfg: ComparatorConfig,
                max_frames: int = DEFAULT_MAX_FRAMES, first_index: int = 0) -> BackgroundModel:
    """
    Pełna przebudowa SRBI z nowych klatek; nowy model zastępuje stary tylko wtedy,
    gdy jego pokrycie jest nie mniejsze (inaczej zwracany jest stary model).
    """
    rebuilt = build_srbi(frames, model.grid, cfg, max_frames, first_index)
    if coverage(rebuilt) >= coverage(model):
        return rebuilt
    return model


# ============================================================================
# ZAPIS / ODCZYT MODELU (PGM + plik statusu)
# ============================================================================

def status_path(path) -> str:
    return os.path.splitext(str(path))[0] + ".status"


def status_lines(model: BackgroundModel) -> List[str]:
    grid = model.grid
    lines = [f"# g={grid.g} width={grid.source_width} height={grid.source_height}"]
    for row in range(grid.g):
        for col in range(grid.g):
            value = int(model.cell_status[row, col])
            name = STATUS_NAMES.get(value, "settled")
            settle_index = value if value >= 0 else -1
            lines.append(f"{row} {col} {name} {settle_index}")
    return lines


def save_model(model: BackgroundModel, path) -> str:
    """Zapisuje SRBI jako PGM oraz plik statusu komórek. Zwraca ścieżkę pliku statusu."""
    save_frame(model.as_frame(), path)
    sidecar = status_path(path)
    try:
        with open(sidecar, "w", encoding="utf-8") as f:
            f.write("\n".join(status_lines(model)) + "\n")
    except OSError as e:
        raise ModelFileError(f"Nie można zapisać statusu {sidecar}: {e}") from e
    return sidecar


def load_model(path) -> BackgroundModel:
    """Wczytuje SRBI zapisane przez save_model."""
    sidecar = status_path(path)
    try:
        frame = load_frame(path, min_size=1)
    except (OSError, FrameLoadError) as e:
        raise ModelFileError(f"Nie można wczytać modelu {path}: {e}") from e
    if not os.path.exists(sidecar):
        raise ModelFileError(f"Brak pliku statusu {sidecar}")

    header = {}
    cells = []
    with open(sidecar, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for item in line[1:].split():
                    if "=" in item:
                        key, value = item.split("=", 1)
                        header[key] = value
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ModelFileError(f"{sidecar}: niepoprawna linia '{line}'")
            cells.append(parts)

    g = int(round(len(cells) ** 0.5))
    if g * g != len(cells) or g == 0:
        raise ModelFileError(f"{sidecar}: {len(cells)} komórek to nie kwadrat g x g")
    try:
        source_width = int(header.get("width", frame.width))
        source_height = int(header.get("height", frame.height))
    except ValueError:
        raise ModelFileError(f"{sidecar}: niepoprawny nagłówek {header}")
    grid = make_grid(source_width, source_height, g)
    if (grid.cropped_width, grid.cropped_height) != (frame.width, frame.height):
        raise ModelFileError(
            f"Model {frame.width}x{frame.height} niezgodny z siatką g={g} dla {source_width}x{source_height}"
        )

    status = np.full((g, g), UNSETTLED, dtype=np.int64)
    codes = {"unsettled": UNSETTLED, "backfilled": BACKFILLED}
    for row, col, name, settle_index in cells:
        r, c = int(row), int(col)
        if not (0 <= r < g and 0 <= c < g):
            raise ModelFileError(f"{sidecar}: komórka ({r}, {c}) poza siatką")
        if name == "settled":
            status[r, c] = int(settle_index)
        elif name in codes:
            status[r, c] = codes[name]
        else:
            raise ModelFileError(f"{sidecar}: nieznany status '{name}'")

    settled = status[status >= 0]
    built_from = (int(settled.min()), int(settled.max())) if settled.size else (0, 0)
    return BackgroundModel(grid=grid, pixels=frame.pixels.copy(), cell_status=status, built_from=built_from)


def check_model_matches(model: BackgroundModel, frame: Frame) -> Optional[str]:
    """Zwraca opis niezgodności wymiarów modelu i klatki albo None."""
    if model.grid.matches(frame):
        return None
    return (f"model dla {model.grid.source_width}x{model.grid.source_height}, "
            f"klatka {frame.width}x{frame.height}")
