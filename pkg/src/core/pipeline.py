"""
Etapy potoku wspólne dla `detect` i `bench`: filtr wstępny, dobór siatki,
budowa modelu z uzupełnieniem, maska + obiekty + walidacja dla klatki.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from src.core.background import BackgroundModel, backfill, build_srbi, coverage
from src.core.blocks import BlockGrid, entropy_delta, grid_for_delta, make_grid
from src.core.errors import InconsistentSequenceError
from src.core.foreground import (
    DetectedObject,
    ForegroundMask,
    apply_mask,
    connected_components,
    default_min_area,
    make_mask,
)
from src.core.imaging import Frame, prefilter
from src.core.schema import ComparatorConfig, PipelineParams
from src.core.validation import VEHICLE, Classifier, classify_all, make_classifier
from src.core.worker_pool import WorkerPool
from src.utils.logger import logger


@dataclass(frozen=True, eq=False)
class FrameResult:
    index: int
    mask: ForegroundMask
    objects: List[DetectedObject]
    masked_frame: Frame

    @property
    def vehicles(self) -> List[DetectedObject]:
        return [obj for obj in self.objects if obj.label == VEHICLE]


def prepare_frames(frames: Sequence[Frame], kind: str) -> List[Frame]:
    return [prefilter(frame, kind) for frame in frames]


def choose_grid(first: Frame, second: Frame, params: PipelineParams) -> Tuple[BlockGrid, float]:
    """Siatka z ΔH pierwszej pary klatek (tryb auto) albo stała; zwraca też ΔH."""
    if first.shape != second.shape:
        raise InconsistentSequenceError(1, (first.width, first.height), (second.width, second.height))
    delta = entropy_delta(first, second)
    g = grid_for_delta(delta, params.grid_thresholds) if params.grid == "auto" else params.grid
    logger.info(f"Siatka: g={g} (ΔH={delta:.6f}, tryb {params.grid})")
    return make_grid(first.width, first.height, g), delta


def resolve_min_area(params: PipelineParams, grid: BlockGrid) -> float:
    if params.min_area is None:
        return default_min_area(grid.cropped_area)
    return params.min_area


def build_model(frames: Sequence[Frame], grid: BlockGrid, cfg: ComparatorConfig, params: PipelineParams,
                first_index: int = 0) -> Tuple[BackgroundModel, BackgroundModel]:
    """
    Buduje SRBI i - jeśli pokrycie < 1 i backfill włączony - uzupełnia je ostatnią
    zużytą klatką. Zwraca (model z samych klatek, model gotowy do odejmowania).
    """
    raw = build_srbi(frames, grid, cfg, params.max_frames, first_index)
    logger.info(
        f"SRBI [{cfg.method}]: pokrycie {coverage(raw):.6f}, klatki {raw.built_from[0]}-{raw.built_from[1]} "
        f"({raw.frames_consumed} zużytych), pełne pokrycie po {raw.frames_to_cover}"
    )
    if coverage(raw) >= 1.0 or not params.backfill:
        return raw, raw

    latest = frames[raw.frames_consumed - 1]
    active = backfill(raw, latest)
    logger.warning(
        f"SRBI [{cfg.method}]: uzupełniono {len(active.backfilled_cells)} komórek z klatki "
        f"{raw.built_from[1]}: {active.backfilled_cells}"
    )
    return raw, active


def detect_frame(model: BackgroundModel, frame: Frame, index: int, params: PipelineParams,
                 classifier: Classifier, min_area: float) -> FrameResult:
    mask = make_mask(model, frame, params.subtract_shift, params.median_window)
    masked = apply_mask(frame, mask)
    objects = connected_components(mask, min_area)
    labeled = classify_all(objects, masked, frame_area=model.grid.cropped_area, classifier=classifier)
    logger.debug(f"Klatka {index}: {len(labeled)} obiektów, {mask.count} pikseli maski")
    return FrameResult(index=index, mask=mask, objects=labeled, masked_frame=masked)


def detect_frames(model: BackgroundModel, frames: Sequence[Frame], params: PipelineParams,
                  jobs: int = 1, first_index: int = 0) -> List[FrameResult]:
    """Maski i obiekty dla wszystkich klatek; wyniki w kolejności klatek niezależnie od `jobs`."""
    classifier = make_classifier(params.validator, params.heuristic, params.validate_objects)
    min_area = resolve_min_area(params, model.grid)

    def one(item):
        offset, frame = item
        return detect_frame(model, frame, first_index + offset, params, classifier, min_area)

    with WorkerPool(jobs) as pool:
        return pool.map(one, list(enumerate(frames)))
