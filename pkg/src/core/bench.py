"""
Porównanie czterech metod modelowania tła na scenie syntetycznej.

Metryki pikselowe liczone z sumarycznej macierzy pomyłek po wszystkich klatkach;
metryki obiektowe z zachłannego dopasowania ramek po malejącym IoU (jeden do
jednego) w każdej klatce. Dokładność detekcji = TP / (TP + FP + FN).
"""

import csv
import io
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.core.background import coverage
from src.core.blocks import BlockGrid
from src.core.errors import ParameterError, SequenceTooShortError, ShapeError
from src.core.comparators import score_grid
from src.core.imaging import Frame
from src.core.pipeline import build_model, choose_grid, detect_frames, prepare_frames
from src.core.scene import Box, Scene, gaussian_noise, gen_scene
from src.core.schema import BenchReport, ComparatorConfig, MethodMetrics, PipelineParams, SceneSpec, default_configs
from src.core.worker_pool import WorkerPool
from src.utils.config import DEFAULT_IOU_THRESHOLD
from src.utils.logger import logger

REPORT_COLUMNS = [
    "method", "pixel_precision", "pixel_recall", "pixel_f1",
    "mean_iou", "det_accuracy", "coverage", "frames_to_cover",
]


def iou(a: Box, b: Box) -> float:
    """IoU dwóch ramek (x, y, w, h); 0 dla rozłącznych, 1 dla identycznych."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def _box_of(item) -> Box:
    return tuple(item.bbox) if hasattr(item, "bbox") else tuple(item)


def _ratio(num: int, den: int, other_side: int) -> float:
    """num / den; przy den = 0 jest 1.0 tylko wtedy, gdy druga strona też jest pusta."""
    if den > 0:
        return num / den
    return 1.0 if other_side == 0 else 0.0


def greedy_match(preds: Sequence[Box], truths: Sequence[Box]):
    """Pary (pred, truth, iou) o dodatnim IoU, przydzielane po malejącym IoU, każda ramka raz."""
    candidates = []
    for i, p in enumerate(preds):
        for j, t in enumerate(truths):
            value = iou(p, t)
            if value > 0:
                candidates.append((-value, i, j))
    candidates.sort()

    used_p, used_t, pairs = set(), set(), []
    for neg_value, i, j in candidates:
        if i in used_p or j in used_t:
            continue
        used_p.add(i)
        used_t.add(j)
        pairs.append((i, j, -neg_value))
    return pairs


def _bits_of(mask) -> np.ndarray:
    return np.asarray(mask.bits if hasattr(mask, "bits") else mask) != 0


def evaluate(pred_masks, pred_objects, truth_masks, truth_boxes,
             iou_threshold: float = DEFAULT_IOU_THRESHOLD, ignore_boxes=None) -> MethodMetrics:
    """
    Metryki pikselowe i obiektowe dla całej sekwencji.

    Predykcja nietrafiona, która nachodzi na obszar ignorowany, nie jest ani TP,
    ani FP; obszar ignorowany nigdy nie jest FN.
    """
    n = len(truth_masks)
    if not (len(pred_masks) == len(pred_objects) == len(truth_boxes) == n):
        raise ParameterError(
            f"Różne długości sekwencji: maski {len(pred_masks)}/{n}, "
            f"obiekty {len(pred_objects)}/{len(truth_boxes)}"
        )
    if ignore_boxes is None:
        ignore_boxes = [[] for _ in range(n)]
    elif len(ignore_boxes) != n:
        raise ParameterError(f"ignore_boxes: {len(ignore_boxes)} klatek, oczekiwano {n}")

    px_tp = px_fp = px_fn = 0
    for pred, truth in zip(pred_masks, truth_masks):
        p, t = _bits_of(pred), _bits_of(truth)
        if p.shape != t.shape:
            raise ShapeError(f"Maski o różnych wymiarach: {p.shape} vs {t.shape}")
        px_tp += int(np.count_nonzero(p & t))
        px_fp += int(np.count_nonzero(p & ~t))
        px_fn += int(np.count_nonzero(~p & t))

    tp = fp = fn = 0
    iou_sum = 0.0
    truth_total = 0
    for preds, truths, ignored in zip(pred_objects, truth_boxes, ignore_boxes):
        preds = [_box_of(p) for p in preds]
        truths = [_box_of(t) for t in truths]
        ignored = [_box_of(b) for b in ignored]
        hits = set()
        for i, _, value in greedy_match(preds, truths):
            iou_sum += value
            if value >= iou_threshold:
                hits.add(i)
        misses = [p for i, p in enumerate(preds) if i not in hits]
        tp += len(hits)
        fn += len(truths) - len(hits)
        fp += sum(1 for p in misses if not any(iou(p, b) > 0 for b in ignored))
        truth_total += len(truths)

    precision = _ratio(px_tp, px_tp + px_fp, px_tp + px_fn)
    recall = _ratio(px_tp, px_tp + px_fn, px_tp + px_fp)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    mean_iou = iou_sum / truth_total if truth_total else (1.0 if tp + fp == 0 else 0.0)
    det_accuracy = _ratio(tp, tp + fp + fn, 0)

    return MethodMetrics(
        method="-",
        pixel_precision=precision,
        pixel_recall=recall,
        pixel_f1=f1,
        mean_iou=mean_iou,
        det_accuracy=det_accuracy,
        tp=tp,
        fp=fp,
        fn=fn,
    )


# ============================================================================
# PORÓWNANIE METOD
# ============================================================================

def scene_params(spec: SceneSpec, params: Optional[PipelineParams] = None,
                 keep: Iterable[str] = ()) -> PipelineParams:
    """Parametry potoku z nadpisaniami zapisanymi w scenie; pola z `keep` zostają bez zmian."""
    params = params or PipelineParams()
    keep = set(keep)
    overrides = {name: value for name, value in spec.pipeline_overrides().items() if name not in keep}
    if not overrides:
        return params
    logger.info(f"Parametry ze sceny: {overrides}")
    return params.model_copy(update=overrides)


def truth_for(scene: Scene, ignore_partial: bool = True):
    """
    (ramki prawdy, obszary ignorowane) dla oceny.

    Przy ignore_partial=False każdy widoczny fragment obiektu jest zwykłą ramką
    prawdy i nic nie jest ignorowane.
    """
    if ignore_partial:
        return scene.truth_boxes, scene.ignore_boxes
    plain = [list(boxes) + list(ignored) for boxes, ignored in zip(scene.truth_boxes, scene.ignore_boxes)]
    return plain, None


def run_method(scene: Scene, frames: List[Frame], grid: BlockGrid, cfg: ComparatorConfig,
               params: PipelineParams) -> MethodMetrics:
    """Jedna metoda: SRBI -> (backfill) -> maski, obiekty, walidacja -> ocena."""
    raw, model = build_model(frames, grid, cfg, params)
    results = detect_frames(model, frames, params)
    truth_boxes, ignore_boxes = truth_for(scene, params.ignore_partial)
    metrics = evaluate(
        [r.mask for r in results],
        [r.vehicles for r in results],
        scene.truth_masks,
        truth_boxes,
        params.iou_threshold,
        ignore_boxes,
    )
    return metrics.model_copy(update={
        "method": cfg.method,
        "coverage": coverage(raw),
        "frames_to_cover": raw.frames_to_cover,
    })


def bench_methods(spec: SceneSpec, configs: Optional[Sequence[ComparatorConfig]] = None,
                  params: Optional[PipelineParams] = None, jobs: int = 1) -> BenchReport:
    """
    Jeden wiersz raportu na metodę; metody liczone niezależnie (opcjonalnie równolegle).

    Bez `params` obowiązują wartości domyślne z nadpisaniami zapisanymi w scenie.
    """
    configs = list(configs) if configs is not None else default_configs()
    params = params if params is not None else scene_params(spec)

    scene = gen_scene(spec)
    frames = prepare_frames(scene.frames, params.prefilter)
    if len(frames) < 2:
        raise SequenceTooShortError(len(frames))
    grid, _ = choose_grid(frames[0], frames[1], params)

    def one(cfg: ComparatorConfig) -> MethodMetrics:
        return run_method(scene, frames, grid, cfg, params)

    with WorkerPool(jobs) as pool:
        rows = pool.map(one, configs)

    report = BenchReport(seed=spec.seed, sigma=spec.noise_sigma, rows=rows, ignore_partial=params.ignore_partial)
    for row in rows:
        logger.info(
            f"Bench [{row.method}] seed={spec.seed} sigma={spec.noise_sigma:g}: "
            f"F1={row.pixel_f1:.6f} IoU={row.mean_iou:.6f} acc={row.det_accuracy:.6f} "
            f"(TP={row.tp} FP={row.fp} FN={row.fn}) pokrycie={row.coverage:.6f}"
        )
    return report


# ============================================================================
# WRAŻLIWOŚĆ NA SZUM
# ============================================================================

NOISE_PATCH_INTENSITY = 230


def _noise_blocks(seed: int, pairs: int, block: int, sigma: float):
    rng = np.random.Generator(np.random.Philox(seed))
    base = rng.integers(80, 177, size=(pairs, block, block)).astype(np.float64)

    def noisy():
        if sigma <= 0:
            return base.astype(np.uint8)
        return np.clip(np.rint(base + gaussian_noise(base.shape, sigma, rng)), 0, 255).astype(np.uint8)

    a, b = noisy(), noisy()
    changed = b.copy()
    changed[:, : block // 2, :] = NOISE_PATCH_INTENSITY
    return a, b, changed


def noise_sensitivity(configs: Optional[Sequence[ComparatorConfig]] = None, seed: int = 0,
                      pairs: int = 200, block: int = 8, sigma: float = 5.0) -> Dict[str, float]:
    """
    Średni wynik par różniących się tylko szumem podzielony przez średni wynik
    par ze zmianą treści (górna połowa bloku zasłonięta jasnym prostokątem).

    Mniej znaczy odporniej. Pomiar, nie założenie: wynik zależy od metody i sigma.
    """
    if pairs < 1 or block < 2:
        raise ParameterError(f"noise_sensitivity: pairs={pairs}, block={block}")
    configs = list(configs) if configs is not None else default_configs()
    a, b, changed = _noise_blocks(seed, pairs, block, sigma)

    ratios = {}
    for cfg in configs:
        noise = float(score_grid(a, b, cfg).mean())
        content = float(score_grid(a, changed, cfg).mean())
        ratios[cfg.method] = noise / content if content > 0 else float("inf")
    return ratios


# ============================================================================
# RAPORT
# ============================================================================

def report_rows(report: BenchReport) -> List[List[str]]:
    rows = []
    for m in report.rows:
        rows.append([
            m.method,
            f"{m.pixel_precision:.6f}",
            f"{m.pixel_recall:.6f}",
            f"{m.pixel_f1:.6f}",
            f"{m.mean_iou:.6f}",
            f"{m.det_accuracy:.6f}",
            f"{m.coverage:.6f}",
            str(m.frames_to_cover),
        ])
    return rows


def report_csv(report: BenchReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    writer.writerows(report_rows(report))
    return buffer.getvalue()


def write_report(report: BenchReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(report_csv(report))


def format_report(report: BenchReport) -> str:
    """Tabela do wypisania na stdout (z odciskiem sceny: ziarno i sigma, oraz regułą oceny)."""
    table = [REPORT_COLUMNS] + report_rows(report)
    widths = [max(len(row[i]) for row in table) for i in range(len(REPORT_COLUMNS))]
    lines = [f"scena: seed={report.seed} sigma={report.sigma:g}"]
    if report.ignore_partial:
        lines.append("ocena: obiekty widoczne w < 50% ignorowane (--count-partial liczy je jako prawdę)")
    else:
        lines.append("ocena: każdy widoczny fragment obiektu jest ramką prawdy")
    for row in table:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)
