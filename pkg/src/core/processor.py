import csv
import os
import sys
import time
from collections.abc import Sequence
from typing import Callable, List, Optional

from tqdm import tqdm

from src.core.background import (
    BackgroundModel,
    backfill,
    build_srbi,
    check_model_matches,
    coverage,
    load_model,
    save_model,
    update_srbi,
)
from src.core.bench import bench_methods, format_report, noise_sensitivity, scene_params, write_report
from src.core.blocks import frame_entropy, grid_for_delta
from src.core.errors import ModelFileError, ModelIncompleteError, SequenceTooShortError, UsageError
from src.core.foreground import save_mask
from src.core.imaging import Frame, load_frame, prefilter, save_frame, sequence_indices
from src.core.pipeline import FrameResult, choose_grid, detect_frames
from src.core.scene import parse_scene_file, reference_scene
from src.core.schema import ComparatorConfig, RunConfig, default_configs
from src.utils.config import (
    DATA_OUTPUT,
    DEFAULT_MODEL_OUT,
    DEFAULT_REPORT_OUT,
    MASK_PATTERN,
    OBJECT_FRAME_PATTERN,
    OBJECTS_CSV_NAME,
)
from src.utils.helpers import format_seconds, sequence_filename, validate_path

OBJECTS_CSV_COLUMNS = ["frame_index", "object_index", "x", "y", "w", "h", "area", "label", "score"]


class FrameSource(Sequence):
    """
    Leniwa sekwencja klatek katalogu: plik wczytywany dopiero przy dostępie,
    z filtrem wstępnym. Wycinek zwraca nowe źródło (bez wczytywania plików).
    """

    def __init__(self, directory: str, pattern: str, indices: List[int], prefilter_kind: str = "none"):
        self.directory = directory
        self.pattern = pattern
        self.indices = list(indices)
        self.prefilter_kind = prefilter_kind
        self._last = None

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return FrameSource(self.directory, self.pattern, self.indices[item], self.prefilter_kind)
        index = self.indices[item]
        if self._last is not None and self._last[0] == index:
            return self._last[1]
        path = os.path.join(self.directory, sequence_filename(self.pattern, index))
        frame = prefilter(load_frame(path), self.prefilter_kind)
        self._last = (index, frame)
        return frame

    def path_of(self, position: int) -> str:
        return os.path.join(self.directory, sequence_filename(self.pattern, self.indices[position]))


class Processor:
    """Orkiestracja podkomend CLI: model, detect, bench, entropy."""

    def __init__(self, config: RunConfig, logger, echo: Callable[[str], None] = print):
        self.config = config
        self.logger = logger
        self.echo = echo

    # ------------------------------------------------------------------
    # Pomocnicze
    # ------------------------------------------------------------------

    def _progress(self, iterable, desc: str, total: Optional[int] = None):
        disabled = self.config.quiet or not sys.stderr.isatty()
        return tqdm(iterable, desc=desc, total=total, unit="klatka", disable=disabled, leave=False)

    def _explicit(self, field: str) -> bool:
        return field in self.config.model_fields_set

    def _source(self, minimum: int = 2) -> FrameSource:
        directory = self.config.input_dir
        if not directory:
            raise UsageError("Brak katalogu wejściowego (--input)")
        if not os.path.isdir(directory):
            raise UsageError(f"Katalog wejściowy nie istnieje: {directory}")
        indices = sequence_indices(directory, self.config.pattern)
        if len(indices) < minimum:
            raise SequenceTooShortError(len(indices), minimum)
        self.logger.info(f"Wejście: {directory} ({len(indices)} klatek, indeksy {indices[0]}-{indices[-1]})")
        return FrameSource(directory, self.config.pattern, indices, self.config.prefilter)

    def _comparator(self) -> ComparatorConfig:
        return self.config.comparator()

    def _ensure_dir(self, path: str) -> None:
        ok, message = validate_path(path)
        if not ok:
            raise ModelFileError(f"{path}: {message}")

    def _ensure_parent(self, path: str) -> None:
        parent = os.path.dirname(os.path.abspath(path))
        self._ensure_dir(parent)

    def _activate(self, raw: BackgroundModel, fallback: Frame, fallback_index: int) -> BackgroundModel:
        """Model gotowy do odejmowania: pełny albo uzupełniony klatką `fallback`."""
        if coverage(raw) >= 1.0:
            return raw
        if not self.config.backfill:
            raise ModelIncompleteError(
                f"Pokrycie SRBI {coverage(raw):.6f} < 1 przy wyłączonym uzupełnianiu (--no-backfill), "
                f"nieustalone komórki: {raw.unsettled_cells}"
            )
        active = backfill(raw, fallback)
        self.logger.warning(
            f"Uzupełniono {len(active.backfilled_cells)} komórek z klatki {fallback_index}: {active.backfilled_cells}"
        )
        return active

    # ------------------------------------------------------------------
    # model
    # ------------------------------------------------------------------

    def run_model(self) -> int:
        cfg = self._comparator()
        out = self.config.out or DEFAULT_MODEL_OUT
        source = self._source()
        self._ensure_parent(out)

        params = self.config.pipeline_params()
        grid, _ = choose_grid(source[0], source[1], params)
        window = source[:self.config.max_frames]
        raw = build_srbi(self._progress(window, "SRBI"), grid, cfg, self.config.max_frames, window.indices[0])
        raw_coverage = coverage(raw)

        model = raw
        if raw_coverage < 1.0 and self.config.backfill:
            last = raw.frames_consumed - 1
            model = self._activate(raw, window[last], window.indices[last])

        sidecar = save_model(model, out)
        self.logger.info(f"Zapisano SRBI: {out} (+ {sidecar})")
        self.echo(f"Metoda: {cfg.method}, siatka g={grid.g} ({grid.block_width}x{grid.block_height} px)")
        self.echo(f"Pokrycie SRBI: {raw_coverage:.6f}")
        self.echo(f"Zużyte klatki: {raw.frames_consumed} (pełne pokrycie po: {raw.frames_to_cover})")
        if model is not raw:
            self.echo(f"Uzupełnione komórki: {len(model.backfilled_cells)}")
        self.echo(f"Zapisano: {out}")

        if coverage(model) < self.config.min_coverage:
            self.logger.error(f"Pokrycie {coverage(model):.6f} poniżej minimum {self.config.min_coverage:.6f}")
            return 1
        return 0

    # ------------------------------------------------------------------
    # detect
    # ------------------------------------------------------------------

    def _initial_model(self, source: FrameSource, cfg: ComparatorConfig):
        """(model z klatek lub pliku, model aktywny)."""
        params = self.config.pipeline_params()
        if self.config.model_path:
            raw = load_model(self.config.model_path)
            mismatch = check_model_matches(raw, source[0])
            if mismatch:
                raise ModelFileError(f"Model {self.config.model_path} niezgodny z wejściem: {mismatch}")
            self.logger.info(f"Wczytano SRBI {self.config.model_path}: g={raw.grid.g}, pokrycie {coverage(raw):.6f}")
            return raw, self._activate(raw, source[0], source.indices[0])

        budget = self.config.model_frames
        if budget is None:
            raise UsageError("Brak modelu: podaj --model <plik.pgm> albo --model-frames N")
        grid, _ = choose_grid(source[0], source[1], params)
        window = source[:budget]
        raw = build_srbi(window, grid, cfg, budget, window.indices[0])
        self.logger.info(f"SRBI z {raw.frames_consumed} klatek: pokrycie {coverage(raw):.6f}")
        last = raw.frames_consumed - 1
        return raw, self._activate(raw, window[last], window.indices[last])

    def _rebuild(self, raw: BackgroundModel, active: BackgroundModel, source: FrameSource, start: int,
                 cfg: ComparatorConfig):
        window = source[start:start + self.config.max_frames]
        if len(window) < 2:
            return raw, active
        candidate = update_srbi(raw, window, cfg, self.config.max_frames, window.indices[0])
        if candidate is raw:
            self.logger.info(f"Aktualizacja SRBI od klatki {window.indices[0]}: zachowano poprzedni model")
            return raw, active
        self.logger.info(
            f"Aktualizacja SRBI od klatki {window.indices[0]}: nowy model, pokrycie {coverage(candidate):.6f}"
        )
        last = candidate.frames_consumed - 1
        return candidate, self._activate(candidate, window[last], window.indices[last])

    def _write_result(self, result: FrameResult, out_dir: str, writer) -> None:
        """Maska (+ opcjonalnie klatka z obiektami) i wiersze CSV jednej klatki."""
        save_mask(result.mask, os.path.join(out_dir, sequence_filename(MASK_PATTERN, result.index)))
        if self.config.write_object_frames:
            save_frame(result.masked_frame,
                       os.path.join(out_dir, sequence_filename(OBJECT_FRAME_PATTERN, result.index)))
        for object_index, obj in enumerate(result.objects):
            x, y, w, h = obj.bbox
            writer.writerow([result.index, object_index, x, y, w, h, obj.area, obj.label, f"{obj.score:.6f}"])

    def run_detect(self) -> int:
        started = time.perf_counter()
        cfg = self._comparator()
        params = self.config.pipeline_params()
        source = self._source(minimum=1)
        if self.config.model_path is None and len(source) < 2:
            raise SequenceTooShortError(len(source))

        out_dir = self.config.out_dir or os.path.join(DATA_OUTPUT, "detect")
        objects_csv = self.config.objects_csv or os.path.join(out_dir, OBJECTS_CSV_NAME)
        raw, active = self._initial_model(source, cfg)
        self._ensure_dir(out_dir)
        self._ensure_parent(objects_csv)

        period = self.config.rebuild_every
        total_objects = total_vehicles = 0
        with open(objects_csv, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(OBJECTS_CSV_COLUMNS)
            for start in range(0, len(source), period):
                if start > 0:
                    raw, active = self._rebuild(raw, active, source, start, cfg)
                segment = source[start:start + period]
                frames = list(self._progress(segment, f"detect od {segment.indices[0]}", len(segment)))
                results = detect_frames(active, frames, params, self.config.jobs, segment.indices[0])
                for result in results:
                    self._write_result(result, out_dir, writer)
                    total_objects += len(result.objects)
                    total_vehicles += len(result.vehicles)

        self.logger.info(f"detect: {len(source)} klatek w {format_seconds(time.perf_counter() - started)}")
        self.echo(f"Przetworzono klatek: {len(source)}")
        self.echo(f"Obiekty: {total_objects} (pojazdy: {total_vehicles})")
        self.echo(f"Maski: {out_dir}")
        self.echo(f"Obiekty CSV: {objects_csv}")
        return 0

    # ------------------------------------------------------------------
    # bench
    # ------------------------------------------------------------------

    def _scene_spec(self):
        name = self.config.scene
        if not name:
            raise UsageError("Brak pliku sceny (--scene)")
        if not os.path.exists(name) and name.upper() in ("S1", "S2"):
            return reference_scene(name)
        return parse_scene_file(name)

    def run_bench(self) -> int:
        started = time.perf_counter()
        spec = self._scene_spec()
        out = self.config.out or DEFAULT_REPORT_OUT

        explicit = [name for name in spec.pipeline_overrides() if self._explicit(name)]
        params = scene_params(spec, self.config.pipeline_params(), keep=explicit)

        configs = default_configs(xor_quant_shift=self.config.xor_shift, dct_keep=self.config.dct_k)
        if self._explicit("threshold") and self._explicit("method"):
            configs = [
                c.model_copy(update={"threshold": self.config.threshold}) if c.method == self.config.method else c
                for c in configs
            ]

        self._ensure_parent(out)
        report = bench_methods(spec, configs, params, self.config.jobs)
        write_report(report, out)
        if spec.noise_sigma > 0:
            ratios = noise_sensitivity(configs, spec.seed, sigma=spec.noise_sigma)
            self.logger.info(
                "Szum/zmiana treści: " + ", ".join(f"{m}={r:.4f}" for m, r in ratios.items())
            )
        self.logger.info(f"bench: {len(report.rows)} metod w {format_seconds(time.perf_counter() - started)}")
        self.echo(format_report(report))
        self.echo(f"Zapisano raport: {out}")
        return 0

    # ------------------------------------------------------------------
    # entropy
    # ------------------------------------------------------------------

    def run_entropy(self, paths: Optional[List[str]] = None) -> int:
        if paths:
            frames = [(p, prefilter(load_frame(p), self.config.prefilter)) for p in paths]
        else:
            source = self._source(minimum=1)
            frames = [(source.path_of(i), source[i]) for i in range(len(source))]
        if not frames:
            raise SequenceTooShortError(0, 1)

        values = []
        for path, frame in frames:
            value = frame_entropy(frame)
            values.append(value)
            self.echo(f"{os.path.basename(path)}\t{value:.6f}")

        if len(values) >= 2:
            delta = abs(values[0] - values[1])
            g = grid_for_delta(delta, self.config.grid_thresholds)
            self.echo(f"ΔH\t{delta:.6f}")
            self.echo(f"grid\t{g}")
        return 0
