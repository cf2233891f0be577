from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.blocks import validate_thresholds
from src.core.errors import ParameterError
from src.utils.config import (
    DEFAULT_AREA_MAX_FRAC, DEFAULT_AREA_MIN_FRAC, DEFAULT_ASPECT_MAX, DEFAULT_ASPECT_MIN,
    DEFAULT_DCT_KEEP, DEFAULT_FILL_MIN, DEFAULT_GRID_THRESHOLDS, DEFAULT_IOU_THRESHOLD, DEFAULT_JOBS,
    DEFAULT_MAX_FRAMES, DEFAULT_MEDIAN_WINDOW, DEFAULT_MIN_COVERAGE, DEFAULT_PATTERN,
    DEFAULT_PREFILTER, DEFAULT_REBUILD_EVERY, DEFAULT_SUBTRACT_SHIFT, DEFAULT_THRESHOLDS,
    DEFAULT_XOR_SHIFT, ENTROPY_LOG_BASE,
)

Method = Literal["absdiff", "entropy", "xor", "dct"]
Prefilter = Literal["none", "median3"]


class ComparatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Method = Field(..., description="Metoda porównania bloków")
    threshold: Optional[float] = Field(default=None, ge=0, description="Próg w jednostkach metody (None = domyślny)")
    xor_quant_shift: int = Field(default=DEFAULT_XOR_SHIFT, ge=0, le=7, description="Przesunięcie q przed XOR")
    dct_keep: int = Field(default=DEFAULT_DCT_KEEP, ge=1, description="Liczba współczynników zygzaka K")
    entropy_log_base: Literal[2] = Field(default=ENTROPY_LOG_BASE, description="Podstawa logarytmu (stała)")

    @property
    def effective_threshold(self) -> float:
        return DEFAULT_THRESHOLDS[self.method] if self.threshold is None else self.threshold


def default_configs(**overrides) -> List[ComparatorConfig]:
    """Cztery konfiguracje z domyślnymi progami (kolejność jak w raporcie)."""
    return [ComparatorConfig(method=m, **overrides) for m in ("absdiff", "entropy", "xor", "dct")]


class HeuristicParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    aspect_min: float = Field(default=DEFAULT_ASPECT_MIN, gt=0, description="Min. proporcja w/h ramki")
    aspect_max: float = Field(default=DEFAULT_ASPECT_MAX, gt=0, description="Max. proporcja w/h ramki")
    fill_min: float = Field(default=DEFAULT_FILL_MIN, gt=0, le=1, description="Min. wypełnienie ramki")
    area_min_frac: float = Field(default=DEFAULT_AREA_MIN_FRAC, gt=0, description="Min. pole / pole klatki")
    area_max_frac: float = Field(default=DEFAULT_AREA_MAX_FRAC, gt=0, le=1, description="Max. pole / pole klatki")

    @model_validator(mode="after")
    def _check_bands(self):
        if self.aspect_min > self.aspect_max:
            raise ValueError("aspect_min musi być <= aspect_max")
        if self.area_min_frac >= self.area_max_frac:
            raise ValueError("area_min_frac musi być < area_max_frac")
        return self


GridMode = Union[Literal["auto"], Literal[8, 16, 32]]


class PipelineParams(BaseModel):
    """Parametry etapów po modelowaniu tła, wspólne dla `detect` i `bench`."""

    model_config = ConfigDict(frozen=True)

    grid: GridMode = Field(default="auto", description="Siatka: auto (z entropii) albo stałe g")
    grid_thresholds: Tuple[float, float] = Field(default=DEFAULT_GRID_THRESHOLDS, description="Progi ΔH dla g = 8/16/32")
    prefilter: Prefilter = Field(default=DEFAULT_PREFILTER, description="Filtr wstępny klatek")
    subtract_shift: int = Field(default=DEFAULT_SUBTRACT_SHIFT, ge=0, le=7, description="q przy odejmowaniu XOR")
    median_window: int = Field(default=DEFAULT_MEDIAN_WINDOW, ge=3, description="Okno mediany maski")
    min_area: Optional[float] = Field(default=None, ge=0, description="Min. pole obiektu (None = 0.1% przyciętej klatki)")
    max_frames: int = Field(default=DEFAULT_MAX_FRAMES, ge=2, description="Budżet klatek budowy SRBI")
    backfill: bool = Field(default=True, description="Uzupełnianie nieustalonych komórek ostatnią klatką")
    validate_objects: bool = Field(default=True, description="Walidacja obiektów (False = wszystko pojazdem)")
    validator: Literal["heuristic"] = "heuristic"
    heuristic: HeuristicParams = Field(default_factory=HeuristicParams)
    iou_threshold: float = Field(default=DEFAULT_IOU_THRESHOLD, gt=0, le=1)
    ignore_partial: bool = Field(default=True, description="Obiekt widoczny w < 50% jako obszar ignorowany")

    @field_validator("grid_thresholds")
    @classmethod
    def _check_thresholds(cls, value):
        return validate_thresholds(value)


class Mover(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: int = Field(..., description="Pozycja startowa (lewy górny róg), może być poza kadrem")
    y: int
    w: int = Field(..., ge=1)
    h: int = Field(..., ge=1)
    intensity: int = Field(..., ge=0, le=255)
    dx: int = Field(default=0, description="Prędkość na klatkę")
    dy: int = 0

    def box_at(self, t: int) -> Tuple[int, int, int, int]:
        return (self.x + t * self.dx, self.y + t * self.dy, self.w, self.h)


class SceneSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: int = Field(..., ge=16)
    height: int = Field(..., ge=16)
    frame_count: int = Field(..., ge=0, description="Liczba klatek (0 jest odrzucane przez gen_scene)")
    noise_sigma: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    movers: List[Mover] = Field(default_factory=list)
    texture_scale: float = Field(default=24.0, gt=0, description="Rozmiar komórki value-noise w pikselach")
    # Opcjonalne parametry potoku zapisane razem ze sceną
    prefilter: Optional[Prefilter] = None
    subtract_shift: Optional[int] = Field(default=None, ge=0, le=7)
    median_window: Optional[int] = Field(default=None, ge=3)

    @field_validator("median_window")
    @classmethod
    def _odd_window(cls, value):
        if value is not None and value % 2 == 0:
            raise ValueError("okno mediany musi być nieparzyste")
        return value

    def pipeline_overrides(self) -> Dict[str, object]:
        """Parametry potoku zapisane w scenie (tylko ustawione)."""
        fields = ("prefilter", "subtract_shift", "median_window")
        return {name: getattr(self, name) for name in fields if getattr(self, name) is not None}


class RunConfig(BaseModel):
    """Efektywna konfiguracja uruchomienia (domyślne < plik --config < flagi CLI)."""

    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    input_dir: Optional[str] = None
    pattern: str = DEFAULT_PATTERN
    grid: GridMode = "auto"
    grid_thresholds: Tuple[float, float] = DEFAULT_GRID_THRESHOLDS
    method: Method = "dct"
    threshold: Optional[float] = Field(default=None, ge=0)
    xor_shift: int = Field(default=DEFAULT_XOR_SHIFT, ge=0, le=7)
    dct_k: int = Field(default=DEFAULT_DCT_KEEP, ge=1)
    prefilter: Prefilter = DEFAULT_PREFILTER
    subtract_shift: int = Field(default=DEFAULT_SUBTRACT_SHIFT, ge=0, le=7)
    median_window: int = Field(default=DEFAULT_MEDIAN_WINDOW, ge=3)
    min_area: Optional[int] = Field(default=None, ge=1)
    max_frames: int = Field(default=DEFAULT_MAX_FRAMES, ge=2)
    min_coverage: float = Field(default=DEFAULT_MIN_COVERAGE, ge=0, le=1)
    backfill: bool = True
    rebuild_every: int = Field(default=DEFAULT_REBUILD_EVERY, ge=2)
    validate_objects: bool = True
    validator: Literal["heuristic"] = "heuristic"
    ignore_partial: bool = True
    aspect_min: float = DEFAULT_ASPECT_MIN
    aspect_max: float = DEFAULT_ASPECT_MAX
    fill_min: float = DEFAULT_FILL_MIN
    area_min_frac: float = DEFAULT_AREA_MIN_FRAC
    area_max_frac: float = DEFAULT_AREA_MAX_FRAC
    model_path: Optional[str] = None
    model_frames: Optional[int] = Field(default=None, ge=2)
    out: Optional[str] = None
    out_dir: Optional[str] = None
    objects_csv: Optional[str] = None
    write_object_frames: bool = False
    scene: Optional[str] = None
    jobs: int = Field(default=DEFAULT_JOBS, ge=1)
    quiet: bool = False
    log_file: Optional[str] = None

    @field_validator("grid", mode="before")
    @classmethod
    def _parse_grid(cls, value):
        if isinstance(value, str) and value.strip().isdigit():
            return int(value)
        return value

    @field_validator("grid_thresholds", mode="before")
    @classmethod
    def _parse_thresholds(cls, value):
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",")]
            if len(parts) != 2:
                raise ValueError("oczekiwano '<low>,<high>'")
            return tuple(float(p) for p in parts)
        return value

    @field_validator("median_window")
    @classmethod
    def _odd_window(cls, value):
        if value % 2 == 0:
            raise ValueError("okno mediany musi być nieparzyste")
        return value

    @model_validator(mode="after")
    def _check_combinations(self):
        try:
            validate_thresholds(self.grid_thresholds)
        except ParameterError as e:
            raise ValueError(f"grid_thresholds: {e}") from e
        # Walidacja pól heurystyki przez jej własny model
        self.heuristic_params()
        return self

    def comparator(self) -> ComparatorConfig:
        return ComparatorConfig(
            method=self.method,
            threshold=self.threshold,
            xor_quant_shift=self.xor_shift,
            dct_keep=self.dct_k,
        )

    def heuristic_params(self) -> HeuristicParams:
        return HeuristicParams(
            aspect_min=self.aspect_min,
            aspect_max=self.aspect_max,
            fill_min=self.fill_min,
            area_min_frac=self.area_min_frac,
            area_max_frac=self.area_max_frac,
        )

    def pipeline_params(self) -> PipelineParams:
        return PipelineParams(
            grid=self.grid,
            grid_thresholds=self.grid_thresholds,
            prefilter=self.prefilter,
            subtract_shift=self.subtract_shift,
            median_window=self.median_window,
            min_area=self.min_area,
            max_frames=self.max_frames,
            backfill=self.backfill,
            validate_objects=self.validate_objects,
            validator=self.validator,
            heuristic=self.heuristic_params(),
            ignore_partial=self.ignore_partial,
        )


class MethodMetrics(BaseModel):
    method: str
    pixel_precision: float
    pixel_recall: float
    pixel_f1: float
    mean_iou: float
    det_accuracy: float
    coverage: float = 0.0
    frames_to_cover: int = -1
    tp: int = 0
    fp: int = 0
    fn: int = 0


class BenchReport(BaseModel):
    seed: int
    sigma: float
    rows: List[MethodMetrics]
    ignore_partial: bool = True
