"""
Syntetyczne sceny z dokładną prawdą referencyjną.

Tło: value-noise (ziarno) + poziomy gradient. Obiekty: prostokąty o stałej
jasności przesuwane o (dx, dy) na klatkę. Szum: gaussowski, i.i.d., z generatora
Philox (licznikowego) i odwrotnej dystrybuanty, więc ta sama specyfikacja daje
identyczne bajty na każdej platformie.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.special import ndtri

from src.core.errors import ConfigFormatError, ParameterError
from src.core.foreground import ForegroundMask
from src.core.imaging import Frame
from src.core.schema import Mover, SceneSpec
from src.utils.config import NOISY_MEDIAN_WINDOW, NOISY_PREFILTER, NOISY_SUBTRACT_SHIFT
from src.utils.helpers import read_key_value_file

Box = Tuple[int, int, int, int]

BACKGROUND_BASE = 80.0
TEXTURE_AMPLITUDE = 64.0
GRADIENT_AMPLITUDE = 32.0
# Obiekt widoczny w mniej niż połowie jest obszarem ignorowanym w ocenie
MIN_VISIBLE_FRACTION = 0.5

_UNIFORM_BITS = 53


@dataclass(frozen=True, eq=False)
class Scene:
    spec: SceneSpec
    frames: List[Frame]
    truth_masks: List[ForegroundMask]
    true_background: Frame
    truth_boxes: List[List[Box]]
    ignore_boxes: List[List[Box]]


def _fade(t):
    """6t^5 - 15t^4 + 10t^3"""
    return t * t * t * (t * (t * 6 - 15) + 10)


def value_noise(height: int, width: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Value-noise 2D w [0, 1]: losowe wartości w węzłach siatki co `scale` pikseli, wygładzona interpolacja."""
    scale = max(scale, 1.0)
    lattice = rng.random((int(np.ceil(height / scale)) + 2, int(np.ceil(width / scale)) + 2))

    ys = np.arange(height, dtype=np.float64) / scale
    xs = np.arange(width, dtype=np.float64) / scale
    yi = np.floor(ys).astype(np.intp)
    xi = np.floor(xs).astype(np.intp)
    uy = _fade(ys - yi)[:, None]
    ux = _fade(xs - xi)[None, :]
    yi = yi[:, None]
    xi = xi[None, :]

    v00 = lattice[yi, xi]
    v01 = lattice[yi, xi + 1]
    v10 = lattice[yi + 1, xi]
    v11 = lattice[yi + 1, xi + 1]
    top = v00 + ux * (v01 - v00)
    bottom = v10 + ux * (v11 - v10)
    return top + uy * (bottom - top)


def background_image(spec: SceneSpec) -> np.ndarray:
    """Tło w [80, 176]: 80 + 64 * value-noise + 32 * x / (W - 1)."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    texture = value_noise(spec.height, spec.width, spec.texture_scale, rng)
    gradient = np.linspace(0.0, 1.0, spec.width)[None, :]
    image = BACKGROUND_BASE + TEXTURE_AMPLITUDE * texture + GRADIENT_AMPLITUDE * gradient
    return np.clip(np.rint(image), 0, 255).astype(np.uint8)


def gaussian_noise(shape, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Odchylenia N(0, sigma^2) z odwrotnej dystrybuanty; u leży w (0, 1), bez końców."""
    u = (rng.integers(0, 2 ** _UNIFORM_BITS, size=shape, dtype=np.int64) + 0.5) / float(2 ** _UNIFORM_BITS)
    return sigma * ndtri(u)


def clip_box(box: Box, width: int, height: int) -> Optional[Box]:
    x, y, w, h = box
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, width), min(y + h, height)
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


def gen_scene(spec: SceneSpec) -> Scene:
    """
    Generuje klatki, maski prawdy, prawdziwe tło oraz ramki prawdy i ignorowane.

    Klatka t = tło z prostokątami obiektów w pozycji start + t * prędkość
    (późniejsze obiekty przykrywają wcześniejsze), potem szum zaokrąglony
    i obcięty do [0, 255]. Maska prawdy t = suma widocznych prostokątów.
    """
    if spec.frame_count < 1:
        raise ParameterError("Scena musi mieć co najmniej jedną klatkę")

    background = background_image(spec)
    noise_rng = np.random.Generator(np.random.Philox(spec.seed).jumped())

    frames, masks, truth_boxes, ignore_boxes = [], [], [], []
    for t in range(spec.frame_count):
        image = background.copy()
        truth = np.zeros_like(background)
        boxes, ignored = [], []
        for mover in spec.movers:
            full = mover.box_at(t)
            visible = clip_box(full, spec.width, spec.height)
            if visible is None:
                continue
            x, y, w, h = visible
            image[y:y + h, x:x + w] = mover.intensity
            truth[y:y + h, x:x + w] = 1
            if w * h >= MIN_VISIBLE_FRACTION * mover.w * mover.h:
                boxes.append(visible)
            else:
                ignored.append(visible)

        if spec.noise_sigma > 0:
            noisy = image + gaussian_noise(image.shape, spec.noise_sigma, noise_rng)
            image = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)

        frames.append(Frame(image))
        masks.append(ForegroundMask(bits=truth, width=spec.width, height=spec.height))
        truth_boxes.append(boxes)
        ignore_boxes.append(ignored)

    return Scene(
        spec=spec,
        frames=frames,
        truth_masks=masks,
        true_background=Frame(background),
        truth_boxes=truth_boxes,
        ignore_boxes=ignore_boxes,
    )


# ============================================================================
# PLIKI SCEN
# ============================================================================

_SCALAR_KEYS = {
    "width": "width",
    "height": "height",
    "frames": "frame_count",
    "sigma": "noise_sigma",
    "seed": "seed",
    "texture_scale": "texture_scale",
    "prefilter": "prefilter",
    "subtract_shift": "subtract_shift",
    "median_window": "median_window",
}
_MOVER_FIELDS = ("x", "y", "w", "h", "intensity", "dx", "dy")


def _parse_mover(value: str, where: str) -> Mover:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != len(_MOVER_FIELDS):
        raise ConfigFormatError(f"{where}: mover wymaga {len(_MOVER_FIELDS)} liczb x,y,w,h,intensity,dx,dy")
    try:
        return Mover(**dict(zip(_MOVER_FIELDS, (int(p) for p in parts))))
    except (ValueError, ValidationError) as e:
        raise ConfigFormatError(f"{where}: niepoprawny mover '{value}': {e}") from e


def parse_scene_file(path) -> SceneSpec:
    """
    Wczytuje plik sceny `klucz=wartość`: width, height, frames, sigma, seed,
    powtarzalne `mover=x,y,w,h,intensity,dx,dy` oraz opcjonalne texture_scale,
    prefilter, subtract_shift, median_window.
    """
    try:
        entries = read_key_value_file(path)
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigFormatError(f"Nie można wczytać sceny {path}: {e}") from e
    except ValueError as e:
        raise ConfigFormatError(str(e)) from e

    fields = {}
    movers = []
    for lineno, key, value in entries:
        where = f"{path}:{lineno}"
        if key == "mover":
            movers.append(_parse_mover(value, where))
        elif key in _SCALAR_KEYS:
            if key == "seed":
                try:
                    value = int(value, 0)
                except ValueError:
                    raise ConfigFormatError(f"{where}: niepoprawne ziarno '{value}'")
            fields[_SCALAR_KEYS[key]] = value
        else:
            raise ConfigFormatError(f"{where}: nieznany klucz '{key}'")

    missing = [k for k in ("width", "height", "frames") if _SCALAR_KEYS[k] not in fields]
    if missing:
        raise ConfigFormatError(f"{path}: brak kluczy {', '.join(missing)}")
    try:
        return SceneSpec(movers=movers, **fields)
    except ValidationError as e:
        raise ConfigFormatError(f"{path}: {e}") from e


def scene_file_text(spec: SceneSpec) -> str:
    lines = [
        f"width={spec.width}",
        f"height={spec.height}",
        f"frames={spec.frame_count}",
        f"sigma={spec.noise_sigma:g}",
        f"seed={spec.seed}",
    ]
    if spec.texture_scale != SceneSpec.model_fields["texture_scale"].default:
        lines.append(f"texture_scale={spec.texture_scale:g}")
    for m in spec.movers:
        lines.append(f"mover={m.x},{m.y},{m.w},{m.h},{m.intensity},{m.dx},{m.dy}")
    if spec.prefilter is not None:
        lines.append(f"prefilter={spec.prefilter}")
    if spec.subtract_shift is not None:
        lines.append(f"subtract_shift={spec.subtract_shift}")
    if spec.median_window is not None:
        lines.append(f"median_window={spec.median_window}")
    return "\n".join(lines) + "\n"


def reference_scene(name: str) -> SceneSpec:
    """
    Sceny referencyjne: S1 (bez szumu) i S2 (S1 z szumem sigma = 5).

    S2 niesie profil potoku dla zaszumionych klatek (filtr wstępny, q odejmowania,
    okno mediany), ten sam co w scenes/s2.scene.
    """
    movers = [
        Mover(x=-40, y=30, w=12, h=8, intensity=220, dx=2, dy=0),
        Mover(x=170, y=60, w=12, h=8, intensity=40, dx=-1, dy=1),
    ]
    base = dict(width=160, height=120, frame_count=60, seed=42, movers=movers)
    key = name.upper()
    if key == "S1":
        return SceneSpec(noise_sigma=0.0, **base)
    if key == "S2":
        return SceneSpec(
            noise_sigma=5.0,
            prefilter=NOISY_PREFILTER,
            subtract_shift=NOISY_SUBTRACT_SHIFT,
            median_window=NOISY_MEDIAN_WINDOW,
            **base,
        )
    raise ParameterError(f"Nieznana scena referencyjna '{name}' (dostępne: S1, S2)")
