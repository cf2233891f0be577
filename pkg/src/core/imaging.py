"""
Reprezentacja klatki, bezstratne I/O w skali szarości (netpbm P5/P6) i filtr wstępny.

Klatka to niemodyfikowalna tablica numpy uint8 (wiersz po wierszu). Wszystkie
operacje są czyste, więc klatki można bezpiecznie współdzielić między wątkami.
"""

import os
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.core.errors import (
    FrameTooSmallError,
    FrameWriteError,
    InconsistentSequenceError,
    MalformedHeaderError,
    ParameterError,
    SequenceTooShortError,
    TruncatedPayloadError,
    UnsupportedMaxvalError,
)
from src.utils.config import DEFAULT_PATTERN, PREFILTER_CHOICES

MIN_FRAME_SIZE = 16
GRAY_LEVELS = 256  # n z definicji entropii: 8-bitowe poziomy szarości

_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True, eq=False)
class Frame:
    """Jedna klatka w skali szarości; `pixels` ma kształt (height, width), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ParameterError(f"Klatka musi być dwuwymiarowa, jest {arr.ndim}D")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ParameterError("Intensywności muszą leżeć w [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        if arr is self.pixels:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self):
        return f"Frame({self.width}x{self.height})"


def frame_from_bytes(width: int, height: int, data) -> Frame:
    """Buduje klatkę z płaskiej sekwencji intensywności (row-major)."""
    arr = np.asarray(bytearray(data) if isinstance(data, (bytes, bytearray)) else data)
    if arr.size != width * height:
        raise ParameterError(f"Oczekiwano {width * height} pikseli, jest {arr.size}")
    return Frame(arr.reshape(height, width))


# ============================================================================
# NETPBM
# ============================================================================

def _read_header_tokens(data: bytes, count: int, path) -> Tuple[List[bytes], int]:
    """Czyta `count` tokenów nagłówka, pomijając komentarze `#`. Zwraca (tokeny, offset danych)."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= n:
            raise MalformedHeaderError(path, "nagłówek urywa się przed końcem")
        if data[pos] == ord("#"):
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeaderError(path, "niezakończony komentarz w nagłówku")
            pos = end + 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    # Dokładnie jeden biały znak oddziela maxval od danych binarnych
    if pos >= n or data[pos] not in _WHITESPACE:
        raise MalformedHeaderError(path, "brak białego znaku po maxval")
    return tokens, pos + 1


def decode_netpbm(data: bytes, path="<bytes>") -> Tuple[int, int, np.ndarray]:
    """
    Dekoduje binarny PGM (P5) lub PPM (P6) z maxval 255 do tablicy uint8 (h, w).

    PPM jest konwertowany do luminancji BT.601 w arytmetyce całkowitej:
    gray = (77*R + 150*G + 29*B + 128) >> 8.
    Nie sprawdza minimalnego rozmiaru (robi to load_frame).
    """
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise MalformedHeaderError(path, f"nieobsługiwany format {magic!r} (tylko P5/P6)")
    tokens, offset = _read_header_tokens(data[2:], 3, path)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeaderError(path, f"nieliczbowe pola nagłówka {tokens!r}")
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(path, f"niepoprawne wymiary {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxvalError(path, f"maxval {maxval}, obsługiwane tylko 255")

    channels = 1 if magic == b"P5" else 3
    needed = width * height * channels
    payload = data[offset:offset + needed]
    if len(payload) < needed:
        raise TruncatedPayloadError(path, f"{len(payload)} z {needed} bajtów danych")

    raw = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return width, height, raw.reshape(height, width).copy()

    rgb = raw.reshape(height, width, 3).astype(np.uint32)
    gray = (77 * rgb[..., 0] + 150 * rgb[..., 1] + 29 * rgb[..., 2] + 128) >> 8
    return width, height, gray.astype(np.uint8)


def encode_pgm(pixels: np.ndarray) -> bytes:
    height, width = pixels.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels, dtype=np.uint8).tobytes()


def load_frame(path, min_size: int = MIN_FRAME_SIZE) -> Frame:
    """Wczytuje klatkę P5/P6; klatki mniejsze niż `min_size` w którymkolwiek wymiarze są odrzucane."""
    with open(path, "rb") as f:
        data = f.read()
    width, height, pixels = decode_netpbm(data, path)
    if width < min_size or height < min_size:
        raise FrameTooSmallError(path, f"{width}x{height}, minimum {min_size}x{min_size}")
    return Frame(pixels)


def save_frame(frame: Frame, path) -> None:
    """Zapisuje klatkę jako binarny PGM (P5, maxval 255)."""
    try:
        with open(path, "wb") as f:
            f.write(encode_pgm(frame.pixels))
    except OSError as e:
        raise FrameWriteError(f"Nie można zapisać {path}: {e}") from e


# ============================================================================
# SEKWENCJE
# ============================================================================

def _pattern_regex(pattern: str) -> re.Pattern:
    match = re.search(r"%0?\d*d", pattern)
    if not match:
        raise ParameterError(f"Wzorzec '{pattern}' nie zawiera pola %d")
    prefix = re.escape(pattern[:match.start()])
    suffix = re.escape(pattern[match.end():])
    return re.compile(f"^{prefix}(\\d+){suffix}$")


def sequence_indices(directory, pattern: str = DEFAULT_PATTERN) -> List[int]:
    """Kolejne indeksy plików pasujących do wzorca, od najmniejszego obecnego do pierwszej luki."""
    regex = _pattern_regex(pattern)
    present = set()
    for name in os.listdir(directory):
        m = regex.match(name)
        if m and pattern % int(m.group(1)) == name:
            present.add(int(m.group(1)))
    if not present:
        return []
    index = min(present)
    indices = []
    while index in present:
        indices.append(index)
        index += 1
    return indices


def load_sequence(directory, pattern: str = DEFAULT_PATTERN) -> List[Frame]:
    """Wczytuje uporządkowaną sekwencję klatek o identycznych wymiarach (co najmniej 2)."""
    indices = sequence_indices(directory, pattern)
    if len(indices) < 2:
        raise SequenceTooShortError(len(indices))

    frames = [load_frame(os.path.join(str(directory), pattern % index)) for index in indices]
    check_same_shape(frames, indices[0])
    return frames


def check_same_shape(frames, first_index: int = 0) -> None:
    """Sprawdza zgodność wymiarów klatek w strumieniu (indeksy liczone od `first_index`)."""
    expected = None
    for offset, frame in enumerate(frames):
        size = (frame.width, frame.height)
        if expected is None:
            expected = size
        elif size != expected:
            raise InconsistentSequenceError(first_index + offset, expected, size)


# ============================================================================
# FILTR WSTĘPNY
# ============================================================================

def windowed_lower_median(pixels: np.ndarray, size: int = 3) -> np.ndarray:
    """
    Mediana w oknie size x size liczona tylko po pikselach w granicach obrazu.

    Przy parzystej liczbie pikseli w oknie (krawędzie, narożniki) wybierana jest
    niższa z dwóch środkowych wartości, więc wynik zawsze pochodzi z wejścia.
    """
    r = size // 2
    sentinel = GRAY_LEVELS  # większe od każdej intensywności, sortuje się na koniec
    padded = np.pad(pixels.astype(np.uint16), r, mode="constant", constant_values=sentinel)
    windows = sliding_window_view(padded, (size, size)).reshape(pixels.shape + (size * size,))
    ordered = np.sort(windows, axis=-1)
    counts = (ordered < sentinel).sum(axis=-1)
    pick = ((counts - 1) // 2)[..., None]
    return np.take_along_axis(ordered, pick, axis=-1)[..., 0].astype(np.uint8)


def prefilter(frame: Frame, kind: str = "none") -> Frame:
    """Redukcja szumu naturalnego przed modelowaniem: `none` albo `median3`."""
    if kind == "none":
        return frame
    if kind == "median3":
        return Frame(windowed_lower_median(frame.pixels, 3))
    raise ParameterError(f"Nieznany filtr wstępny '{kind}', dostępne: {', '.join(PREFILTER_CHOICES)}")
