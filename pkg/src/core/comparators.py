"""
Cztery miary niepodobieństwa bloków (różnica bezwzględna, entropia, XOR, DCT)
z jednym punktem wejścia `compare` i wersją wsadową `score_grid`.

Wszystkie wyniki liczone są przez funkcje wsadowe (n bloków naraz); wersje dla
pojedynczej pary bloków to wywołania z n = 1, więc obie ścieżki dają te same bity.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from src.core.blocks import entropy_from_counts
from src.core.errors import ParameterError, ShapeError
from src.core.imaging import GRAY_LEVELS
from src.core.schema import ComparatorConfig

STATIC = "Static"
DYNAMIC = "Dynamic"


@dataclass(frozen=True)
class Verdict:
    score: float
    verdict: str

    @property
    def is_static(self) -> bool:
        return self.verdict == STATIC


def _pair(a, b) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"Bloki o różnych wymiarach: {a.shape} vs {b.shape}")
    if a.ndim != 2 or a.size == 0:
        raise ShapeError(f"Blok musi być niepustą macierzą 2D, jest {a.shape}")
    return a, b


def _stack_pair(a, b) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"Stosy bloków o różnych wymiarach: {a.shape} vs {b.shape}")
    if a.ndim != 3:
        raise ShapeError(f"Oczekiwano stosu (n, h, w), jest {a.shape}")
    return a, b


# ============================================================================
# RÓŻNICA BEZWZGLĘDNA / ENTROPIA / XOR (wersje wsadowe)
# ============================================================================

def absdiff_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _stack_pair(a, b)
    diff = np.abs(a.astype(np.int16) - b.astype(np.int16))
    return diff.reshape(diff.shape[0], -1).mean(axis=1)


def block_entropies(blocks: np.ndarray) -> np.ndarray:
    """Entropia każdego bloku stosu (n, h, w) - histogramy z jednego bincount."""
    n = blocks.shape[0]
    per_block = blocks.shape[1] * blocks.shape[2]
    offsets = (np.arange(n, dtype=np.intp) * GRAY_LEVELS).repeat(per_block)
    counts = np.bincount(blocks.reshape(-1).astype(np.intp) + offsets, minlength=n * GRAY_LEVELS)
    return entropy_from_counts(counts.reshape(n, GRAY_LEVELS), np.full(n, per_block))


def entropy_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _stack_pair(a, b)
    return np.abs(block_entropies(a) - block_entropies(b))


def xor_scores(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    a, b = _stack_pair(a, b)
    if not 0 <= q <= 7:
        raise ParameterError(f"Przesunięcie kwantyzacji q musi być w [0, 7], jest {q}")
    changed = ((a >> q) ^ (b >> q)) != 0
    return changed.reshape(changed.shape[0], -1).mean(axis=1)


# ============================================================================
# DCT-II
# ============================================================================

@lru_cache(maxsize=64)
def dct_matrix(n: int) -> np.ndarray:
    """Ortonormalna macierz bazowa DCT-II n x n: C[k, x] = a_k cos(pi (2x+1) k / 2n)."""
    x = np.arange(n, dtype=np.float64)
    k = x.reshape(-1, 1)
    basis = np.cos(np.pi * (2.0 * x + 1.0) * k / (2.0 * n))
    basis[0, :] *= np.sqrt(1.0 / n)
    basis[1:, :] *= np.sqrt(2.0 / n)
    basis.setflags(write=False)
    return basis


def dct2_stack(blocks: np.ndarray) -> np.ndarray:
    """Separowalna 2D DCT-II stosu bloków (n, h, w): C_h @ B @ C_w^T."""
    blocks = np.asarray(blocks, dtype=np.float64)
    h, w = blocks.shape[-2:]
    return dct_matrix(h) @ blocks @ dct_matrix(w).T


def dct2(block) -> np.ndarray:
    """Ortonormalna 2D DCT-II bloku; zachowuje energię (Parseval)."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.size == 0:
        raise ShapeError(f"Blok musi być niepustą macierzą 2D, jest {block.shape}")
    return dct2_stack(block[None])[0]


def idct2(coeffs) -> np.ndarray:
    """Odwrotna ortonormalna DCT-II (transpozycja bazy)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    h, w = coeffs.shape
    return dct_matrix(h).T @ coeffs @ dct_matrix(w)


@lru_cache(maxsize=64)
def zigzag_order(height: int, width: int) -> Tuple[Tuple[int, int], ...]:
    """
    Kolejność zygzakowata (jak w JPEG) dla macierzy prostokątnej.

    Przekątne d = row + col rosnąco; dla parzystych d idziemy w górę (row maleje),
    dla nieparzystych w dół; komórki spoza macierzy są pomijane.
    """
    order = []
    for d in range(height + width - 1):
        rows = range(min(d, height - 1), max(-1, d - width), -1)
        if d % 2 == 1:
            rows = reversed(rows)
        order.extend((r, d - r) for r in rows)
    return tuple(order)


@lru_cache(maxsize=64)
def _zigzag_flat(height: int, width: int, k: int) -> np.ndarray:
    idx = np.array([r * width + c for r, c in zigzag_order(height, width)[:k]], dtype=np.intp)
    idx.setflags(write=False)
    return idx


def zigzag_take(coeffs, k: int) -> np.ndarray:
    """Pierwsze K współczynników w kolejności zygzakowatej (wektor cech)."""
    coeffs = np.asarray(coeffs)
    h, w = coeffs.shape
    if not 1 <= k <= h * w:
        raise ParameterError(f"K musi być w [1, {h * w}], jest {k}")
    return coeffs.reshape(-1)[_zigzag_flat(h, w, k)]


def dct_features(blocks: np.ndarray, k: int) -> np.ndarray:
    """Wektory cech (n, K) dla stosu bloków."""
    coeffs = dct2_stack(blocks)
    n, h, w = coeffs.shape
    if not 1 <= k <= h * w:
        raise ParameterError(f"K musi być w [1, {h * w}], jest {k}")
    return coeffs.reshape(n, -1)[:, _zigzag_flat(h, w, k)]


def dct_scores(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    a, b = _stack_pair(a, b)
    return np.abs(dct_features(a, k) - dct_features(b, k)).mean(axis=1)


def effective_k(cfg: ComparatorConfig, block_area: int) -> int:
    """K przycięte do pola bloku (małe bloki przy g = 32)."""
    return max(1, min(cfg.dct_keep, block_area))


# ============================================================================
# WERSJE DLA POJEDYNCZEJ PARY BLOKÓW
# ============================================================================

def absdiff_score(a, b) -> float:
    a, b = _pair(a, b)
    return float(absdiff_scores(a[None], b[None])[0])


def entropy_score(a, b) -> float:
    a, b = _pair(a, b)
    return float(entropy_scores(a[None], b[None])[0])


def xor_score(a, b, q: int = 3) -> float:
    a, b = _pair(a, b)
    return float(xor_scores(a[None], b[None], q)[0])


def dct_score(a, b, k: int = 10) -> float:
    a, b = _pair(a, b)
    return float(dct_scores(a[None], b[None], k)[0])


# ============================================================================
# DISPATCH
# ============================================================================

def score_grid(a: np.ndarray, b: np.ndarray, cfg: ComparatorConfig) -> np.ndarray:
    """Wyniki skonfigurowanej metody dla stosów bloków (n, h, w)."""
    method = cfg.method
    if method == "absdiff":
        return absdiff_scores(a, b)
    if method == "entropy":
        return entropy_scores(a, b)
    if method == "xor":
        return xor_scores(a, b, cfg.xor_quant_shift)
    if method == "dct":
        a, b = _stack_pair(a, b)
        return dct_scores(a, b, effective_k(cfg, a.shape[1] * a.shape[2]))
    raise ParameterError(f"Nieznana metoda '{method}'")


def static_mask(scores: np.ndarray, cfg: ComparatorConfig) -> np.ndarray:
    """Static wtedy i tylko wtedy, gdy wynik < próg (ostra nierówność)."""
    return scores < cfg.effective_threshold


def compare(a, b, cfg: ComparatorConfig) -> Verdict:
    a, b = _pair(a, b)
    score = float(score_grid(a[None], b[None], cfg)[0])
    return Verdict(score=score, verdict=STATIC if score < cfg.effective_threshold else DYNAMIC)
