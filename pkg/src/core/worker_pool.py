"""
Worker pool - współbieżność etapów potoku (`--jobs N`).

Użycie jako context manager:
    with WorkerPool(jobs=4) as pool:
        masks = pool.map(make_one_mask, frames)
    # wątki zamknięte po wyjściu z bloku

Wyniki `map` zawsze wracają w kolejności wejścia, więc wynik nie zależy od N.
Przy jobs = 1 wszystko liczy się w bieżącym wątku.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from src.utils.config import DEFAULT_JOBS

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """
    Context manager z pulą wątków (numpy zwalnia GIL w ciężkich operacjach).

    Przykład:
        with WorkerPool(jobs=2) as pool:
            rows = pool.map(run_method, configs)
    """

    def __init__(self, jobs: int = DEFAULT_JOBS, name: str = "detekcja"):
        """
        Args:
            jobs: Liczba wątków roboczych (>= 1).
            name: Prefiks nazw wątków (widoczny w logach debug).
        """
        if jobs < 1:
            raise ValueError(f"jobs musi być >= 1, jest {jobs}")
        self.jobs = jobs
        self.name = name
        self._executor: Optional[ThreadPoolExecutor] = None

    def __enter__(self):
        if self.jobs > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.jobs, thread_name_prefix=self.name)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None
        return False  # Nie tłumimy wyjątków

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Jak wbudowane map, ale od razu zwraca listę w kolejności wejścia."""
        if self._executor is None:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))

