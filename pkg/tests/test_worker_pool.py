import sys
import threading
import unittest
from pathlib import Path

# Dodaj katalog główny projektu do ścieżki
project_root = Path(__file__).resolve().parent.parent
sys.path.append(str(project_root))

from src.core.worker_pool import WorkerPool


class TestWorkerPool(unittest.TestCase):
    def test_single_job_runs_inline(self):
        caller = threading.get_ident()
        with WorkerPool(jobs=1) as pool:
            threads = pool.map(lambda _: threading.get_ident(), range(5))
        self.assertEqual(set(threads), {caller})

    def test_order_is_preserved(self):
        items = list(range(50))
        with WorkerPool(jobs=4) as pool:
            self.assertEqual(pool.map(lambda x: x * x, items), [x * x for x in items])

    def test_executor_closed_on_exit(self):
        pool = WorkerPool(jobs=3)
        with pool:
            self.assertIsNotNone(pool._executor)
        self.assertIsNone(pool._executor)

    def test_exception_propagates(self):
        def fail(x):
            if x == 3:
                raise ValueError("klatka 3")
            return x

        with self.assertRaises(ValueError):
            with WorkerPool(jobs=2) as pool:
                pool.map(fail, range(6))

    def test_invalid_jobs(self):
        with self.assertRaises(ValueError):
            WorkerPool(jobs=0)


if __name__ == "__main__":
    unittest.main()
