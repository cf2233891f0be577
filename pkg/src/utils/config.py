import os
from dotenv import load_dotenv

# Wczytaj zmienne środowiskowe z .env
load_dotenv()

# Metody porównywania bloków (kolejność = kolejność w raporcie bench)
METHODS = ["absdiff", "entropy", "xor", "dct"]

# Domyślne progi w jednostkach danej metody (strojone na scenie syntetycznej S2).
# Para klatek z samym szumem sigma = 5 musi dać Static w każdym bloku siatki.
DEFAULT_THRESHOLDS = {
    "absdiff": 6.0,   # średnia |a-b| w poziomach szarości
    "entropy": 0.5,   # |H(a)-H(b)| w bitach
    "xor": 0.7,       # ułamek zmienionych pikseli (szum przy q = 3 to ok. 0.3-0.6)
    "dct": 15.0,      # średnia |f_a-f_b| po K współczynnikach (szum po median3 to ok. 7)
}

DEFAULT_XOR_SHIFT = 3
DEFAULT_DCT_KEEP = 10
ENTROPY_LOG_BASE = 2  # stała, nie konfigurowalna

# Siatka bloków
GRID_CHOICES = [8, 16, 32]
DEFAULT_GRID_THRESHOLDS = (0.05, 0.2)

# Pierwszy etap (noise cancellation)
PREFILTER_CHOICES = ["none", "median3"]
DEFAULT_PREFILTER = "none"

# Maska pierwszoplanowa
DEFAULT_SUBTRACT_SHIFT = 3
DEFAULT_MEDIAN_WINDOW = 3
DEFAULT_MIN_AREA_FRAC = 0.001  # 0.1% przyciętej klatki

# Profil dla klatek z szumem kamery (zapisany w scenes/s2.scene).
# Przy q = 6 jedyną granicą przedziałów w zakresie tła jest 128.
NOISY_PREFILTER = "median3"
NOISY_SUBTRACT_SHIFT = 6
NOISY_MEDIAN_WINDOW = 7

# SRBI
DEFAULT_MAX_FRAMES = int(os.getenv("DETEKCJA_MAX_FRAMES", "150"))
DEFAULT_REBUILD_EVERY = int(os.getenv("DETEKCJA_REBUILD_EVERY", "300"))
DEFAULT_MIN_COVERAGE = 1.0

# Walidacja obiektów (heurystyka zamiast CNN)
DEFAULT_ASPECT_MIN = 0.5
DEFAULT_ASPECT_MAX = 4.0
DEFAULT_FILL_MIN = 0.4
DEFAULT_AREA_MIN_FRAC = 0.001
DEFAULT_AREA_MAX_FRAC = 0.5
VALIDATOR_CHOICES = ["heuristic"]

# Benchmark
DEFAULT_IOU_THRESHOLD = 0.5

# Wejście / wyjście
DEFAULT_PATTERN = "%06d.pgm"
MASK_PATTERN = "mask_%06d.pgm"
OBJECT_FRAME_PATTERN = "objects_%06d.pgm"
DEFAULT_MODEL_OUT = "srbi.pgm"
DEFAULT_REPORT_OUT = "report.csv"
OBJECTS_CSV_NAME = "objects.csv"
DEFAULT_JOBS = int(os.getenv("DETEKCJA_JOBS", "1"))
LOG_FILE = os.getenv("DETEKCJA_LOG_FILE", "app_debug.log")

# Ścieżki
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DATA_OUTPUT = os.path.join(BASE_DIR, 'data', 'output')


def defaults_table() -> str:
    """Tabela wartości domyślnych do epilogu --help (żadna nie pochodzi z publikacji)."""
    rows = [
        ("--threshold (absdiff/entropy/xor/dct)",
         "/".join(str(DEFAULT_THRESHOLDS[m]) for m in METHODS)),
        ("--xor-shift", str(DEFAULT_XOR_SHIFT)),
        ("--dct-k", str(DEFAULT_DCT_KEEP)),
        ("--grid-thresholds", f"{DEFAULT_GRID_THRESHOLDS[0]},{DEFAULT_GRID_THRESHOLDS[1]}"),
        ("--prefilter", DEFAULT_PREFILTER),
        ("--subtract-shift", str(DEFAULT_SUBTRACT_SHIFT)),
        ("--median-window", str(DEFAULT_MEDIAN_WINDOW)),
        ("--min-area", f"{DEFAULT_MIN_AREA_FRAC:.1%} przyciętej klatki"),
        ("--max-frames", str(DEFAULT_MAX_FRAMES)),
        ("--rebuild-every", str(DEFAULT_REBUILD_EVERY)),
        ("--aspect-min/--aspect-max", f"{DEFAULT_ASPECT_MIN}/{DEFAULT_ASPECT_MAX}"),
        ("--fill-min", str(DEFAULT_FILL_MIN)),
        ("--area-min-frac/--area-max-frac", f"{DEFAULT_AREA_MIN_FRAC}/{DEFAULT_AREA_MAX_FRAC}"),
        ("--jobs", str(DEFAULT_JOBS)),
    ]
    width = max(len(name) for name, _ in rows)
    lines = ["Wartości domyślne:"]
    lines += [f"  {name.ljust(width)}  {value}" for name, value in rows]
    return "\n".join(lines)
