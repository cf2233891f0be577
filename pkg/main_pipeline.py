import argparse
import logging
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from src.core.errors import DetectionError, UsageError
from src.core.processor import Processor
from src.core.schema import RunConfig
from src.utils.config import GRID_CHOICES, METHODS, PREFILTER_CHOICES, VALIDATOR_CHOICES, defaults_table
from src.utils.helpers import read_key_value_file
from src.utils.logger import logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Nazwy opcji CLI, które w pliku --config mogą wystąpić pod krótszą nazwą
CONFIG_ALIASES = {
    "input": "input_dir",
    "model": "model_path",
    "write_objects_frames": "write_object_frames",
}


def _grid(value: str):
    if value == "auto":
        return value
    if value.isdigit() and int(value) in GRID_CHOICES:
        return int(value)
    raise argparse.ArgumentTypeError(f"oczekiwano auto lub jednej z {GRID_CHOICES}, jest '{value}'")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="Plik key=value z ustawieniami (flagi CLI mają pierwszeństwo)")
    p.add_argument("--jobs", type=int, help="Liczba wątków (wynik niezależny od N)")
    p.add_argument("--quiet", action="store_const", const=True, help="Bez pasków postępu")
    p.add_argument("--log-file", dest="log_file", help="Plik logu (domyślnie app_debug.log)")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", dest="input_dir", help="Katalog z klatkami PGM/PPM")
    p.add_argument("--pattern", help="Wzorzec nazw klatek (printf), np. %%06d.pgm")
    p.add_argument("--prefilter", choices=PREFILTER_CHOICES, help="Filtr wstępny klatek")


def _add_modeling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=_grid, help="auto albo stałe g (8, 16, 32)")
    p.add_argument("--grid-thresholds", dest="grid_thresholds", help="Progi ΔH 'low,high'")
    p.add_argument("--method", choices=METHODS, help="Metoda porównania bloków")
    p.add_argument("--threshold", type=float, help="Próg metody (domyślnie z tabeli)")
    p.add_argument("--xor-shift", dest="xor_shift", type=int, help="q dla XOR (0-7)")
    p.add_argument("--dct-k", dest="dct_k", type=int, help="Liczba współczynników DCT K")
    p.add_argument("--max-frames", dest="max_frames", type=int, help="Budżet klatek budowy SRBI")
    p.add_argument("--no-backfill", dest="backfill", action="store_const", const=False,
                   help="Nie uzupełniaj nieustalonych komórek")


def _add_detection(p: argparse.ArgumentParser) -> None:
    p.add_argument("--subtract-shift", dest="subtract_shift", type=int, help="q przy odejmowaniu XOR")
    p.add_argument("--median-window", dest="median_window", type=int, help="Okno mediany maski (nieparzyste)")
    p.add_argument("--min-area", dest="min_area", type=int, help="Minimalne pole obiektu w pikselach")
    p.add_argument("--no-validate", dest="validate_objects", action="store_const", const=False,
                   help="Pomiń walidację (wszystkie obiekty = pojazd, wynik 1.0)")
    p.add_argument("--validator", choices=VALIDATOR_CHOICES, help="Klasyfikator obiektów")
    p.add_argument("--aspect-min", dest="aspect_min", type=float)
    p.add_argument("--aspect-max", dest="aspect_max", type=float)
    p.add_argument("--fill-min", dest="fill_min", type=float)
    p.add_argument("--area-min-frac", dest="area_min_frac", type=float)
    p.add_argument("--area-max-frac", dest="area_max_frac", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detekcja",
        description="Detekcja pojazdów: blokowy model tła (SRBI), maska pierwszego planu, walidacja obiektów.",
        epilog=defaults_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
        argument_default=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = dict(
        epilog=defaults_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
        argument_default=argparse.SUPPRESS,
    )

    p_model = sub.add_parser("model", help="Zbuduj SRBI i zapisz PGM + plik statusu", **common)
    _add_common(p_model)
    _add_input(p_model)
    _add_modeling(p_model)
    p_model.add_argument("--min-coverage", dest="min_coverage", type=float, help="Minimalne pokrycie (kod 0)")
    p_model.add_argument("--out", help="Ścieżka wyjściowa SRBI (.pgm)")

    p_detect = sub.add_parser("detect", help="Maski i obiekty dla każdej klatki", **common)
    _add_common(p_detect)
    _add_input(p_detect)
    _add_modeling(p_detect)
    _add_detection(p_detect)
    p_detect.add_argument("--model", dest="model_path", help="SRBI zapisane przez `model`")
    p_detect.add_argument("--model-frames", dest="model_frames", type=int, help="Zbuduj SRBI z N pierwszych klatek")
    p_detect.add_argument("--rebuild-every", dest="rebuild_every", type=int, help="Okres przebudowy SRBI (klatki)")
    p_detect.add_argument("--out-dir", dest="out_dir", help="Katalog na maski")
    p_detect.add_argument("--objects-csv", dest="objects_csv", help="Plik CSV z obiektami")
    p_detect.add_argument("--write-objects-frames", dest="write_object_frames", action="store_const", const=True,
                          help="Zapisz też klatki z nałożoną maską")

    p_bench = sub.add_parser("bench", help="Porównanie czterech metod na scenie syntetycznej", **common)
    _add_common(p_bench)
    p_bench.add_argument("--prefilter", choices=PREFILTER_CHOICES, help="Filtr wstępny klatek")
    _add_modeling(p_bench)
    _add_detection(p_bench)
    p_bench.add_argument("--scene", help="Plik sceny key=value (albo S1 / S2)")
    p_bench.add_argument("--count-partial", dest="ignore_partial", action="store_const", const=False,
                         help="Obiekty widoczne w < 50%% liczone jako zwykłe ramki prawdy")
    p_bench.add_argument("--out", help="Raport CSV")

    p_entropy = sub.add_parser("entropy", help="Entropia całych klatek, ΔH i dobrana siatka", **common)
    _add_common(p_entropy)
    _add_input(p_entropy)
    p_entropy.add_argument("--grid-thresholds", dest="grid_thresholds", help="Progi ΔH 'low,high'")
    p_entropy.add_argument("frames", nargs="*", help="Pliki klatek (zamiast --input)")

    return parser


def load_config(given: Dict[str, object]) -> RunConfig:
    """
    Efektywna konfiguracja: flagi CLI > plik --config > wartości domyślne.

    Raises:
        UsageError: nieczytelny plik konfiguracji.
        ValidationError: wartości poza zakresem lub nieznane klucze.
    """
    values: Dict[str, object] = {}
    config_path = given.pop("config", None)
    if config_path:
        try:
            entries = read_key_value_file(config_path)
        except (OSError, ValueError) as e:
            raise UsageError(f"Plik konfiguracji {config_path}: {e}")
        for _, key, value in entries:
            values[CONFIG_ALIASES.get(key, key)] = value
    values.update(given)
    return RunConfig(**values)


def _stderr(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_model(config: RunConfig) -> int:
    return Processor(config, logger).run_model()


def cmd_detect(config: RunConfig) -> int:
    return Processor(config, logger).run_detect()


def cmd_bench(config: RunConfig) -> int:
    return Processor(config, logger).run_bench()


def cmd_entropy(config: RunConfig, paths: Optional[List[str]] = None) -> int:
    return Processor(config, logger).run_entropy(paths)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    given = vars(args)
    command = given.pop("command")
    paths = given.pop("frames", None)

    try:
        config = load_config(given)
    except (UsageError, ValidationError) as e:
        _stderr(f"Błąd konfiguracji: {e}")
        return EXIT_USAGE

    if config.log_file:
        logger.setup_logging(config.log_file)
    logger.set_callback(_stderr, logging.WARNING)
    logger.info(f"[{command}] konfiguracja: {config.model_dump_json()}")

    try:
        if command == "model":
            return cmd_model(config)
        if command == "detect":
            return cmd_detect(config)
        if command == "bench":
            return cmd_bench(config)
        return cmd_entropy(config, paths)
    except (UsageError, ValidationError) as e:
        logger.error(f"Błąd użycia: {e}")
        return EXIT_USAGE
    except (DetectionError, OSError) as e:
        logger.error(f"Błąd: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
