import os
from typing import List, Tuple


def validate_path(path):
    """Walidacja katalogu zapisu (tworzy go, jeśli nie istnieje)"""
    if not path or not str(path).strip():
        return False, "Ścieżka nie może być pusta"

    path = str(path).strip()
    if not os.path.exists(path):
        try:
            os.makedirs(path, exist_ok=True)
        except Exception as e:
            return False, f"Nie można utworzyć katalogu: {e}"

    if not os.path.isdir(path):
        return False, "Ścieżka nie jest katalogiem"

    if not os.access(path, os.W_OK):
        return False, "Brak uprawnień do zapisu w tym katalogu"

    return True, "OK"


def read_key_value_file(filepath: str) -> List[Tuple[int, str, str]]:
    """
    Wczytuje plik `klucz=wartość` (jedna para na linię, `#` = komentarz).

    Klucze mogą się powtarzać (np. wiele linii `mover=`), więc zwracamy listę
    krotek (numer_linii, klucz, wartość) w kolejności z pliku.

    Raises:
        FileNotFoundError: plik nie istnieje.
        ValueError: linia bez znaku `=` lub z pustym kluczem.
    """
    entries = []
    with open(filepath, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            # Ignoruj puste linie i komentarze
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{filepath}:{lineno}: oczekiwano 'klucz=wartość', jest '{line}'")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if not key:
                raise ValueError(f"{filepath}:{lineno}: pusty klucz")
            entries.append((lineno, key, value.strip()))
    return entries


def sequence_filename(pattern: str, index: int) -> str:
    """Nazwa pliku klatki wg wzorca printf (np. `%06d.pgm`)."""
    return pattern % index


def format_seconds(seconds: float) -> str:
    """Czas w sekundach z dokładnością do milisekund (logi wydajności)."""
    return f"{seconds:.3f} s"
