"""
Hierarchia wyjątków detektora.

Wszystkie dziedziczą po ValueError, więc kod łapiący ValueError (jak w reszcie
projektu) nadal działa; CLI rozróżnia je po typie przy mapowaniu na kody wyjścia.
"""


class DetectionError(ValueError):
    """Bazowy błąd potoku detekcji."""


# --- Wejście / wyjście obrazów ---

class FrameLoadError(DetectionError):
    """Nie można wczytać klatki; `defect` nazywa przyczynę."""

    defect = "load"

    def __init__(self, path, detail):
        self.path = str(path)
        self.detail = detail
        super().__init__(f"{self.path}: {self.defect}: {detail}")


class MalformedHeaderError(FrameLoadError):
    defect = "malformed-header"


class UnsupportedMaxvalError(FrameLoadError):
    defect = "unsupported-maxval"


class TruncatedPayloadError(FrameLoadError):
    defect = "truncated-payload"


class FrameTooSmallError(FrameLoadError):
    defect = "frame-too-small"


class MaskValueError(FrameLoadError):
    defect = "mask-values"


class FrameWriteError(DetectionError):
    """Błąd zapisu pliku wyjściowego."""


# --- Sekwencje ---

class SequenceTooShortError(DetectionError):
    def __init__(self, count, required=2):
        self.count = count
        super().__init__(f"sequence-too-short: {count} klatek, wymagane co najmniej {required}")


class InconsistentSequenceError(DetectionError):
    def __init__(self, index, expected, found):
        self.index = index
        super().__init__(
            f"inconsistent-sequence(index {index}): wymiary {found[0]}x{found[1]}, "
            f"oczekiwano {expected[0]}x{expected[1]}"
        )


# --- Obliczenia ---

class EmptyRegionError(DetectionError):
    pass


class ShapeError(DetectionError):
    pass


class ParameterError(DetectionError):
    pass


class CellIndexError(DetectionError, IndexError):
    pass


class ModelIncompleteError(DetectionError):
    pass


class ModelFileError(DetectionError):
    pass


# --- Pliki konfiguracyjne i sceny (błąd użycia, kod wyjścia 2) ---

class UsageError(DetectionError):
    """Brakujące lub sprzeczne opcje wywołania."""


class ConfigFormatError(UsageError):
    pass
