import logging
import threading

from src.utils.config import LOG_FILE

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


class Logger:
    """Cienka nakładka na logging: plik logu + opcjonalny callback (np. stderr w CLI)."""

    def __init__(self, log_file=LOG_FILE, log_callback=None, callback_level=logging.INFO):
        self.log_callback = log_callback
        self.callback_level = callback_level
        self._lock = threading.Lock()
        self._logger = logging.getLogger("detekcja")
        self._logger.setLevel(logging.DEBUG)
        self._logger.propagate = False
        self._handler = None
        self.log_file = None
        self.setup_logging(log_file)

    def setup_logging(self, log_file):
        """Przepina handler plikowy na nową ścieżkę (plik tworzony leniwie, przy pierwszym wpisie)."""
        with self._lock:
            if self._handler is not None:
                self._logger.removeHandler(self._handler)
                self._handler.close()
            self._handler = logging.FileHandler(log_file, encoding="utf-8", delay=True)
            self._handler.setFormatter(logging.Formatter(LOG_FORMAT))
            self._logger.addHandler(self._handler)
            self.log_file = log_file

    def log(self, message, level=logging.INFO):
        self._logger.log(level, message)

        if self.log_callback and level >= self.callback_level:
            self.log_callback(message)

    def debug(self, message): self.log(message, logging.DEBUG)
    def info(self, message): self.log(message, logging.INFO)
    def warning(self, message): self.log(message, logging.WARNING)
    def error(self, message): self.log(message, logging.ERROR)
    def critical(self, message): self.log(message, logging.CRITICAL)

    def set_callback(self, callback, level=logging.INFO):
        self.log_callback = callback
        self.callback_level = level


def setup_logger():
    return Logger()


# Global logger instance
logger = setup_logger()
