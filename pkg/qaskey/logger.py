"""
qaskey logger.py
Uses python logging to write to stderr. Optional file logging.
"""

import sys
import logging


class StderrLogHandler(logging.Handler):
    """Logging handler that writes warnings (or everything, when verbose) to stderr."""

    def __init__(self, verbose=False):
        super().__init__()
        self.verbose = verbose

    def emit(self, record):
        try:
            msg = self.format(record)
            if record.levelno >= logging.WARNING:
                print(f"[QASKEY ERROR]: {msg}", file=sys.stderr)
            elif self.verbose:
                print(msg, file=sys.stderr)
        except (AttributeError, TypeError, ValueError) as e:
            print(f"[QASKEY LOGGER ERROR] {e}", file=sys.stderr)


class Logger:
    """Writes to stderr, optionally to a log file."""

    def __init__(self, name, level='INFO', logfile_path=None, verbose=False):
        self.logger = logging.getLogger(name)
        try:
            self.logger.setLevel(str(level).upper())
        except (ValueError, TypeError):
            self.logger.setLevel("INFO")
        self.logger.propagate = False
        for handler in self.logger.handlers[:]:
            handler.close()
            self.logger.removeHandler(handler)

        formatter = logging.Formatter('[%(levelname)s] %(message)s')

        stderr_handler = StderrLogHandler(verbose=verbose)                                 # Log to stderr
        stderr_handler.setFormatter(formatter)
        self.logger.addHandler(stderr_handler)

        self.file_handler = None
        if logfile_path:                                                                     # Log to file
            try:
                self.file_handler = logging.FileHandler(logfile_path, mode='a', encoding='utf-8')
                self.file_handler.setFormatter(formatter)
                self.logger.addHandler(self.file_handler)
            except OSError as e:
                print(f"[QASKEY LOGGER ERROR] Failed to open log file: {e}", file=sys.stderr)

    def is_enabled(self, level='INFO'):
        """Return True if a level would currently be logged."""
        return self.logger.isEnabledFor(
            getattr(logging, str(level).upper(), logging.INFO)
        )

    def log(self, msg, level='INFO'):
        """Log a message at a given level."""
        self.logger.log(getattr(logging, str(level).upper(), logging.INFO), msg)

    def close(self):
        """Close all handlers."""
        for handler in self.logger.handlers[:]:
            handler.close()
            self.logger.removeHandler(handler)
        self.file_handler = None
