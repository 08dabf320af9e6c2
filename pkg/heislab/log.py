import contextlib
import logging

from logging import INFO, DEBUG

DEBUG1 = DEBUG - 1
FORMAT = "%(relativeCreated)d %(name)-12s %(levelname)-1s %(message)s"


class _HeislabFilter:

    def filter(self, record):
        return record.name.startswith("heislab") or record.name == "py.warnings"


def _stream_handler():
    root = logging.getLogger()
    if not root.handlers:
        init_logging()
    return root.handlers[0]


def init_logging():
    # Get rid of any pre-existing stuff
    root = logging.getLogger()
    while len(root.handlers) > 0:
        root.removeHandler(root.handlers[-1])
    logging.addLevelName(DEBUG1, "DEBUG1")
    sh = logging.StreamHandler()
    sh.setFormatter(logging.Formatter(FORMAT))
    sh.setLevel(INFO)
    sh.addFilter(_HeislabFilter())
    root.addHandler(sh)
    root.setLevel(logging.NOTSET)


def setup_logging(verbosity):
    "-v gives DEBUG, -vv the per-sweep DEBUG1 messages."
    sh = _stream_handler()
    sh.setLevel([INFO, DEBUG, DEBUG1][min(verbosity, 2)])
    logging.captureWarnings(True)


def add_debug_log(debug_log):
    fh = logging.FileHandler(debug_log, "wt")
    fh.setLevel(DEBUG)
    fh.setFormatter(_stream_handler().formatter)
    logging.getLogger().addHandler(fh)
    return fh


class WarningCollector(logging.Handler):
    "Keeps the text of every heislab warning, once, in the order seen."

    def __init__(self):
        super().__init__(logging.WARNING)
        self.addFilter(_HeislabFilter())
        self.messages = []

    def emit(self, record):
        msg = record.getMessage()
        if msg not in self.messages:
            self.messages.append(msg)


@contextlib.contextmanager
def collect_warnings():
    root = logging.getLogger()
    wc = WarningCollector()
    root.addHandler(wc)
    try:
        yield wc.messages
    finally:
        root.removeHandler(wc)
