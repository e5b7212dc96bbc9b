import json
import logging
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime, timezone
from pathlib import Path

CONSOLE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Fields callers may pass through `extra=` that end up in the JSONL records.
STRUCTURED_FIELDS = ("run_id", "stage", "variant", "dataset", "command")


class JsonLinesHandler(logging.Handler):
    """Appends one JSON object per log record to a .jsonl file."""

    def __init__(self, path: str | Path, level: int = logging.NOTSET):
        super().__init__(level)
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def emit(self, record: logging.LogRecord) -> None:
        try:
            entry = {
                "ts": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
                "level": record.levelname,
                "logger": record.name,
                "message": record.getMessage(),
            }
            for field in STRUCTURED_FIELDS:
                value = getattr(record, field, None)
                if value is not None:
                    entry[field] = value
            # handle() already holds self.lock around emit()
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, ensure_ascii=False) + "\n")
        except Exception:
            self.handleError(record)


# The run a worker thread is currently fitting; set by run_log.
_active_run: ContextVar[str | None] = ContextVar("active_run", default=None)


class _RunFilter(logging.Filter):
    def __init__(self, run_id: str):
        super().__init__()
        self.run_id = run_id

    def filter(self, record: logging.LogRecord) -> bool:
        run_id = getattr(record, "run_id", None) or _active_run.get()
        if run_id != self.run_id:
            return False
        record.run_id = run_id
        return True


def configure_logging(level: str | int = "INFO", jsonl_path: str | Path | None = None) -> None:
    """Console logging in the house format plus an optional JSONL mirror. Called once by the CLI."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, JsonLinesHandler):
            root.removeHandler(handler)
    logging.basicConfig(level=level, format=CONSOLE_FORMAT, force=True)
    if jsonl_path is not None:
        root.addHandler(JsonLinesHandler(jsonl_path))


@contextmanager
def run_log(run_id: str, path: str | Path) -> Iterator[None]:
    """Mirrors records tagged with this run_id into the run's own JSONL file."""
    handler = JsonLinesHandler(path)
    handler.addFilter(_RunFilter(run_id))
    root = logging.getLogger()
    root.addHandler(handler)
    token = _active_run.set(run_id)
    try:
        yield
    finally:
        _active_run.reset(token)
        root.removeHandler(handler)
