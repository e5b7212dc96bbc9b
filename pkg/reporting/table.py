"""
ReportTable: the flat, fixed-schema table every report is computed from.
Its CSV form writes floats with repr() so reading it back is lossless.
"""

import csv
import io
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from lib.atomic_io import write_text_atomic
from lib.errors import ReportError

REPORT_COLUMNS = (
    "run_id", "train_dataset", "eval_dataset", "translator", "subword_model", "vocab_size",
    "train_limit", "metric", "beam", "score", "tokens_per_sentence",
)
NUMERIC_COLUMNS = ("vocab_size", "train_limit", "beam", "score", "tokens_per_sentence")


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    run_id: str
    train_dataset: str
    eval_dataset: str
    translator: str
    subword_model: str
    vocab_size: int | None = None
    train_limit: int | None = None
    metric: str
    beam: int
    score: float
    tokens_per_sentence: float | None = None

    @property
    def key(self) -> tuple[str, str, str, int]:
        return (self.run_id, self.eval_dataset, self.metric, self.beam)

    def value(self, column: str) -> object:
        if column not in REPORT_COLUMNS:
            raise ReportError(f"unknown dimension '{column}'; known: {', '.join(REPORT_COLUMNS)}")
        return getattr(self, column)

    def csv_cells(self) -> dict[str, str]:
        cells = {}
        for column in REPORT_COLUMNS:
            value = getattr(self, column)
            cells[column] = "" if value is None else repr(value) if isinstance(value, float) else str(value)
        return cells


class ReportTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: tuple[ReportRow, ...] = ()
    warnings: tuple[str, ...] = Field(default=(), description="Inputs skipped while collecting.")

    @model_validator(mode="after")
    def _unique_keys(self) -> "ReportTable":
        seen: set[tuple] = set()
        duplicates = []
        for row in self.rows:
            if row.key in seen:
                duplicates.append("/".join(map(str, row.key)))
            seen.add(row.key)
        if duplicates:
            raise ValueError(f"duplicate (run_id, eval_dataset, metric, beam) keys: {duplicates}")
        return self

    @classmethod
    def from_rows(cls, rows: list[ReportRow], warnings: list[str] | None = None) -> "ReportTable":
        try:
            return cls(rows=tuple(sorted(rows, key=lambda r: r.key)), warnings=tuple(warnings or ()))
        except ValidationError as e:
            raise ReportError(str(e.errors()[0]["msg"])) from e

    def __len__(self) -> int:
        return len(self.rows)

    def where(self, **equals: object) -> "ReportTable":
        """Rows whose columns equal the given values; None values are ignored."""
        wanted = {k: v for k, v in equals.items() if v is not None}
        return ReportTable(rows=tuple(r for r in self.rows if all(r.value(k) == v for k, v in wanted.items())))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row.csv_cells())
        return buffer.getvalue()

    def save(self, path: str | Path) -> Path:
        return write_text_atomic(path, self.to_csv())

    @classmethod
    def load(cls, path: str | Path) -> "ReportTable":
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or tuple(reader.fieldnames) != REPORT_COLUMNS:
                raise ReportError(f"{path}: header does not match the report columns")
            rows = []
            for cells in reader:
                data = {k: (None if k in NUMERIC_COLUMNS and v == "" else v) for k, v in cells.items()}
                try:
                    rows.append(ReportRow.model_validate(data))
                except ValidationError as e:
                    raise ReportError(f"{path}: bad row {cells}: {e}") from e
        return cls.from_rows(rows)
