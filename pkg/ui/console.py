"""Rich console output for the CLI: batch summary tables, prompts, errors."""
from collections.abc import Sequence

from rich.console import Console
from rich.prompt import Confirm
from rich.table import Table
from rich.text import Text

from reporting.svg import format_number

console = Console()
err_console = Console(stderr=True)

STATUS_STYLES = {
    "new": "bold green",
    "trained": "bold green",
    "ok": "bold green",
    "existing": "cyan",
    "skipped": "cyan",
    "missing": "yellow",
    "prepared": "yellow",
    "failed": "bold red",
    "errored": "bold red",
}


def status_text(status: str) -> Text:
    return Text(status, style=STATUS_STYLES.get(status, "white"))


def confirm(question: str) -> bool:
    return Confirm.ask(question, console=console, default=False)


def print_error(message: str) -> None:
    err_console.print(Text(message, style="bold red"))


def print_line(message: str, style: str | None = None) -> None:
    console.print(Text(message, style=style or ""))


def summary_table(title: str, columns: Sequence[str], rows: Sequence[Sequence[object]], status_column: int | None = None) -> Table:
    """A table whose status column is colored by STATUS_STYLES; floats use the report format."""
    table = Table(title=title, show_lines=False, header_style="bold")
    for column in columns:
        table.add_column(column)
    for row in rows:
        cells: list[Text | str] = []
        for i, value in enumerate(row):
            if i == status_column:
                cells.append(status_text(str(value)))
            elif isinstance(value, float):
                cells.append(format_number(value))
            else:
                cells.append("" if value is None else str(value))
        table.add_row(*cells)
    return table


def print_table(title: str, columns: Sequence[str], rows: Sequence[Sequence[object]], status_column: int | None = None) -> None:
    console.print(summary_table(title, columns, rows, status_column))
