"""
Results module - CSV persistence for result tables, array geometries,
channel realizations and eigenvalue spectra.
"""
import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.errors import InvalidArgumentError, SimulationError

logger = logging.getLogger(__name__)

Cell = int | float | str


@dataclass
class ResultTable:
    """Named columns, complete rows and the metadata needed to re-run the table."""

    columns: list[str]
    rows: list[list[Cell]] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add_row(self, **values: Cell) -> None:
        """Append one row; every column must be given, nothing else."""
        missing = [c for c in self.columns if c not in values]
        extra = [k for k in values if k not in self.columns]
        if missing or extra:
            raise InvalidArgumentError(f"row mismatch: missing {missing}, unexpected {extra}")
        self.rows.append([values[c] for c in self.columns])

    def column(self, name: str) -> list[Cell]:
        if name not in self.columns:
            raise KeyError(name)
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def where(self, **match: Cell) -> list[dict[str, Cell]]:
        """Rows whose cells equal every given value, as dicts."""
        out = []
        for row in self.rows:
            record = dict(zip(self.columns, row))
            if all(record[k] == v for k, v in match.items()):
                out.append(record)
        return out


def format_cell(value: Cell) -> str:
    """Locale-independent text: 17 significant digits for floats."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _parse_cell(text: str) -> Cell:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _write(path: str | Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        raise SimulationError(f"cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")


# --- Result tables ---

def render_csv(table: ResultTable) -> str:
    """'# key = value' metadata lines, a header row, then data rows."""
    buf = io.StringIO()
    for key in sorted(table.metadata):
        value = str(table.metadata[key]).replace("\n", " ")
        buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        if len(row) != len(table.columns):
            raise InvalidArgumentError(f"row has {len(row)} cells, expected {len(table.columns)}")
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(table: ResultTable, path: str | Path) -> None:
    _write(path, render_csv(table))


def read_csv(path: str | Path) -> ResultTable:
    """Inverse of write_csv; numeric cells come back as int or float."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise SimulationError(f"cannot read {path}: {e}") from e

    metadata = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            metadata[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if not body:
        raise SimulationError(f"{path} has no header row")

    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return ResultTable(columns=columns, rows=rows, metadata=metadata)


# --- Raw artifacts ---

def write_geometry_csv(positions: np.ndarray, path: str | Path, metadata: dict[str, str] | None = None) -> None:
    """Antenna or scatterer positions, one (x, y) row each."""
    positions = np.asarray(positions, dtype=float)
    table = ResultTable(columns=["index", "x", "y"], metadata=dict(metadata or {}))
    for i, (x, y) in enumerate(positions):
        table.add_row(index=i, x=x, y=y)
    write_csv(table, path)


def write_realization_csv(h: np.ndarray, path: str | Path, metadata: dict[str, str] | None = None) -> None:
    """Complex channel vector as (antenna, real, imag) rows."""
    table = ResultTable(columns=["antenna", "real", "imag"], metadata=dict(metadata or {}))
    for m, value in enumerate(np.asarray(h, dtype=complex)):
        table.add_row(antenna=m, real=value.real, imag=value.imag)
    write_csv(table, path)


def write_spectrum_csv(eigenvalues: np.ndarray, path: str | Path, metadata: dict[str, str] | None = None) -> None:
    """Descending eigenvalues with their value relative to the largest."""
    eigs = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    top = eigs[0] if eigs.size and eigs[0] > 0 else 1.0
    table = ResultTable(columns=["index", "eigenvalue", "relative"], metadata=dict(metadata or {}))
    for i, value in enumerate(eigs):
        table.add_row(index=i, eigenvalue=value, relative=value / top)
    write_csv(table, path)
