"""CSV files with a commented header block and unit-tagged column names.

Layout::

    # stirap-lab 0.1.0
    # command: starkmap
    # b_rot_ghz = 1.1139
    field [kV/cm],shift_N0_m0 [MHz]
    0,0
    0.2,-0.48592

Columns are read back into SI-style package units (V/m, Hz, s); see
:data:`UNIT_SCALE`.
"""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .fitting.core import ScanData

# factor to package units, and the quantity kind
UNIT_SCALE = {
    "Hz": (1.0, "frequency"),
    "kHz": (1e3, "frequency"),
    "MHz": (1e6, "frequency"),
    "GHz": (1e9, "frequency"),
    "V/m": (1.0, "field"),
    "V/cm": (1e2, "field"),
    "kV/cm": (1e5, "field"),
    "s": (1.0, "time"),
    "ms": (1e-3, "time"),
    "us": (1e-6, "time"),
    "ns": (1e-9, "time"),
    "1": (1.0, "dimensionless"),
    "counts": (1.0, "dimensionless"),
    "D": (1.0, "dipole"),
    "ea0": (1.0, "dipole"),
}

_AXIS_FOR_KIND = {"frequency": "detuning", "field": "field", "time": "time"}
_COLUMN = re.compile(r"^\s*(?P<name>[^\[]+?)\s*(\[(?P<unit>[^\]]*)\])?\s*$")


def fmt(value) -> str:
    """Stable text form of a number for CSV output."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if v == 0:
        return "0"
    return format(v, ".10g")


def split_column(header: str) -> tuple[str, str]:
    m = _COLUMN.match(header)
    if not m:
        raise DomainError(f"cannot parse column header {header!r}")
    return m.group("name"), (m.group("unit") or "1").strip()


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    header: Mapping[str, object] | None = None,
    comments: Sequence[str] = (),
) -> Path:
    """Write a CSV with ``# key = value`` header lines followed by the data table."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    for key in sorted(header or {}):
        buf.write(f"# {key} = {header[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray, dict[str, str]]:
    """Return (column headers, data array, header key/value pairs)."""
    meta = {}
    lines = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if " = " in body:
                k, v = body.split(" = ", 1)
                meta[k.strip()] = v.strip()
            continue
        if raw.strip():
            lines.append(raw)
    if not lines:
        raise DomainError(f"{path}: no data table")
    reader = csv.reader(lines)
    columns = next(reader)
    try:
        data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise DomainError(f"{path}: ragged table")
    return columns, data, meta


def column_in_units(columns: Sequence[str], data: np.ndarray, index: int) -> tuple[np.ndarray, str]:
    """Column ``index`` converted to package units, plus its quantity kind."""
    _, unit = split_column(columns[index])
    if unit not in UNIT_SCALE:
        raise DomainError(f"unknown unit {unit!r} in column {columns[index]!r}")
    scale, kind = UNIT_SCALE[unit]
    return data[:, index] * scale, kind


def find_column(columns: Sequence[str], name: str) -> int:
    for k, col in enumerate(columns):
        if split_column(col)[0] == name:
            return k
    raise DomainError(f"no column named {name!r}; available: {[split_column(c)[0] for c in columns]}")


def read_scan(path: str | Path, y_column: str | None = None) -> ScanData:
    """Load a scan: first column is ``x``, ``y_column`` (default: second) is ``y``.

    A column whose name starts with ``sigma`` is used as the ``y`` uncertainty.
    """
    columns, data, _ = read_csv(path)
    if len(columns) < 2:
        raise DomainError(f"{path}: need at least two columns")
    x, kind = column_in_units(columns, data, 0)
    iy = find_column(columns, y_column) if y_column else 1
    y, _ = column_in_units(columns, data, iy)
    sigma = None
    for k, col in enumerate(columns):
        if split_column(col)[0].startswith("sigma"):
            sigma, _ = column_in_units(columns, data, k)
            break
    axis = _AXIS_FOR_KIND.get(kind)
    if axis is None:
        raise DomainError(f"first column {columns[0]!r} is not a field, time or frequency axis")
    return ScanData(x, y, sigma, axis)
