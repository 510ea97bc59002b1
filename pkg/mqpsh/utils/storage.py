"""
Field, mask and report files.

CSV dialect: comma separated, "." decimal point, "-inf" for NEG_INF, LF
line endings. A field CSV has the header
`index_0..index_{2n-1},coord_0..coord_{2n-1},value` (per-axis node index,
real coordinates ordered x1..xn, y1..yn) and a `<name>.grid.json` sidecar
describing its grid. A mask CSV is `index,member` with flat C-order node
indices.
"""

import csv
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from mqpsh.core.errors import ConfigError
from mqpsh.models.grid import BoxGrid, ScalarField
from mqpsh.models.gridset import GridSet
from mqpsh.schemas.grid import FieldSidecar, GridSpec

PathLike = Union[str, Path]


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".grid.json")


def _number(value: float) -> str:
    return repr(float(value))


def field_header(grid: BoxGrid) -> list[str]:
    d = grid.real_dim
    return [f"index_{k}" for k in range(d)] + [f"coord_{k}" for k in range(d)] + ["value"]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_field_csv(field: ScalarField, path: PathLike) -> Path:
    """One row per node in C order: per-axis node indices, real coordinates, value. Plus the grid sidecar."""
    path = _prepare(path)
    grid = field.grid
    pts = grid.points()
    multi = grid.unravel(np.arange(grid.size))
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(field_header(grid))
        for i in range(grid.size):
            writer.writerow([*(int(k) for k in multi[i]), *(_number(c) for c in pts[i]), _number(field.values[i])])

    sidecar = FieldSidecar(
        grid=GridSpec.from_grid(grid),
        upper_bound=field.upper_bound,
        approximate=field.approximate,
    )
    sidecar_path(path).write_text(sidecar.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_sidecar(path: PathLike) -> FieldSidecar:
    side = sidecar_path(path)
    if not side.exists():
        raise ConfigError(f"missing grid sidecar {side}", location=str(path))
    try:
        return FieldSidecar.model_validate_json(side.read_text(encoding="utf-8"))
    except ValidationError as exc:
        raise ConfigError(str(exc), location=str(side)) from exc


def _rows(path: Path) -> list[list[str]]:
    if not path.exists():
        raise ConfigError(f"file not found: {path}", location=str(path))
    with path.open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ConfigError("empty CSV", location=str(path))
    return rows


def read_field_csv(path: PathLike, grid: Optional[BoxGrid] = None) -> ScalarField:
    """
    Read a field CSV; the grid comes from the sidecar unless given. Rows may
    come in any order but must name every node once, with coordinates that
    match the grid.
    """
    path = Path(path)
    sidecar = None if grid is not None else read_sidecar(path)
    grid = sidecar.grid.to_grid() if sidecar is not None else grid
    rows = _rows(path)
    header, body = rows[0], rows[1:]
    expected = field_header(grid)
    if header != expected:
        raise ConfigError(f"header must be {','.join(expected)}", location=f"{path}:1")
    if len(body) != grid.size:
        raise ConfigError(f"{len(body)} rows for a grid of {grid.size} nodes", location=str(path))

    d = grid.real_dim
    counts = np.asarray(grid.counts)
    values = np.empty(grid.size)
    seen = np.zeros(grid.size, dtype=bool)
    for line, row in enumerate(body, start=2):
        try:
            if len(row) != 2 * d + 1:
                raise ValueError(f"expected {2 * d + 1} columns, got {len(row)}")
            multi = np.array([int(c) for c in row[:d]])
            coords = np.array([float(c) for c in row[d:2 * d]])
            value = float(row[-1])
            if np.isnan(value) or value == np.inf:
                raise ValueError(f"value must be finite or -inf, got {row[-1]}")
        except ValueError as exc:
            raise ConfigError(f"bad row {row!r}: {exc}", location=f"{path}:{line}") from exc
        if np.any(multi < 0) or np.any(multi >= counts):
            raise ConfigError(f"node {multi.tolist()} outside the grid", location=f"{path}:{line}")
        index = int(grid.ravel(multi))
        if seen[index]:
            raise ConfigError(f"node {multi.tolist()} listed twice", location=f"{path}:{line}")
        if not np.all(np.abs(coords - grid.coords(index)) <= 1e-9 * grid.spacing):
            raise ConfigError(f"coordinates {coords.tolist()} do not match node {multi.tolist()}", location=f"{path}:{line}")
        seen[index] = True
        values[index] = value

    upper = sidecar.upper_bound if sidecar is not None else None
    approximate = sidecar.approximate if sidecar is not None else False
    return ScalarField(grid, values, upper_bound=upper, approximate=approximate)


def write_mask_csv(X: GridSet, path: PathLike) -> Path:
    path = _prepare(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "member"])
        for i, member in enumerate(X.mask):
            writer.writerow([i, int(member)])
    sidecar = FieldSidecar(grid=GridSpec.from_grid(X.grid))
    sidecar_path(path).write_text(sidecar.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_mask_csv(path: PathLike, grid: Optional[BoxGrid] = None) -> GridSet:
    """Node indices with 0/1 membership; nodes not listed are outside X."""
    path = Path(path)
    grid = read_sidecar(path).grid.to_grid() if grid is None else grid
    rows = _rows(path)
    mask = np.zeros(grid.size, dtype=bool)
    for line, row in enumerate(rows[1:], start=2):
        try:
            index, member = int(row[0]), int(row[1])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad row {row!r}: {exc}", location=f"{path}:{line}") from exc
        if not 0 <= index < grid.size or member not in (0, 1):
            raise ConfigError(f"bad entry index={index} member={member}", location=f"{path}:{line}")
        mask[index] = bool(member)
    return GridSet(grid, mask)


def write_report(report: BaseModel, path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
