"""
Arguments shared by the subcommands: where a field comes from (a CSV with
its grid sidecar, or a catalog function sampled on a cube grid) and how to
print results.
"""

import argparse
import json
from pathlib import Path
from typing import Optional

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import ConfigError
from mqpsh.models.grid import BoxGrid, ScalarField
from mqpsh.services.catalog_service import CatalogFunction, catalog_service
from mqpsh.services.field_service import field_service
from mqpsh.utils.storage import read_field_csv


def add_grid_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("grid (cube around the origin)")
    group.add_argument("--dim", type=int, default=1, help="complex dimension n (default: 1)")
    group.add_argument("--half-width", type=float, default=1.0, help="half side of the box (default: 1)")
    group.add_argument("--count", type=int, default=21, help="nodes per real axis (default: 21)")


def add_function_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--function", required=True, help="catalog function name (see `mqpsh catalog`)")
    parser.add_argument("--params", default="{}", help='catalog parameters as JSON, e.g. \'{"k": 2}\'')


def add_field_arguments(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", type=Path, help="field CSV with a .grid.json sidecar")
    source.add_argument("--function", help="catalog function name, sampled on the grid below")
    parser.add_argument("--params", default="{}", help='catalog parameters as JSON, e.g. \'{"k": 2}\'')
    add_grid_arguments(parser)


def grid_from_args(args: argparse.Namespace) -> BoxGrid:
    return BoxGrid.cube(args.dim, args.half_width, args.count)


def build_function(args: argparse.Namespace) -> CatalogFunction:
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}", location="--params") from exc
    if not isinstance(params, dict):
        raise ConfigError("expected a JSON object", location="--params")
    return catalog_service.build(args.function, params)


def load_field(args: argparse.Namespace) -> tuple[ScalarField, Optional[CatalogFunction]]:
    if args.input is not None:
        return read_field_csv(args.input), None
    fn = build_function(args)
    return field_service.sample(fn, grid_from_args(args)), fn


def parse_point(text: str, n: int) -> np.ndarray:
    """A point of C^n as "re,im re,im ..."."""
    try:
        rows = settings.matrix_literal(text)
    except ValueError as exc:
        raise ConfigError(f"bad point literal: {exc}", location="--at") from exc
    if len(rows) != 1 or len(rows[0]) != n:
        raise ConfigError(f"expected {n} complex coordinates", location="--at")
    return np.array(rows[0], dtype=complex)


def format_complex(value: complex) -> str:
    return f"{value.real:+.6g}{value.imag:+.6g}i"
