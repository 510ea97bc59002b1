import argparse
from pathlib import Path

import numpy as np

from mqpsh.api.args import add_grid_arguments, grid_from_args
from mqpsh.core.errors import AssertionFailed
from mqpsh.models.gridset import GridSet
from mqpsh.services.setgeom_service import IDENTITY_TOL, setgeom_service
from mqpsh.utils.storage import read_mask_csv, write_field_csv


def distxform(args: argparse.Namespace) -> int:
    if args.input is not None:
        X = read_mask_csv(args.input)
    else:
        grid = grid_from_args(args)
        X = GridSet.ball(grid, np.zeros(grid.real_dim), args.ball)

    dist = setgeom_service.distance_transform(X)
    path = write_field_csv(dist, args.output)
    print(f"|X| = {X.count} of {X.grid.size} nodes, max distance {dist.max_value:.6g}")
    print(f"wrote {path}")

    if args.check:
        brute = setgeom_service.brute_force_distance(X)
        err = float(np.max(np.abs(dist.values - brute.values)))
        print(f"bruteforce max error {err:.3e}")
        if err > IDENTITY_TOL:
            raise AssertionFailed(f"distance transform differs from brute force by {err:.3e}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("distxform", help="Euclidean distance to a closed grid set")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", "--mask", dest="input", type=Path, help="mask CSV with a .grid.json sidecar")
    source.add_argument("--ball", type=float, help="closed ball of this radius around the origin")
    add_grid_arguments(parser)
    parser.add_argument("--output", type=Path, required=True, help="distance CSV")
    parser.add_argument("--check", action="store_true", help="compare against the brute-force distance")
    parser.set_defaults(handler=distxform)
