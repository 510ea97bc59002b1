import argparse

import numpy as np

from mqpsh.api.args import add_function_arguments, build_function, format_complex, parse_point
from mqpsh.core.errors import AssertionFailed
from mqpsh.models.matrix import HermitianMatrix
from mqpsh.models.stencil import Stencil
from mqpsh.services.hermitian_service import hermitian_service
from mqpsh.services.hessian_service import hessian_service


def hessian(args: argparse.Namespace) -> int:
    fn = build_function(args)
    z = parse_point(args.at, args.dim)
    stencil = Stencil.uniform(args.step, 2 * args.dim) if args.step is not None else None
    H = hessian_service.complex_hessian(fn, z, stencil)

    print(f"complex Hessian of {fn.name} at {' '.join(format_complex(c) for c in z)}")
    for row in H.entries:
        print("  " + "  ".join(format_complex(v) for v in row))
    print(f"eigenvalues {' '.join(f'{v:.6g}' for v in hermitian_service.eigenvalues(H))}")
    inertia = hermitian_service.inertia(H, args.tol)
    print(f"inertia (negative, zero, positive) = {inertia.as_tuple()}")

    if args.exact:
        if fn.hessian is None:
            print(f"{fn.name} has no closed form")
            return 0
        exact = HermitianMatrix(fn.hessian(z))
        err = float(np.max(np.abs(H.entries - exact.entries)))
        print(f"closed form max error {err:.3e}")
        if err > args.tol:
            raise AssertionFailed(f"finite differences differ from the closed form by {err:.3e}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("hessian", help="finite-difference complex Hessian at a point")
    add_function_arguments(parser)
    parser.add_argument("--dim", type=int, default=1, help="complex dimension n (default: 1)")
    parser.add_argument("--at", "--point", dest="at", required=True, help='point of C^n as "re,im re,im ..."')
    parser.add_argument("--step", type=float, help="stencil step (default: scaled to the point)")
    parser.add_argument("--tol", type=float, default=1e-6, help="zero threshold and closed-form tolerance")
    parser.add_argument("--exact", action="store_true", help="compare with the closed form when the catalog has one")
    parser.set_defaults(handler=hessian)
