import argparse
from pathlib import Path

import numpy as np

from mqpsh.api.args import add_field_arguments, load_field
from mqpsh.core.errors import AssertionFailed, ConfigError
from mqpsh.models.grid import NEG_INF
from mqpsh.models.gridset import GridSet
from mqpsh.schemas.scenario import KernelSpec
from mqpsh.services.envelope_service import envelope_service
from mqpsh.services.scenario_service import PROFILES, SUPCONV_TOL, build_kernel
from mqpsh.utils.storage import write_field_csv, write_mask_csv


def supconv(args: argparse.Namespace) -> int:
    u, _ = load_field(args)
    if args.theta is not None:
        spec = KernelSpec(kind="quadratic", theta=args.theta, delta=args.delta)
    else:
        spec = KernelSpec(kind="radial", profile=args.profile, delta=args.delta)
    kernel = build_kernel(spec)

    if args.engine == "fast":
        if kernel.kind != "quadratic":
            raise ConfigError("the fast engine needs --theta", location="--engine")
        result = envelope_service.moreau_envelope_fast(u, kernel.theta)
    elif args.engine == "bruteforce":
        result = envelope_service.sup_convolve_bruteforce(u, kernel)
    else:
        result = envelope_service.envelope(u, kernel)

    path = write_field_csv(result.values, args.output)
    print(f"kernel {kernel.describe()}  engine {result.engine}")
    print(f"nodes {u.grid.size}  attained {int(result.attained.sum())}  proper interior {result.proper_interior_count}")
    print(f"wrote {path}")
    if args.mask_output is not None:
        proper = GridSet(result.query_grid, result.proper_interior_mask)
        print(f"wrote {write_mask_csv(proper, args.mask_output)}")

    if args.axioms:
        report = envelope_service.check_envelope_axioms(u, kernel, result)
        for clause in report.clauses:
            print(f"clause {clause.clause} {clause.name:<28} {clause.status:<4} max_error {clause.max_error:.2e}")
        if not report.passed:
            raise AssertionFailed("envelope axioms failed")

    if args.check:
        brute = envelope_service.sup_convolve_bruteforce(u, kernel).values.values
        fast = result.values.values
        with np.errstate(invalid="ignore"):
            err = np.where(np.isfinite(brute) & np.isfinite(fast), np.abs(brute - fast), 0.0)
        max_err = float(err.max(initial=0.0))
        same_inf = bool(np.array_equal(brute == NEG_INF, fast == NEG_INF))
        print(f"bruteforce max error {max_err:.3e}")
        if not same_inf or max_err > SUPCONV_TOL:
            raise AssertionFailed(f"engines disagree: max error {max_err:.3e}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("supconv", help="sup-convolve a field with a kernel")
    add_field_arguments(parser)
    kernel = parser.add_mutually_exclusive_group(required=True)
    kernel.add_argument("--theta", type=float, help="quadratic kernel -theta |v|^2")
    kernel.add_argument("--profile", choices=sorted(PROFILES), help="radial kernel f(|v|)")
    parser.add_argument("--delta", type=float, help="semiconvexity constant of the kernel")
    parser.add_argument("--engine", choices=["auto", "fast", "bruteforce"], default="auto")
    parser.add_argument("--output", type=Path, required=True, help="envelope CSV")
    parser.add_argument("--mask-output", type=Path, help="proper-interior mask CSV (index, member)")
    parser.add_argument("--axioms", action="store_true", help="check the envelope axioms")
    parser.add_argument("--check", action="store_true", help="compare against the brute-force engine")
    parser.set_defaults(handler=supconv)
