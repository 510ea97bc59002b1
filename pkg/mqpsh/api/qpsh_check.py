import argparse
from pathlib import Path

from mqpsh.api.args import add_field_arguments, load_field
from mqpsh.core.errors import AssertionFailed, ConfigError
from mqpsh.schemas.verdict import QpshVerdict, VerdictSet
from mqpsh.services.classical_service import classical_service
from mqpsh.services.qpsh_service import qpsh_service
from mqpsh.services.scenario_service import load_probe_config
from mqpsh.services.viscosity_service import viscosity_service
from mqpsh.utils.storage import write_report


def qpsh_check(args: argparse.Namespace) -> int:
    u, fn = load_field(args)
    modes = ["smooth", "classical", "viscosity"] if args.mode == "all" else [args.mode]
    if args.mode == "all" and (fn is None or not fn.smooth):
        modes.remove("smooth")
    probes = load_probe_config(args.probes).build(u.grid.dim_complex, args.seed) if args.probes is not None else None

    verdicts: dict[str, QpshVerdict] = {}
    for mode in modes:
        if mode == "smooth":
            if fn is None:
                raise ConfigError("the smooth checker needs a catalog function", location="--mode")
            verdicts[mode] = qpsh_service.smooth_verdict(qpsh_service.smooth_qpsh_index(fn, u.grid), args.q)
        elif mode == "classical":
            verdicts[mode] = classical_service.classical_qpsh_oracle(u, args.q, seed=args.seed)
        else:
            verdicts[mode] = viscosity_service.viscosity_falsifier(
                u, args.q, probes=probes, window=args.window, center_stride=args.stride, seed=args.seed
            )

    for mode, verdict in verdicts.items():
        line = f"{mode:<10} q={args.q}  {verdict.status}  checked {verdict.checked}"
        if verdict.note:
            line += f"  ({verdict.note})"
        print(line)
        if verdict.witness is not None:
            print(f"  witness gap {verdict.witness.gap:.3e}")
            if args.replay:
                print(f"  replayed: {qpsh_service.replay_witness(u, verdict, args.window)}")

    if args.report is not None:
        print(f"wrote {write_report(VerdictSet(q=args.q, verdicts=verdicts), args.report)}")

    failed = [(m, v) for m, v in verdicts.items() if not v.passed]
    if failed:
        mode, verdict = failed[0]
        raise AssertionFailed(f"{mode} checker: u is not {args.q}-psh", witness=verdict.witness)
    return 0


def register(subparsers):
    parser = subparsers.add_parser("qpsh-check", help="q-psh verdicts of a field; exit 2 on any FAIL")
    add_field_arguments(parser)
    parser.add_argument("--q", type=int, required=True, help="level q >= 0")
    parser.add_argument("--mode", "--checker", dest="mode", choices=["smooth", "classical", "viscosity", "all"], default="all")
    parser.add_argument("--probes", type=Path, help="probe family TOML (betas, deltas, random_frames, haar_frames, random_polys)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--window", type=int, default=2, help="falsifier window half-width in nodes")
    parser.add_argument("--stride", type=int, default=1, help="falsifier centre stride")
    parser.add_argument("--replay", action="store_true", help="replay FAIL witnesses")
    parser.add_argument("--report", type=Path, help="write the verdicts as JSON")
    parser.set_defaults(handler=qpsh_check)
