"""Command-line front end.

    fockmarket run SCENARIO --out DIR [--svg] [--method M] [--order N]
    fockmarket verify SCENARIO
    fockmarket kms --phi F --ql Q [--beta B | --nc X | --na A --nc C]
    fockmarket price --of O --pr P

Exit status: 0 success, 2 invalid input, 3 conservation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dynamics, kms
from .errors import ConfigError, FockMarketError, SectorOverflowError
from .scenario import load_scenario, simulate, verify, write_csv
from .svg import write_plot

EXIT_OK, EXIT_INVALID, EXIT_CONSERVATION = 0, 2, 3


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    result = simulate(sc, method=args.method, order=args.order)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / f"{sc.name}.csv", result, sc.outputs)
    if args.svg:
        write_plot(out / f"{sc.name}.svg", result.series.times,
                   {c: result.series.channels[c] for c in sc.outputs}, sc.name, result.axis)
    (out / f"{sc.name}.conservation.txt").write_text(result.report.format())
    for note in result.notes:
        print(note)
    print(f"wrote {out / (sc.name + '.csv')}")
    if not result.report.passed:
        print("conservation check FAILED", file=sys.stderr)
        return EXIT_CONSERVATION
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify(load_scenario(args.scenario))
    sys.stdout.write(report.format())
    return EXIT_OK if report.passed else EXIT_CONSERVATION


def _cmd_kms(args) -> int:
    if args.beta is not None:
        prob = kms.KmsProblem(args.phi, args.ql, "solve_pair", beta=args.beta)
    elif args.na is not None and args.nc is not None:
        prob = kms.KmsProblem(args.phi, args.ql, "classify", n_a=args.na, n_c=args.nc)
    elif args.nc is not None:
        prob = kms.KmsProblem(args.phi, args.ql, "solve_beta_given_nc", n_c=args.nc)
    else:
        raise ConfigError("kms needs --beta, --nc, or both --na and --nc")
    sol = kms.solve_equilibrium(prob)
    print(f"case={sol.case_label} outcome={sol.outcome}")
    for name in ("beta0", "nc0", "na0"):
        v = getattr(sol, name)
        print(f"{name}={'none' if v is None else format(v, '.12g')}")
    return EXIT_OK


def _cmd_price(args) -> int:
    print(dynamics.effective_price(args.of, args.pr))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockmarket", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write CSV/SVG/report")
    run.add_argument("scenario")
    run.add_argument("--out", required=True)
    run.add_argument("--svg", action="store_true")
    run.add_argument("--method", choices=["exact", "onebody", "series", "closed"])
    run.add_argument("--order", type=int)
    run.set_defaults(func=_cmd_run)

    ver = sub.add_parser("verify", help="exact evolution and drift of conserved quantities")
    ver.add_argument("scenario")
    ver.set_defaults(func=_cmd_verify)

    k = sub.add_parser("kms", help="solve the KMS equilibrium condition")
    k.add_argument("--phi", type=float, required=True)
    k.add_argument("--ql", type=float, required=True)
    k.add_argument("--beta", type=float)
    k.add_argument("--nc", type=float)
    k.add_argument("--na", type=float)
    k.set_defaults(func=_cmd_kms)

    pr = sub.add_parser("price", help="effective integer price from supply and price quanta")
    pr.add_argument("--of", type=float, required=True)
    pr.add_argument("--pr", type=float, required=True)
    pr.set_defaults(func=_cmd_price)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SectorOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, FockMarketError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
