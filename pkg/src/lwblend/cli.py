"""Command line interface: `lwblend solve ...` and `lwblend convergence ...`."""

import argparse
import json
import sys

from .cases import available_cases, convergence_harness
from .driver import LIMITERS
from .limiting import IndicatorConfig
from .runner import run_case


def _add_solve_args(p):
    p.add_argument("--case", required=True, help="case name, see --list-cases")
    p.add_argument("--degree", type=int, default=None,
                   help="polynomial degree (1-4); case default if omitted")
    p.add_argument("--cells", type=str, default=None,
                   help="element count NX or NX,NY")
    p.add_argument("--limiter", choices=LIMITERS, default="blend-mh")
    p.add_argument("--cfl-safety", type=float, default=0.98)
    p.add_argument("--tend", type=float, default=None)
    p.add_argument("--fixed-dt", type=float, default=None)
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--snapshots", type=int, default=1,
                   help="number of evenly spaced snapshots")
    p.add_argument("--ic-projection", choices=("collocate", "cell-mean"),
                   default="collocate")
    p.add_argument("--no-flux-correction", action="store_true",
                   help="disable the admissibility preservation pathway "
                        "(testing only)")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--save-state", type=str, default=None,
                   help="write the final nodal state to an npz file")
    # indicator / TVB knobs
    p.add_argument("--indicator-amplitude", type=float, default=0.5)
    p.add_argument("--indicator-decay", type=float, default=1.8)
    p.add_argument("--indicator-sharpness", type=float, default=9.21024)
    p.add_argument("--alpha-min", type=float, default=0.001)
    p.add_argument("--alpha-max", type=float, default=1.0)
    p.add_argument("--indicator-variable", default="auto",
                   choices=("auto", "u", "rho", "p", "rho_p"))
    p.add_argument("--tvb-m", type=float, default=0.0)
    p.add_argument("--config", type=str, default=None,
                   help="JSON file whose keys mirror the flags")


def _parse_cells(text, dim):
    if text is None:
        return None
    parts = [int(v) for v in text.split(",")]
    if len(parts) == 1:
        return parts[0]
    return tuple(parts)


def _indicator_from_args(args):
    return IndicatorConfig(
        threshold_amplitude=args.indicator_amplitude,
        threshold_decay=args.indicator_decay,
        sharpness=args.indicator_sharpness,
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        variable=args.indicator_variable,
    )


def _merge_config_file(args, parser):
    if not args.config:
        return args
    with open(args.config) as fh:
        values = json.load(fh)
    for key, val in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            parser.error(f"unknown config key {key!r}")
        # explicit command line flags win over the file
        if parser.get_default(attr) == getattr(args, attr):
            setattr(args, attr, val)
    return args


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="lwblend",
        description="Single-stage high-order solver with subcell blending")
    parser.add_argument("--list-cases", action="store_true")
    sub = parser.add_subparsers(dest="command")

    ps = sub.add_parser("solve", help="run one case")
    _add_solve_args(ps)

    pc = sub.add_parser("convergence", help="grid refinement study")
    pc.add_argument("--case", default="advection_sine")
    pc.add_argument("--degrees", default="3,4")
    pc.add_argument("--grids", default="10,20,40")
    pc.add_argument("--limiter", choices=LIMITERS, default="blend-mh")
    pc.add_argument("--norm", choices=("l1", "l2", "max"), default="l2")
    pc.add_argument("--tend", type=float, default=None)
    pc.add_argument("--out", type=str, default=None,
                    help="write the error table as JSON")

    args = parser.parse_args(argv)
    if args.list_cases or args.command is None:
        print("available cases:")
        for name in available_cases():
            print(f"  {name}")
        return 0

    if args.command == "solve":
        args = _merge_config_file(args, parser)
        from .driver import SolverOptions

        options = SolverOptions(
            limiter=args.limiter,
            indicator=_indicator_from_args(args),
            tvb_m=args.tvb_m,
        )
        if args.no_flux_correction:
            options.flux_correction = False
            options.scaling_limiter = False
        result = run_case(
            args.case, degree=args.degree, cells=_parse_cells(args.cells, None),
            limiter=args.limiter, cfl_safety=args.cfl_safety, tend=args.tend,
            fixed_dt=args.fixed_dt, out_dir=args.out, fmt=args.format,
            snapshots=args.snapshots, options=options,
            ic_projection=args.ic_projection, progress=args.progress)
        if args.save_state:
            from .runner import save_state

            save_state(args.save_state, result.u, result.t, result.steps,
                       result.config)
            print(f"state saved to {args.save_state}")
        drift = ", ".join(f"{d:.2e}" for d in result.conservation_drift)
        print(f"{args.case}: t={result.t:.6g} steps={result.steps} "
              f"wall={result.wall_seconds:.1f}s alpha_max={result.alpha_max:.3f} "
              f"conservation drift [{drift}]")
        if result.snapshot_files:
            print("snapshots:")
            for f in result.snapshot_files:
                print(f"  {f}")
        return 0

    if args.command == "convergence":
        degrees = [int(d) for d in args.degrees.split(",")]
        grids = [int(g) for g in args.grids.split(",")]
        table = convergence_harness(args.case, degrees, grids,
                                    limiter=args.limiter, norm=args.norm,
                                    tend=args.tend)
        payload = {"case": args.case, "norm": args.norm, "grids": grids,
                   "degrees": {}}
        for degree, rows in table.items():
            print(f"degree {degree}:")
            payload["degrees"][str(degree)] = [
                {"cells": c, "error": e, "rate": r} for c, e, r in rows]
            for cells, err, rate in rows:
                rtxt = f"{rate:.2f}" if rate is not None else "  - "
                print(f"  {cells:6d}  {err:.6e}  {rtxt}")
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(payload, fh, indent=1)
            print(f"wrote {args.out}")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
