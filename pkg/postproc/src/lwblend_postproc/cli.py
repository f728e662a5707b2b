"""Console entry points wrapping the figure builders."""

import argparse

from . import plots


def profile_main(argv=None):
    p = argparse.ArgumentParser(prog="plot-profile",
                                description="1-D snapshot line plot")
    p.add_argument("snapshot")
    p.add_argument("--variable", default="rho")
    p.add_argument("--reference", default=None,
                   help="fine-run snapshot to overlay")
    p.add_argument("--zoom", default=None,
                   help="inset window as XMIN,XMAX")
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)
    zoom = tuple(float(v) for v in args.zoom.split(",")) if args.zoom else None
    path = plots.plot_profile(args.snapshot, args.variable, args.out,
                              reference_path=args.reference, zoom=zoom)
    print(path)
    return 0


def field2d_main(argv=None):
    p = argparse.ArgumentParser(prog="plot-field2d",
                                description="2-D snapshot pseudocolor map")
    p.add_argument("snapshot")
    p.add_argument("--variable", default="rho")
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--contours", type=int, default=0)
    p.add_argument("--crop", default=None,
                   help="window as X0,X1,Y0,Y1")
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)
    crop = None
    if args.crop:
        x0, x1, y0, y1 = (float(v) for v in args.crop.split(","))
        crop = ((x0, x1), (y0, y1))
    path = plots.plot_field2d(args.snapshot, args.variable, args.out,
                              scale=args.scale, contours=args.contours,
                              crop=crop)
    print(path)
    return 0


def convergence_main(argv=None):
    p = argparse.ArgumentParser(prog="plot-convergence",
                                description="error vs grid size")
    p.add_argument("table", help="JSON table from `lwblend convergence`")
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)
    print(plots.plot_convergence(args.table, args.out))
    return 0


def alpha_stats_main(argv=None):
    p = argparse.ArgumentParser(prog="plot-alpha-stats",
                                description="active-blending percentage vs time")
    p.add_argument("manifest", help="run.json manifest from a solver run")
    p.add_argument("--out", required=True)
    args = p.parse_args(argv)
    print(plots.plot_alpha_stats(args.manifest, args.out))
    return 0
