import numpy as np
import logging

from . import command
from .. import defaults
from ..group import cd_condition_probe, cd_sample_points, cd_trial_family
from ..metric import (ball_volume, cc_distance, cc_distance_pair, check_eikonal, estimate_K0,
                      random_cloud, unit_ball_volume)
from ..util import derive_rng

logger = logging.getLogger(__name__)


def add_cloud_args(parser, n=1000):
    cloud = parser.add_argument_group("Off-axis cloud")
    cloud.add_argument("--n", type=command.check_positive, default=n, help="points in the cloud")
    cloud.add_argument("--d-min", type=float, default=0.1, help="smallest distance from the identity")
    cloud.add_argument("--d-max", type=command.check_positive_float, default=5.0,
                       help="largest distance from the identity")
    cloud.add_argument("--h", type=command.check_positive_float, default=defaults.fd_step,
                       help="finite-difference step")
    return cloud


def _cloud(args, n=None):
    return random_cloud(n or args.n, derive_rng(args.seed), d_max=args.d_max, d_min=args.d_min)


class Dist(command.ReportCommand, command.ConsoleCommand):
    "Carnot-Caratheodory distance of points from the identity or from --from"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--point", type=command.point, action="append", required=True,
                            help="point x1,x2,x3; may be repeated")
        parser.add_argument("--from", dest="origin", type=command.point, default=None,
                            help="measure from this point instead of the identity")

    def run(self, args):
        rows = []
        for g in args.point:
            d = cc_distance(g) if args.origin is None else cc_distance_pair(args.origin, g)
            rows.append({"x1": g.x1, "x2": g.x2, "x3": g.x3, "distance": float(d)})
        summary = "\n".join(repr(r["distance"]) for r in rows)
        return command.Result(rows, True, summary)


class CheckEikonal(command.ReportCommand, command.ConsoleCommand):
    "Check |grad d| = 1 by finite differences over an off-axis cloud"
    name = "check-eikonal"

    def __init__(self, parser):
        super().__init__(parser)
        add_cloud_args(parser)
        parser.add_argument("--tol", type=command.check_positive_float, default=1e-3,
                            help="largest accepted deviation")

    def run(self, args):
        rep = check_eikonal(_cloud(args), args.h)
        w = rep.worst_point
        row = {"n_points": rep.n_points, "max_deviation": rep.max_deviation, "worst_x1": w.x1,
               "worst_x2": w.x2, "worst_x3": w.x3, "tolerance": args.tol, "passed": rep.passed(args.tol)}
        summary = "max | |grad d| - 1 | = %.3g over %d points at %s" % (rep.max_deviation, rep.n_points, w)
        return command.Result([row], row["passed"], summary)


class EstimateK0(command.ReportCommand, command.ConsoleCommand):
    "Estimate K0 = sup d * (sub-Laplacian of d) over an off-axis cloud"
    name = "estimate-k0"

    def __init__(self, parser):
        super().__init__(parser)
        add_cloud_args(parser)
        parser.add_argument("--stability", type=command.check_positive_float, default=0.1,
                            help="largest relative change of K0 when the cloud is doubled")

    def run(self, args):
        rep = estimate_K0(_cloud(args), args.h)
        doubled = estimate_K0(_cloud(args, 2 * args.n), args.h)
        change = abs(doubled.k0 - rep.k0) / abs(rep.k0)
        w = rep.witness
        row = {"n_points": rep.n_points, "k0": rep.k0, "k0_doubled": doubled.k0, "relative_change": change,
               "witness_x1": w.x1, "witness_x2": w.x2, "witness_x3": w.x3,
               "passed": bool(change <= args.stability)}
        summary = "K0 = %.6g (%.6g with %d points)" % (rep.k0, doubled.k0, doubled.n_points)
        return command.Result([row], row["passed"], summary)


class BallVolume(command.ReportCommand, command.ConsoleCommand):
    "Monte Carlo volume of CC balls and the fitted growth exponent"
    name = "ball-volume"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--radius", type=command.check_positive_float, nargs="+",
                            default=[0.5, 1.0, 2.0, 4.0], help="ball radii")
        parser.add_argument("--n", type=command.check_positive, default=200000,
                            help="samples per radius")
        parser.add_argument("--slope-tol", type=command.check_positive_float, default=0.05,
                            help="accepted distance of the fitted exponent from 4")

    def run(self, args):
        exact = unit_ball_volume()
        rows = []
        for R in args.radius:
            est = ball_volume(R, args.n, args.seed)
            rows.append({"radius": R, "volume": est.value, "stderr": est.stderr,
                         "exact": exact * R ** 4, "n_samples": est.n_samples})
        passed = True
        slope = None
        if len(rows) >= 2:
            slope = float(np.polyfit(np.log(args.radius), np.log([r["volume"] for r in rows]), 1)[0])
            passed = abs(slope - 4.0) <= args.slope_tol
        lines = ["R = %g: %.6g +/- %.2g (exact %.6g)" % (r["radius"], r["volume"], r["stderr"], r["exact"])
                 for r in rows]
        if slope is not None:
            lines.append("log-log slope %.4f" % slope)
        return command.Result(rows, passed, "\n".join(lines), parameters={"slope": slope})


class CdProbe(command.ReportCommand, command.ConsoleCommand):
    "Search for violations of the curvature condition Gamma_2 >= rho Gamma"
    name = "cd-probe"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--rho", type=float, action="append", default=None,
                            help="curvature constant; may be repeated. default: -1e6, 0, 1e6")
        parser.add_argument("--box", type=command.check_positive_float, default=1.0,
                            help="half width of the sample grid")
        parser.add_argument("--grid", type=command.check_positive, default=5,
                            help="grid points per axis")
        parser.add_argument("--h", type=command.check_positive_float, default=defaults.fd_step,
                            help="finite-difference step")

    def run(self, args):
        rhos = args.rho or [-1e6, 0.0, 1e6]
        fields = cd_trial_family()
        points = cd_sample_points(args.box, args.grid)
        rows = []
        for rho in rhos:
            rep = cd_condition_probe(rho, fields, points, args.h)
            w = rep.witness_point
            rows.append({"rho": rho, "minimum": rep.minimum, "witness_field": rep.witness_field,
                         "witness_x1": w.x1, "witness_x2": w.x2, "witness_x3": w.x3,
                         "violated": rep.violated})
        summary = "\n".join("rho = %g: min %.4g for %s at (%g, %g, %g)" % (
            r["rho"], r["minimum"], r["witness_field"], r["witness_x1"], r["witness_x2"], r["witness_x3"])
            for r in rows)
        return command.Result(rows, all(r["violated"] for r in rows), summary)
