import numpy as np
import logging

from . import command
from .. import defaults
from ..coercive import (QuadratureMeasure, SampleMeasure, block_dynamics_iterate, entropy_telescoping_check,
                        ls_ratio_scan, sg_from_ls_relation_check, sg_ratio_scan, ubound_integral_check,
                        ubound_pointwise_check)
from ..functions import parse_function, standard_family

logger = logging.getLogger(__name__)


class UboundPointwise(command.ModelCommand, command.ConsoleCommand):
    "Scan the pointwise U-bound over a cloud of spins and boundaries"
    name = "ubound-pointwise"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--n", type=command.check_positive, default=100000,
                            help="points in the verification cloud")
        parser.add_argument("--c", type=float, default=None,
                            help="additive constant. default: calibrated by a deterministic pre-scan")
        parser.add_argument("--d-max", type=command.check_positive_float, default=50.0,
                            help="largest d(x) in the cloud")
        parser.add_argument("--omega-max", type=command.check_positive_float, default=10.0,
                            help="largest d(omega_j) in the cloud")

    def run(self, args):
        spec = self.model_file.spec
        rep = ubound_pointwise_check(spec, args.n, args.seed, c=args.c, d_max=args.d_max,
                                     omega_max=args.omega_max, threads=args.threads)
        row = {"max_slack": rep.lhs_max_slack, "n_points": rep.n_points, "skipped": rep.skipped}
        row.update(rep.constants_used)
        if rep.witness is not None:
            x, om = rep.witness
            row.update({"witness_x1": x.x1, "witness_x2": x.x2, "witness_x3": x.x3,
                        "witness_omega_left": om[0], "witness_omega_right": om[1]})
        summary = "max slack %.6g over %d points (c = %.6g, a = %.6g)" % (
            rep.lhs_max_slack, rep.n_points, rep.constants_used["c"], rep.constants_used["a"])
        return command.Result([row], rep.passed, summary)


class UboundIntegral(command.ModelCommand, command.ConsoleCommand):
    "Least (A, B) for the integrated one-site U-bound over several boundaries"
    name = "ubound-integral"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--omega", type=command.pair, action="append", default=None,
                            help="neighbour distances left,right; may be repeated. "
                                 "default: 0,0 1,1 2,2 4,4 0,8")
        parser.add_argument("--function", type=command.test_function, action="append", default=None,
                            help="test function of site 0. default: const(1), d0, d0^2, exp(0.5*d0)")
        parser.add_argument("--A", dest="A_grid", type=float, nargs=3, metavar=("START", "STOP", "NUM"),
                            default=[0.0, 10.0, 21], help="grid of A values")
        parser.add_argument("--mode", choices=["distance", "nonuniform"], default="distance",
                            help="weight: d^(p-1) + sum d(omega_j), or |grad H|^q + H")
        parser.add_argument("--method", choices=["quadrature", "mcmc"], default="quadrature")
        parser.add_argument("--pair", type=float, nargs=2, metavar=("A", "B"), default=None,
                            help="check this (A, B) on every boundary instead of the cheapest grid pair")
        parser.add_argument("--n", type=command.check_positive, default=20000,
                            help="sweeps per chain with --method mcmc")

    def run(self, args):
        spec = self.model_file.spec
        omegas = args.omega or [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (0.0, 8.0)]
        family = args.function or [parse_function(t) for t in ("const(1)", "d0", "d0^2", "exp(0.5*d0)")]
        start, stop, num = args.A_grid
        A = np.linspace(start, stop, int(num))
        rep = ubound_integral_check(spec, omegas, family, A, args.mode, args.method, args.n, args.seed,
                                    threads=args.threads, claimed=args.pair)
        A1, B1 = rep.pair
        floors = rep.omega_floor()
        lines = ["(A, B) = (%.6g, %.6g)" % (A1, B1)]
        lines += ["omega = (%g, %g): B floor %.6g, residue %.6g" % (om[0], om[1], b, r)
                  for om, b, r in zip(rep.omegas, floors, rep.residue)]
        params = {"A": A1, "B": B1}
        if args.mode == "nonuniform":
            params["growth_slope"] = rep.growth_slope()
            lines.append("floor growth against sum d(omega_j)^%g: slope %.6g" % (spec.p, params["growth_slope"]))
        elif args.pair is not None:
            lines.append("claimed (A, B) = (%g, %g): %s" % (args.pair[0], args.pair[1],
                                                           "holds" if rep.passed else "violated"))
        return command.Result(rep.rows(), rep.passed, "\n".join(lines), parameters=params)


def _measure(args, mf):
    if args.measure == "quadrature":
        return QuadratureMeasure.build(mf.spec, mf.window, mf.boundary)
    return SampleMeasure.from_chains(mf.spec, mf.window, mf.boundary, args.n, args.burn_in, args.seed,
                                     initial=mf.config(), **command.sampler_kwargs(args))


def _family(args, mf):
    if args.function:
        return args.function
    family = standard_family(mf.window.lo, mf.spec.p)
    if args.measure == "quadrature":
        family = [f for f in family if f.radial]
    return family


def add_scan_args(parser):
    parser.add_argument("--measure", choices=["quadrature", "mcmc"], default="quadrature",
                        help="quadrature (windows of at most 3 sites) or MCMC samples")
    parser.add_argument("--function", type=command.test_function, action="append", default=None,
                        help="test function; may be repeated. default: d, d^2, exp(theta d^(p/2)) "
                             "and x1 (MCMC only) of the first site")
    parser.add_argument("--q", type=float, default=None, help="exponent in (1, 2]. default: the model's q")
    parser.add_argument("--h", type=command.check_positive_float, default=defaults.fd_step,
                        help="finite-difference step for non-radial functions")
    command.add_sampler_args(parser)


def _scan_result(scan):
    lines = ["%s_q (q=%g) >= %.6g, witness %s" % (scan.kind.upper(), scan.q, scan.best, scan.witness)]
    if scan.flagged:
        lines.append("vanishing Dirichlet form: %s" % ", ".join(scan.flagged))
    warnings = ["%s: Dirichlet form vanishes" % name for name in scan.flagged]
    return command.Result(scan.rows(), True, "\n".join(lines), parameters={"best": scan.best},
                          warnings=warnings)


class LsScan(command.ModelCommand, command.ConsoleCommand):
    "Lower bound on the q-log-Sobolev constant over a family of test functions"
    name = "ls-scan"

    def __init__(self, parser):
        super().__init__(parser)
        add_scan_args(parser)

    def run(self, args):
        mf = self.model_file
        q = mf.spec.q if args.q is None else args.q
        return _scan_result(ls_ratio_scan(_measure(args, mf), q, _family(args, mf), args.h))


class SgScan(command.ModelCommand, command.ConsoleCommand):
    "Lower bound on the q-spectral gap constant, or the SG/LS relation check"
    name = "sg-scan"
    model_required = False

    def __init__(self, parser):
        super().__init__(parser)
        add_scan_args(parser)
        parser.add_argument("--relation", action="store_true",
                            help="check SG <= 4 LS / log 2 on exactly solvable two-point measures")

    def main(self, args):
        if not args.relation and args.model is None:
            logger.error("sg-scan needs --model unless --relation is given")
            return command.USAGE
        return super().main(args)

    def run(self, args):
        if args.relation:
            rep = sg_from_ls_relation_check()
            summary = "\n".join("p0=%g q=%g: SG %.6g <= 4 LS/log 2 = %.6g: %s" % (
                r["p0"], r["q"], r["sg"], r["bound"], r["holds"]) for r in rep.rows)
            return command.Result(rep.rows, rep.passed, summary)
        mf = self.model_file
        q = mf.spec.q if args.q is None else args.q
        return _scan_result(sg_ratio_scan(_measure(args, mf), q, _family(args, mf), args.h))


class TelescopeCheck(command.ModelCommand, command.ConsoleCommand):
    "Check the even/odd entropy decomposition on a window of at most 3 sites"
    name = "telescope-check"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--function", type=str, action="append", default=None,
                            help="positive test function; may be repeated. "
                                 "default: 1+d, 1+d^2 and prod(1+...) over the window")
        parser.add_argument("--q", type=float, default=None, help="exponent in (1, 2]. default: the model's q")
        parser.add_argument("--tol", type=command.check_positive_float, default=1e-6)

    def run(self, args):
        mf = self.model_file
        w = mf.window
        texts = args.function or ["1+d{i}", "1+d{i}^2",
                                  "prod(1+d%s)" % ",".join(str(i) for i in w.sites)]
        rows = []
        for text in texts:
            f = self.site_function(args, text)
            rep = entropy_telescoping_check(mf.spec, w, mf.boundary, f, args.q, args.tol)
            rows.append({"function": f.name, "entropy": rep.lhs, "even_term": rep.terms[0],
                         "odd_term": rep.terms[1], "swept_term": rep.terms[2], "correction": rep.correction,
                         "difference": rep.difference, "passed": rep.passed})
        summary = "\n".join("%s: |Ent - sum| = %.3g" % (r["function"], r["difference"]) for r in rows)
        return command.Result(rows, all(r["passed"] for r in rows), summary)


class BlockDynamics(command.ModelCommand, command.ConsoleCommand):
    "Iterate the even/odd sweeping-out operator and track convergence"
    name = "block-dynamics"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--function", type=str, default="d{i}",
                            help="nonnegative test function. default: d of the first site")
        parser.add_argument("--n-max", type=command.check_positive, default=defaults.block_iterations,
                            help="largest number of iterations")
        parser.add_argument("--nodes", type=command.check_positive, default=defaults.block_nodes,
                            help="Gauss-Legendre nodes per site")
        parser.add_argument("--tolerance", type=command.check_positive_float,
                            default=defaults.residual_tolerance,
                            help="largest accepted final residual")
        parser.add_argument("--stop", action="store_true",
                            help="stop as soon as the residual is below the tolerance")

    def run(self, args):
        mf = self.model_file
        f = self.site_function(args, args.function)
        run = block_dynamics_iterate(mf.spec, mf.window, mf.boundary, f, args.n_max, args.nodes,
                                     args.tolerance if args.stop else None)
        rows = [{"iteration": n, "residual": r, "grid_residual": g}
                for n, (r, g) in enumerate(zip(run.residuals, run.grid_residuals))]
        passed = run.residuals[-1] <= args.tolerance
        summary = "residual %.3g after %d iterations (E f = %.10g)" % (
            run.residuals[-1], run.n_iterations, run.reference)
        return command.Result(rows, passed, summary,
                              parameters={"reference": run.reference, "grid_mean": run.grid_mean})
