import numpy as np
import logging

from . import command
from ..exceptions import ModelError
from ..gibbs import exact_expectation
from ..metric import distance_array
from ..sampler import batch_means, estimate_expectation, exp_moment_estimate, run_chains

logger = logging.getLogger(__name__)


class Sample(command.ModelCommand, command.ConsoleCommand):
    "Sample the local specification of a model file by Metropolis chains"

    def __init__(self, parser):
        super().__init__(parser)
        command.add_sampler_args(parser)
        parser.add_argument("--thin", type=command.check_positive, default=1,
                            help="keep every k-th sweep")

    def run(self, args):
        mf = self.model_file
        w = mf.window
        samples = run_chains(mf.spec, w, mf.boundary, args.n, args.burn_in, args.seed,
                             initial=mf.config(), thin=args.thin, **command.sampler_kwargs(args))
        D = distance_array(samples.trace)
        rows = []
        for c, i in zip(w.site_columns, w.sites):
            mean, se = batch_means(D[:, :, c])
            rows.append({"site": i, "mean_distance": mean, "stderr": se,
                         "acceptance": float(samples.acceptance[c - 1]),
                         "scale": float(samples.scales[:, c - 1].mean()),
                         "burn_in": int(max(samples.burn_in)), "n_samples": int(D[:, :, c].size)})
        summary = "\n".join("site %d: E d = %.6g +/- %.2g, acceptance %.2f" % (
            r["site"], r["mean_distance"], r["stderr"], r["acceptance"]) for r in rows)
        return command.Result(rows, True, summary, warnings=samples.warnings)


class Estimate(command.ModelCommand, command.ConsoleCommand):
    "Estimate expectations of test functions under the local specification"

    def __init__(self, parser):
        super().__init__(parser)
        command.add_sampler_args(parser)
        parser.add_argument("--function", type=str, action="append", default=None,
                            help="test function, e.g. d0, 1+d0^2, prod(1+d0,1); may be repeated. "
                                 "default: d and d^2 of the first site")
        parser.add_argument("--compare", action="store_true",
                            help="compare with deterministic quadrature (3 standard errors)")

    def run(self, args):
        mf = self.model_file
        texts = args.function or ["d{i}", "d{i}^2"]
        rows = []
        passed = True
        for k, text in enumerate(texts):
            f = self.site_function(args, text)
            est = estimate_expectation(mf.spec, mf.window, mf.boundary, f, args.n, args.burn_in,
                                       args.seed + k, initial=mf.config(), **command.sampler_kwargs(args))
            row = {"function": f.name, "value": est.value, "stderr": est.stderr,
                   "n_samples": est.n_samples, "seed": est.seed}
            if args.compare:
                try:
                    exact = exact_expectation(mf.spec, mf.window, mf.boundary, f)
                except ModelError as e:
                    logger.warning("no quadrature comparison for %s: %s", f.name, e)
                    exact = None
                row["quadrature"] = exact
                row["agrees"] = None if exact is None else bool(est.agrees_with(exact))
                passed &= row["agrees"] is not False
            rows.append(row)
        summary = "\n".join("E[%s] = %.8g +/- %.3g" % (r["function"], r["value"], r["stderr"])
                            + ("" if r.get("quadrature") is None else " (quadrature %.8g)" % r["quadrature"])
                            for r in rows)
        return command.Result(rows, passed, summary)


class ExpMoment(command.ModelCommand, command.ConsoleCommand):
    "Estimate the exponential moment E exp(eps g) with heavy-tail detection"
    name = "exp-moment"

    def __init__(self, parser):
        super().__init__(parser)
        command.add_sampler_args(parser)
        parser.add_argument("--g", type=str, default="d{i}",
                            help="test function in the exponent. default: d of the first site")
        parser.add_argument("--eps", type=command.check_positive_float, required=True,
                            help="multiplier in the exponent")

    def run(self, args):
        mf = self.model_file
        g = self.site_function(args, args.g)
        rep = exp_moment_estimate(mf.spec, mf.window, mf.boundary, g, args.eps, args.n, args.seed,
                                  args.burn_in, initial=mf.config(), **command.sampler_kwargs(args))
        est = rep.estimate
        row = {"function": g.name, "eps": args.eps, "value": est.value,
               "stderr": None if not np.isfinite(est.stderr) else est.stderr,
               "log_value": rep.log_value, "top_share": rep.top_share, "heavy_tail": rep.heavy_tail,
               "diverged": rep.diverged, "n_samples": est.n_samples}
        summary = "E exp(%g %s) = %.8g +/- %.3g" % (args.eps, g.name, est.value, est.stderr)
        if rep.heavy_tail or rep.diverged:
            summary += " (unreliable: %s)" % ("diverged" if rep.diverged else "heavy tail")
        return command.Result([row], not rep.diverged, summary, warnings=rep.warnings)
