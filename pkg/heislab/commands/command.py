# Base class; subclasses will automatically show up as subcommands
import argparse
import os
import os.path
import sys
import time
from dataclasses import dataclass, field
import logging

from .. import defaults
from ..config import load_model
from ..functions import parse_function
from ..group import GroupElement
from ..log import setup_logging, add_debug_log, collect_warnings
from ..report import RunManifest, write_report, print_rows, result_digest

logger = logging.getLogger(__name__)

PASS, FAIL, USAGE = 0, 1, 2


def check_positive(value):
    ivalue = int(value)
    if ivalue <= 0:
        raise argparse.ArgumentTypeError("%s is an invalid positive int value" % value)
    return ivalue


def check_positive_float(value):
    fvalue = float(value)
    if not fvalue > 0:
        raise argparse.ArgumentTypeError("%s is an invalid positive value" % value)
    return fvalue


def point(value):
    try:
        return GroupElement.parse(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def pair(value):
    try:
        a, b = (float(x) for x in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("%r should be two comma separated numbers" % value)
    return (a, b)


def test_function(value):
    try:
        return parse_function(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _parameter(v):
    "Manifest form of an argument value."
    if isinstance(v, (list, tuple)):
        return [_parameter(x) for x in v]
    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    return getattr(v, "name", None) or str(v)


def default_outdir():
    return os.environ.get(defaults.outdir_env, ".")


@dataclass
class Result:
    "Rows of a report, the verdict and anything worth a line on stdout."
    rows: list
    passed: bool = True
    summary: str = None
    parameters: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


class ConsoleCommand:
    def __init__(self, parser):
        pass


class Command:
    def __init__(self, parser):
        '''Configure parser and parse args.'''
        parser.add_argument('-v', '--verbose', action='count', default=0,
                help="increase debugging output, specify multiply times for more")
        parser.add_argument('--seed', type=int, default=defaults.seed,
                help="seed of the run; unit k draws from SeedSequence([seed, k])")
        parser.add_argument('--threads', '--cores', dest="threads", type=check_positive,
                default=defaults.threads,
                help="Number of worker processes to use in parallel calculations. "
                     "default: all available cores")

    def main(self, args):
        setup_logging(args.verbose)
        defaults.threads = args.threads
        return PASS


class ReportCommand(Command):
    "A command that writes <outdir>/<name>.csv plus a run manifest."
    IGNORED = ("verbose", "outdir", "format", "argv", "command", "threads")

    def __init__(self, parser):
        super().__init__(parser)
        add_report_args(parser)

    @property
    def keyword(self):
        return getattr(self, "name", self.__class__.__name__.lower())

    def run(self, args) -> Result:
        raise NotImplementedError

    def prepare(self, args):
        pass

    def model_dict(self, args):
        return None

    def main(self, args):
        if not os.path.isdir(args.outdir):
            os.makedirs(args.outdir)
        # Initialize the logger
        # Do this before calling super().main() so that
        # any debugging output generated there gets logged
        fh = add_debug_log(os.path.join(args.outdir, ".debug.txt"))
        try:
            with collect_warnings() as logged:
                super().main(args)
                self.prepare(args)
                logger.debug(sys.argv)
                logger.debug(args)
                start = time.perf_counter()
                result = self.run(args)
            warnings = list(result.warnings)
            warnings += [w for w in logged if w not in warnings]
            params = {k: _parameter(v) for k, v in sorted(vars(args).items())
                      if k not in self.IGNORED and not callable(v)}
            params.update(result.parameters)
            manifest = RunManifest(
                command=self.keyword,
                argv=list(getattr(args, "argv", sys.argv[1:])),
                result_digest=result_digest(result.rows),
                passed=bool(result.passed),
                model=self.model_dict(args),
                seeds=[args.seed],
                parameters=params,
                wall_clock=time.perf_counter() - start,
                warnings=warnings,
            )
            write_report(args.outdir, self.keyword, result.rows, manifest)
            if args.format == "text":
                if result.summary is not None:
                    print(result.summary)
                else:
                    print_rows(result.rows, "csv")
            else:
                print_rows(result.rows, args.format)
            if not result.passed:
                logger.warning("%s: verification failed", self.keyword)
            return PASS if result.passed else FAIL
        finally:
            logging.getLogger().removeHandler(fh)
            fh.close()


class ModelCommand(ReportCommand):
    "A report command reading a model file."
    model_required = True

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--model", "-m", metavar="FILE", required=self.model_required,
                            help="model file (INI, see docs/reports.md)")

    def prepare(self, args):
        self.model_file = load_model(args.model) if args.model else None

    def model_dict(self, args):
        mf = self.model_file
        if mf is None:
            return None
        return {
            "spec": mf.spec.to_dict(),
            "window": [mf.window.lo, mf.window.hi],
            "boundary": {str(j): list(g.as_array()) for j, g in mf.boundary.items()},
            "spins": {str(i): list(g.as_array()) for i, g in mf.spins.items()},
        }

    def site_function(self, args, text):
        "Default test function text with {i} replaced by the first site of the window."
        return parse_function(text.format(i=self.model_file.window.lo))


def add_report_args(parser):
    parser.add_argument("-o", "--outdir", default=default_outdir(),
                        help="output directory. default: $%s or ." % defaults.outdir_env)
    parser.add_argument("--format", choices=["text", "json", "csv"], default="text",
                        help="how to print the result on stdout")


def add_sampler_args(parser):
    sampler = parser.add_argument_group("Sampler parameters")
    sampler.add_argument("--n", type=check_positive, default=2000,
                         help="sweeps per chain, burn-in included")
    sampler.add_argument("--burn-in", type=int, default=None,
                         help="burn-in sweeps. default: ten integrated autocorrelation times")
    sampler.add_argument("--chains", type=check_positive, default=defaults.chains,
                         help="number of independent chains")
    sampler.add_argument("--schedule", choices=["sequential", "checkerboard"], default="checkerboard",
                         help="site update order within a sweep")
    sampler.add_argument("--scale", type=check_positive_float, default=defaults.proposal_scale,
                         help="initial proposal scale")
    return sampler


def sampler_kwargs(args):
    return {"n_chains": args.chains, "threads": args.threads, "schedule": args.schedule,
            "scale": args.scale}
