import logging

from . import command
from ..config import dumps_model
from ..gibbs import hstar_diagnostic

logger = logging.getLogger(__name__)


class Model(command.ModelCommand, command.ConsoleCommand):
    "Validate a model file and echo the parsed model"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("--hstar", type=command.check_positive_float, metavar="L",
                            help="also report the (H*) bounds on the ball of radius L")
        parser.add_argument("--canonical", action="store_true",
                            help="print the model as a custom-family model file")

    def run(self, args):
        mf = self.model_file
        spec = mf.spec
        row = dict(spec.to_dict())
        row.update({"window_lo": mf.window.lo, "window_hi": mf.window.hi,
                    "verified_regime": spec.verified_regime})
        warnings = []
        if not spec.verified_regime:
            msg = "%s lies outside the verified regime" % spec.to_s()
            logger.warning(msg)
            warnings.append(msg)
        if args.hstar is not None:
            hs = hstar_diagnostic(spec, args.hstar)
            row.update({"hstar_L": hs.L, "hstar_upper": hs.upper, "hstar_lower": hs.lower})
        if args.canonical:
            summary = dumps_model(mf).rstrip("\n")
        else:
            lines = [spec.to_s(), "window %s" % mf.window]
            lines += ["omega[%d] = %s" % (j, g) for j, g in sorted(mf.boundary.items())]
            if args.hstar is not None:
                lines.append("H*(L=%g): B* = %.6g, B_* = %.6g" % (args.hstar, row["hstar_upper"], row["hstar_lower"]))
            summary = "\n".join(lines)
        return command.Result([row], True, summary, warnings=warnings)
