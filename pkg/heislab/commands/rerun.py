import os.path
import shutil
import tempfile
import logging

from . import command
from ..report import RunManifest, report_paths

logger = logging.getLogger(__name__)


class Rerun(command.Command, command.ConsoleCommand):
    "Re-execute the command line stored in a run manifest and compare result digests"

    def __init__(self, parser):
        super().__init__(parser)
        parser.add_argument("manifest", help="a <command>.manifest.json file")
        parser.add_argument("--keep", action="store_true",
                            help="keep the temporary output directory")

    def main(self, args):
        super().main(args)
        from ..frontend.console import run
        old = RunManifest.load(args.manifest)
        outdir = tempfile.mkdtemp(prefix="heislab-rerun-")
        try:
            argv = _without_outdir(old.argv) + ["--outdir", outdir, "--format", "csv"]
            logger.info("re-running %s", " ".join(argv))
            code = run(argv)
            path = report_paths(outdir, old.command)[1]
            if not os.path.exists(path):
                logger.error("re-run wrote no manifest (exit code %s)", code)
                return command.FAIL
            new = RunManifest.load(path)
        finally:
            if args.keep:
                logger.info("output kept in %s", outdir)
            else:
                shutil.rmtree(outdir, ignore_errors=True)
        same = new.result_digest == old.result_digest
        print("%s %s" % ("identical" if same else "DIFFERENT", new.result_digest))
        if not same:
            logger.warning("digest %s differs from the recorded %s", new.result_digest, old.result_digest)
        return command.PASS if same else command.FAIL


def _without_outdir(argv):
    out = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in ("-o", "--outdir", "--format"):
            skip = True
            continue
        if a.startswith("--outdir=") or a.startswith("--format="):
            continue
        out.append(a)
    return out
