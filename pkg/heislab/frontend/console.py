from argparse import ArgumentParser
import logging
import sys

from .. import commands, version
from ..exceptions import ConfigError, ModelError
from ..log import init_logging
from ..commands.command import USAGE


def init_subparsers(subparsers_obj):
    from .. import commands
    ret = {}
    kwds = {getattr(cls, "name", cls.__name__.lower()): cls
            for cls in commands.command.ConsoleCommand.__subclasses__()}
    for kwd in sorted(kwds):
        cls = kwds[kwd]
        p = subparsers_obj.add_parser(kwd, help=cls.__doc__, description=cls.__doc__)
        ret[kwd] = cls(p)
    return ret


def run(argv):
    "Run one subcommand and return its exit code."
    init_logging()
    logger = logging.getLogger(__name__)
    logger.debug("heislab " + version.version)
    parser = ArgumentParser(prog="heislab")
    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True
    cmds = init_subparsers(subparsers)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    args.argv = list(argv)
    try:
        code = cmds[args.command].main(args)
    except (ConfigError, ModelError) as e:
        logger.error(str(e))
        return USAGE
    return 0 if code is None else code


def main():
    sys.exit(run(sys.argv[1:]))
