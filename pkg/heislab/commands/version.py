import numpy as np
import pandas as pd
import scipy

from .. import version

from . import command


class Version(command.ConsoleCommand):
    'Print version string, and with -a the numerical stack behind it'

    def __init__(self, parser):
        parser.add_argument("-a", "--all", action="store_true",
                            help="also print numpy, scipy and pandas versions")

    def main(self, args):
        print("heislab v%s" % version.version)
        if args.all:
            for mod in (np, scipy, pd):
                print("%s v%s" % (mod.__name__, mod.__version__))
