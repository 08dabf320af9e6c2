from .chain import (ChainState, ChainRunner, Schedule, update_sites,
                    metropolis_site_update, sweep, tune)
from .diagnostics import batch_means, integrated_autocorrelation_time, symmetry_test
from .estimators import (boundary_points, run_chains, estimate_expectation,
                         exp_moment_estimate, sample_points, ExpMomentReport)
from . import plugins
