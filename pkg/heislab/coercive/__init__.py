from .functionals import (Functionals, QuadratureMeasure, SampleMeasure, TwoPointMeasure,
                          entropy_q, dirichlet_q, variance_q, functionals)
from .scans import RatioScan, ls_ratio_scan, sg_ratio_scan, sg_from_ls_relation_check
from .ubound import (UBoundReport, pointwise_constants, calibrate_additive_constant,
                     ubound_pointwise_check, ubound_integral_check, grad_dot_check)
from .dynamics import (entropy_telescoping_check, block_dynamics_iterate,
                       BlockDynamics, BlockDynamicsRun)
from . import plugins
