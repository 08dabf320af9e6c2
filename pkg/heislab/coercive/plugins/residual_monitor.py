from logging import getLogger

from heislab.exceptions import ConvergedException
from .dynamics_plugin import DynamicsPlugin, targets

logger = getLogger(__name__)


class ResidualMonitor(DynamicsPlugin):

    @targets("post iteration")
    def update(self, message, *args, **kwargs):
        residual = kwargs["residual"]
        logger.debug("iteration %d: residual %.3g", kwargs["i"], residual)
        tol = kwargs["tolerance"]
        if tol is not None and residual < tol:
            logger.debug("Terminating because residual < %g (= tolerance)", tol)
            raise ConvergedException("residual=%g < tolerance=%g" % (residual, tol))
