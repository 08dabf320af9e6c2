import logging

import numpy as np

from .sampler_plugin import SamplerPlugin, targets

logger = logging.getLogger(__name__)

LOW = 0.2
HIGH = 0.5


class AcceptanceMonitor(SamplerPlugin):

    @targets(["tuned", "finished"])
    def update(self, message, *args, **kwargs):
        state = kwargs["state"]
        rate = state.acceptance
        if message == "tuned":
            logger.log(logging.DEBUG - 1, "acceptance %s, scales %s",
                       rate.round(3), state.scales.round(3))
            return
        bad = (rate < LOW) | (rate > HIGH)
        if np.any(bad):
            sites = [state.window.site(c + 1) for c in np.nonzero(bad)[0]]
            msg = "acceptance %s outside [%g, %g] at site(s) %s" % (rate[bad].round(3), LOW, HIGH, sites)
            logger.warning(msg)
            kwargs["runner"].warnings.append(msg)
