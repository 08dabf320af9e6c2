from logging import getLogger

from tqdm import tqdm

from .sampler_plugin import SamplerPlugin

logger = getLogger(__name__)


class ProgressPrinter(SamplerPlugin):

    def __init__(self):
        self._bar = None

    def update(self, message, *args, **kwargs):
        if message == "begin":
            logger.debug("Sampling %d sweeps of %d chains...", kwargs["n"], kwargs["state"].n_chains)
            self._bar = tqdm(total=kwargs["n"], disable=None, leave=False, unit="sweep")
        elif message == "post sweep" and self._bar is not None:
            self._bar.update()
        elif message == "burned in":
            logger.debug("Burn-in finished after %d sweeps", kwargs["sweeps"])
        elif message == "finished":
            if self._bar is not None:
                self._bar.close()
                self._bar = None
            logger.debug("Acceptance: %s", kwargs["state"].acceptance.round(3))
