from . import (
    sampler_plugin,
    acceptance_monitor,
    progress_printer,
)
