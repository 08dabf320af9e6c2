from . import (
    dynamics_plugin,
    residual_monitor,
)
