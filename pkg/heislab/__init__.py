import warnings

import numpy as np

# numpy 2 moved the warning classes to numpy.exceptions
warnings.filterwarnings("error", category=getattr(np, "exceptions", np).VisibleDeprecationWarning)
