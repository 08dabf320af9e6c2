from . import model, geometry, sampling, inequalities, rerun, version
