class HeislabError(Exception):
    "Base class for errors raised by heislab."
    pass


class SingularPointError(HeislabError, ValueError):
    "Thrown when an operator is evaluated on the x3-axis of a field singular there."
    pass


class RootFindingError(HeislabError, ArithmeticError):
    "Thrown when the distance shape equation fails to converge."
    pass


class QuadratureError(HeislabError, ArithmeticError):
    "Thrown when a radial rule misses its tail bound or tolerance."
    pass


class GridResolutionError(QuadratureError):
    "Thrown when a block-dynamics grid fails its Richardson check."
    pass


class ModelError(HeislabError, ValueError):
    "Thrown for invalid model parameters or malformed lattice configurations."
    pass


class UnsupportedModelError(ModelError):
    "Thrown when a radial-only routine receives a non-radial model or function."
    pass


class ConfigError(HeislabError, ValueError):
    "Thrown when a model file cannot be parsed."

    def __init__(self, message, path=None, lineno=None, field=None):
        self.message = message
        self.path = path
        self.lineno = lineno
        self.field = field
        super().__init__(str(self))

    def __str__(self):
        loc = [str(x) for x in (self.path, self.lineno) if x is not None]
        prefix = ":".join(loc)
        if self.field:
            prefix = "%s: %s" % (prefix, self.field) if prefix else self.field
        return "%s: %s" % (prefix, self.message) if prefix else self.message


class NonFiniteError(HeislabError, ArithmeticError):
    "Thrown when a sampled functional evaluates to NaN or infinity."

    def __init__(self, chain, step, value):
        self.chain = chain
        self.step = step
        self.value = value
        super().__init__(
            "non-finite functional value %r in chain %d at step %d" % (value, chain, step)
        )


class ConvergedException(HeislabError):
    "Thrown when an iteration reaches its stopping criterion."
    pass
