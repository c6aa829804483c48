import warnings


class GeslError(Exception):
    pass


class ShapeError(GeslError, ValueError):
    pass


class CoverageError(GeslError, ValueError):
    pass


class ConfigError(GeslError, ValueError):

    def __init__(self, fields):
        self.fields = dict(fields)
        msg = "; ".join("%s: %s" % (k, v) for k, v in self.fields.items())
        super().__init__("Invalid config (%s)" % msg)


class ErgodicityError(GeslError, RuntimeError):
    pass


class NumericalError(GeslError, RuntimeError):
    pass


class EnumerationBudgetError(GeslError, RuntimeError):
    pass


class NumericalWarning(UserWarning):
    pass


def warn_numerical(msg):
    warnings.warn(msg, NumericalWarning, stacklevel=3)
