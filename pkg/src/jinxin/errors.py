"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 1 assertion failure,
2 usage/config error, 3 numerical blow-up.
"""


class JinXinError(Exception):
    exit_code = 1
    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class UsageError(JinXinError, ValueError):
    exit_code = 2
    kind = "usage"


class ConfigError(UsageError):
    kind = "config"


class SetupError(JinXinError):
    exit_code = 2
    kind = "setup"


class DomainError(JinXinError, ValueError):
    """State outside the admissible region of a flux model."""

    exit_code = 2
    kind = "domain"

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component

    def to_dict(self):
        d = super().to_dict()
        d["component"] = self.component
        return d


class HyperbolicityError(JinXinError):
    kind = "hyperbolicity"


class PatternError(JinXinError):
    """The Riemann data does not produce an all-shocks-plus-contacts fan."""

    exit_code = 2  # the configured data is inadmissible
    kind = "pattern"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def to_dict(self):
        d = super().to_dict()
        d["field"] = self.field
        return d


class ConvergenceError(JinXinError):
    kind = "convergence"

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)

    def to_dict(self):
        d = super().to_dict()
        d["residual_history"] = [float(r) for r in self.history]
        return d


class ProfileError(JinXinError):
    kind = "profile"


class CurveError(JinXinError):
    kind = "curve"


class DegeneracyError(JinXinError):
    kind = "degeneracy"


class WeightError(JinXinError):
    kind = "weight"


class BlowUpError(JinXinError):
    exit_code = 3
    kind = "blowup"

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time

    def to_dict(self):
        d = super().to_dict()
        d["time"] = self.time
        return d
