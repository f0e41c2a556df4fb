"""Exception hierarchy. Every error carries a machine-readable ``code``."""


class KobalabError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": str(self)}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(v):
    try:
        import numpy as np

        if isinstance(v, np.ndarray):
            return [_jsonable(x) for x in v.tolist()]
        if isinstance(v, complex):
            return [v.real, v.imag]
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


class DomainError(KobalabError, ValueError):
    code = "domain_error"


class DivergentIntegralError(KobalabError, ArithmeticError):
    code = "divergent_integral"


class OutOfRangeError(KobalabError, ValueError):
    code = "out_of_range"


class FiniteDifferenceError(KobalabError, ArithmeticError):
    code = "fd_instability"


class MonotonicityError(KobalabError, ValueError):
    code = "monotonicity_violation"


class ConsistencyError(KobalabError, ArithmeticError):
    code = "internal_consistency"


class OutOfPatchError(KobalabError, ValueError):
    code = "out_of_patch"


class NotInteriorError(KobalabError, ValueError):
    code = "non_interior_point"


class NonUniqueProjectionError(KobalabError, ValueError):
    code = "non_unique_projection"


class StripError(KobalabError, ValueError):
    code = "strip_violation"


class DegenerateGradientError(KobalabError, ValueError):
    code = "degenerate_gradient"


class EvaluationError(KobalabError, ValueError):
    code = "evaluation_failure"


class CalibrationError(KobalabError, RuntimeError):
    code = "calibration_failure"


class UnsupportedDomainError(KobalabError, ValueError):
    code = "unsupported_domain"


class NoFeasibleDiscError(KobalabError, RuntimeError):
    code = "no_feasible_disc"


class CalibrationExhaustedError(CalibrationError):
    code = "calibration_exhausted"


class NonNegativeRhoError(KobalabError, ValueError):
    code = "nonnegative_rho"


class ConfigError(KobalabError, ValueError):
    code = "config_error"
