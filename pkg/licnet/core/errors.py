"""Error hierarchy for licnet.

Every failure raised by the library derives from ``LicError`` so callers (and
the CLI) can render it uniformly. ``exit_code`` plays the role an HTTP status
code would in a service: 1 for computation failures, 2 for bad input documents.
"""

from typing import Any, Dict, List, Optional


class LicError(Exception):
    """Base class for all licnet errors."""

    code = "lic_error"
    exit_code = 1

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": self.code,
            "detail": self.detail,
            "context": {key: _jsonable(value) for key, value in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    return str(value)


# Distributions and channels

class NegativeEntryError(LicError):
    code = "negative_entry"


class SumNotOneError(LicError):
    code = "sum_not_one"

    def __init__(self, detail: str, deviation: float, **context: Any):
        super().__init__(detail, deviation=deviation, **context)
        self.deviation = deviation


class DimensionMismatchError(LicError):
    code = "dimension_mismatch"


class SupportMismatchError(LicError):
    code = "support_mismatch"


class InvalidPerturbationError(LicError):
    code = "invalid_perturbation"


class ZeroProbabilitySymbolError(LicError):
    code = "zero_probability_symbol"

    def __init__(self, detail: str, symbol: int, side: str):
        super().__init__(detail, symbol=symbol, side=side)
        self.symbol = symbol
        self.side = side


# Solvers

class NumericalFailureError(LicError):
    code = "numerical_failure"


class SolverDidNotConvergeError(LicError):
    code = "solver_did_not_converge"

    def __init__(self, detail: str, gap: float, **context: Any):
        super().__init__(detail, gap=gap, **context)
        self.gap = gap


class InfeasibleError(LicError):
    code = "infeasible"


class UnboundedError(LicError):
    code = "unbounded"


# Models and networks

class InvalidGridError(LicError):
    code = "invalid_grid"

    def __init__(self, detail: str, violations: Optional[List[str]] = None, **context: Any):
        super().__init__(detail, violations=violations or [], **context)
        self.violations = violations or []


class EmptyListError(LicError):
    code = "empty_list"


class DeadLinkInModeError(LicError):
    code = "dead_link_in_mode"


class UnrepairableZeroPatternError(LicError):
    code = "unrepairable_zero_pattern"


class InvalidSymmetricParametersError(LicError):
    code = "invalid_symmetric_parameters"


class InvalidWeightError(LicError):
    code = "invalid_weight"


class InvalidSchemeError(LicError):
    code = "invalid_scheme"


# Documents and commands

class DocumentError(LicError):
    code = "document_error"
    exit_code = 2


class DocumentSyntaxError(DocumentError):
    code = "document_syntax"


class DocumentSchemaError(DocumentError):
    code = "document_schema"


class DocumentValidationError(DocumentError):
    code = "document_validation"


class CommandNotApplicableError(DocumentError):
    code = "command_not_applicable"
