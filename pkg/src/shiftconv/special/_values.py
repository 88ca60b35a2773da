from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..errors import ContractViolation


class Method(str, enum.Enum):
    STIRLING = "stirling"
    REFLECTION = "stirling+reflection"
    EULER_MACLAURIN = "euler-maclaurin"
    HURWITZ_SPLIT = "hurwitz-split"
    COMPLETED = "completed"
    TRAPEZOID_COSH = "trapezoid-cosh"
    UNDERFLOW = "underflow"
    CLOSED_FORM = "closed-form"
    EXP_SINH = "exp-sinh"
    MELLIN_BARNES = "mellin-barnes"
    ARC_GAUSS_LEGENDRE = "arc-gauss-legendre"


@dataclass(frozen=True)
class SpecialValue:
    """A computed value with an estimate of its absolute error."""

    value: complex
    abs_error_estimate: float
    method: Method

    def __post_init__(self):
        err = self.abs_error_estimate
        if not (math.isfinite(err) and err >= 0):
            raise ContractViolation(f"error estimate must be finite and >= 0, got {err}")

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(self.value.real if isinstance(self.value, complex) else self.value)

    @property
    def real(self):
        return complex(self.value).real

    @property
    def imag(self):
        return complex(self.value).imag


@dataclass(frozen=True)
class QuadratureBudget:
    """Node and accuracy limits for one quadrature.

    ``abscissa`` and ``height`` describe a vertical Mellin-Barnes line; they
    are ignored by rules on real intervals.
    """

    max_nodes: int = 2_000_000
    target_abs_error: float = 1e-14
    abscissa: float | None = None
    height: float | None = None

    def __post_init__(self):
        if not self.target_abs_error > 0:
            raise ContractViolation("target_abs_error must be positive")
        if self.max_nodes < 16:
            raise ContractViolation("max_nodes must be at least 16")
