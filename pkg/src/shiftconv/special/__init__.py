"""Complex special functions with tracked absolute error."""

from ._values import Method, QuadratureBudget, SpecialValue
from .bessel import bessel_k, bessel_k_array, bessel_k_imag_order, kuznetsov_geometric_integral
from .gamma import digamma, gamma_c, loggamma
from .whittaker import whittaker_w
from .zeta import hurwitz_zeta, l_chi4, l_chi4_star, zeta_c, zeta_star

__all__ = [
    "Method",
    "QuadratureBudget",
    "SpecialValue",
    "bessel_k",
    "bessel_k_array",
    "bessel_k_imag_order",
    "digamma",
    "gamma_c",
    "hurwitz_zeta",
    "kuznetsov_geometric_integral",
    "l_chi4",
    "l_chi4_star",
    "loggamma",
    "whittaker_w",
    "zeta_c",
    "zeta_star",
]
