from fractions import Fraction
from functools import lru_cache
from math import comb


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with the convention B_1 = -1/2."""
    table = [Fraction(1)]
    for m in range(1, n + 1):
        table.append(-sum(comb(m + 1, k) * table[k] for k in range(m)) / (m + 1))
    return table[n]


@lru_cache(maxsize=None)
def even_bernoulli_floats(count: int) -> tuple:
    """(B_2, B_4, ..., B_{2*count}) as floats."""
    return tuple(float(bernoulli(2 * k)) for k in range(1, count + 1))
