"""Log-domain and exact-arithmetic helpers.

All magnitudes that can overflow (weights k^{a j}, sphere sizes k^r, pair
measures) are carried as base-k logarithms. Exact quantities are Python ints
or Fractions and are only converted to logs at the boundary.
"""

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

import numpy as np
from scipy.special import logsumexp

Number = Union[int, float, Fraction]

NEG_INF = float("-inf")


def as_fraction(value: Number) -> Fraction:
    """Convert a number to a Fraction, reading floats by their decimal repr.

    `as_fraction(1.2)` is 6/5, not the binary expansion of 1.2.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Cannot convert {value} to a fraction")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def logk(value: Number, k: int) -> float:
    """Base-k logarithm of a nonnegative int, Fraction or float (-inf at 0).

    Works on arbitrarily large ints and Fractions without overflow.
    """
    if value < 0:
        raise ValueError(f"logk of a negative value: {value}")
    if value == 0:
        return NEG_INF
    if isinstance(value, Fraction):
        return (math.log(value.numerator) - math.log(value.denominator)) / math.log(k)
    return math.log(value) / math.log(k)


def logk_sum(terms: Iterable[float], k: int) -> float:
    """Return log_k(sum_t k**t) for base-k log terms, stably.

    A single term is returned unchanged, so exact log values survive.
    """
    values = np.asarray([t for t in terms if t != NEG_INF], dtype=float)
    if values.size == 0:
        return NEG_INF
    top = float(values.max())
    if top == float("inf"):
        return top
    if values.size == 1:
        return top
    ln_k = math.log(k)
    return top + float(logsumexp((values - top) * ln_k)) / ln_k


def k_pow(exponent: float, k: int) -> float:
    """k**exponent as a float, saturating to inf instead of raising."""
    try:
        return float(k) ** exponent
    except OverflowError:
        return float("inf")


def fit_slope(xs, ys, tail_fraction: float = 2 / 3) -> float:
    """Least-squares slope of ys against xs over the last `tail_fraction` of the points.

    Non-finite points are dropped; fewer than two remaining points give 0.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    start = int(round(len(x) * (1 - tail_fraction)))
    x, y = x[start:], y[start:]
    keep = np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])
