"""Nonnegative-infinity-aware reals: a finite float or ``+inf``.

``-inf`` and NaN are never constructed.  Multiplication follows the
measure-theoretic convention ``0 * inf = 0``.
"""

from __future__ import annotations

import math
from functools import total_ordering


@total_ordering
class ExtendedReal:
    __slots__ = ("_value",)

    def __init__(self, value=0.0):
        if isinstance(value, ExtendedReal):
            value = value._value
        v = float(value)
        if math.isnan(v):
            raise ValueError("ExtendedReal cannot be NaN")
        if v == -math.inf:
            raise ValueError("ExtendedReal cannot be -inf")
        self._value = v

    @classmethod
    def inf(cls) -> "ExtendedReal":
        return cls(math.inf)

    @property
    def value(self) -> float:
        return self._value

    @property
    def is_finite(self) -> bool:
        return self._value != math.inf

    @property
    def is_inf(self) -> bool:
        return self._value == math.inf

    def __float__(self) -> float:
        return self._value

    def __add__(self, other):
        return ExtendedReal(self._value + float(ExtendedReal(other)))

    __radd__ = __add__

    def __sub__(self, other):
        other = ExtendedReal(other)
        if other.is_inf:
            raise ValueError("subtracting +inf is undefined for ExtendedReal")
        return ExtendedReal(self._value - other._value)

    def __mul__(self, c):
        """Scale by a real ``c``; ``0 * inf = 0`` and ``c * inf = inf`` for ``c > 0``."""
        if isinstance(c, ExtendedReal):
            if c.is_inf:
                return c * self._value
            c = c._value
        c = float(c)
        if self.is_inf:
            if c == 0.0:
                return ExtendedReal(0.0)
            if c < 0.0:
                raise ValueError("negative multiple of +inf is not representable")
            return self
        return ExtendedReal(self._value * c)

    __rmul__ = __mul__

    def __neg__(self):
        return ExtendedReal(-self._value)

    def __eq__(self, other):
        if isinstance(other, (ExtendedReal, int, float)):
            return self._value == float(other)
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (ExtendedReal, int, float)):
            return self._value < float(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._value)

    def isclose(self, other, tol: float = 1e-9, rel: bool = True) -> bool:
        """Both ``+inf``, or both finite and within ``tol`` (scaled by
        ``max(1, |value|)`` when ``rel``)."""
        other = ExtendedReal(other)
        if self.is_inf or other.is_inf:
            return self.is_inf and other.is_inf
        scale = max(1.0, abs(self._value), abs(other._value)) if rel else 1.0
        return abs(self._value - other._value) <= tol * scale

    def __repr__(self):
        return "ExtendedReal(inf)" if self.is_inf else f"ExtendedReal({self._value!r})"

    def __str__(self):
        return "inf" if self.is_inf else repr(self._value)

    def format(self, digits: int = 12) -> str:
        return "inf" if self.is_inf else f"{self._value:.{digits}g}"


INF = ExtendedReal.inf()


def deviation(x, y) -> float:
    """``|x - y|`` under ExtendedReal semantics: 0 when both are infinite,
    ``inf`` when exactly one is."""
    x, y = ExtendedReal(x), ExtendedReal(y)
    if x.is_inf and y.is_inf:
        return 0.0
    if x.is_inf or y.is_inf:
        return math.inf
    return abs(x.value - y.value)


def ext_sum(terms) -> ExtendedReal:
    """Sum of ExtendedReals; finite parts are accumulated with ``math.fsum``."""
    terms = [ExtendedReal(t) for t in terms]
    if any(t.is_inf for t in terms):
        return INF
    return ExtendedReal(math.fsum(t.value for t in terms))
