"""Truncated univariate power series over exact rationals or binary64.

Every series carries its truncation order ``N`` (coefficients of ``z^0..z^N``)
and a field tag. Binary operations truncate to the smaller order. ``exp``,
``log`` and ``pow`` use first-order coefficient recurrences, so they cost
``O(N^2)`` coefficient operations and introduce no rounding in rational mode.
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import factorial
from numbers import Number
from typing import Iterable, Sequence

from ..errors import DomainError

RATIONAL = "rational"
BINARY64 = "binary64"


def _coerce(x, exact: bool):
    if exact:
        if isinstance(x, float):
            raise TypeError("float coefficient in a rational-mode series")
        return Fraction(x)
    return float(x)


class PowerSeries:
    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Iterable, order: int | None = None, exact: bool = True):
        cs = list(coeffs)
        if order is not None:
            cs = cs[: order + 1] + [0] * max(0, order + 1 - len(cs))
        if not cs:
            raise DomainError("a power series needs at least one coefficient")
        self.exact = exact
        self.coeffs = tuple(_coerce(c, exact) for c in cs)

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int, exact: bool = True) -> "PowerSeries":
        return cls([value], order, exact)

    @classmethod
    def variable(cls, order: int, exact: bool = True, scale=1) -> "PowerSeries":
        """The series ``scale * z``."""
        return cls([0, scale], order, exact)

    def _new(self, coeffs) -> "PowerSeries":
        out = PowerSeries.__new__(PowerSeries)
        out.exact = self.exact
        out.coeffs = tuple(coeffs)
        return out

    # -- basic protocol ---------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def field(self) -> str:
        return RATIONAL if self.exact else BINARY64

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n: int):
        if n < 0:
            raise IndexError(n)
        if n > self.order:
            raise IndexError(f"coefficient {n} beyond truncation order {self.order}")
        return self.coeffs[n]

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"PowerSeries([{head}{more}], order={self.order}, field={self.field})"

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        return self.coeffs == other.coeffs and self.exact == other.exact

    __hash__ = None

    def to_float(self) -> "PowerSeries":
        return PowerSeries([float(c) for c in self.coeffs], exact=False)

    def truncate(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coeffs, order, self.exact)

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _lift(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            if other.exact != self.exact:
                raise TypeError("cannot mix rational and binary64 series")
            return other
        if isinstance(other, Number):
            return PowerSeries.constant(other, self.order, self.exact)
        return NotImplemented

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order) + 1
        return self._new(a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n]))

    __radd__ = __add__

    def __neg__(self):
        return self._new(-a for a in self.coeffs)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number) and not isinstance(other, PowerSeries):
            c = _coerce(other, self.exact)
            return self._new(a * c for a in self.coeffs)
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = self._zero()
            for i in range(k + 1):
                ai = a[i]
                if ai:
                    acc += ai * b[k - i]
            out.append(acc)
        return self._new(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number) and not isinstance(other, PowerSeries):
            c = _coerce(other, self.exact)
            return self._new(a / c for a in self.coeffs)
        return self * other.reciprocal()

    def __pow__(self, s):
        return series_pow(self, s)

    def reciprocal(self) -> "PowerSeries":
        f = self.coeffs
        if not f[0]:
            raise DomainError("reciprocal of a series with zero constant term")
        g = [1 / f[0] if not self.exact else Fraction(1) / f[0]]
        for n in range(1, len(f)):
            acc = self._zero()
            for k in range(1, n + 1):
                acc += f[k] * g[n - k]
            g.append(-acc / f[0])
        return self._new(g)

    # -- calculus ---------------------------------------------------------
    def derivative(self) -> "PowerSeries":
        """Derivative; the top coefficient is lost, so the order drops by one."""
        if self.order == 0:
            return self._new([self._zero()])
        return self._new(k * self.coeffs[k] for k in range(1, len(self.coeffs)))

    def integral(self, constant=0) -> "PowerSeries":
        c = [_coerce(constant, self.exact)]
        c += [a / (k + 1) for k, a in enumerate(self.coeffs)]
        return self._new(c)

    def shift(self, k: int) -> "PowerSeries":
        """Multiply by ``z^k`` keeping the truncation order."""
        if k < 0:
            raise DomainError("negative shift")
        z = self._zero()
        return self._new(([z] * k + list(self.coeffs))[: len(self.coeffs)])

    def scale(self, s) -> "PowerSeries":
        """``F(s z)``."""
        s = _coerce(s, self.exact)
        out, p = [], _coerce(1, self.exact)
        for a in self.coeffs:
            out.append(a * p)
            p *= s
        return self._new(out)

    def exp(self) -> "PowerSeries":
        f = self.coeffs
        if self.exact:
            if f[0] != 0:
                raise DomainError("exact exp needs a zero constant term")
            g = [Fraction(1)]
        else:
            import math

            g = [math.exp(f[0])]
        for n in range(1, len(f)):
            acc = self._zero()
            for k in range(1, n + 1):
                acc += k * f[k] * g[n - k]
            g.append(acc / n)
        return self._new(g)

    def log(self) -> "PowerSeries":
        f = self.coeffs
        if self.exact:
            if f[0] != 1:
                raise DomainError("exact log needs constant term 1")
            c0 = Fraction(0)
        else:
            import math

            if f[0] <= 0:
                raise DomainError("log of a series with nonpositive constant term")
            c0 = math.log(f[0])
        # L' F = F'
        lp = []
        for n in range(len(f) - 1):
            acc = (n + 1) * f[n + 1]
            for k in range(1, n + 1):
                acc -= f[k] * lp[n - k]
            lp.append(acc / f[0])
        return self._new([c0] + [lp[n] / (n + 1) for n in range(len(lp))])

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """``F(G(z))`` for ``G(0) = 0`` by Horner's rule."""
        inner = self._lift(inner)
        if inner.coeffs[0]:
            raise DomainError("composition needs an inner series with zero constant term")
        order = min(self.order, inner.order)
        acc = PowerSeries.constant(self.coeffs[order], order, self.exact)
        inner = inner.truncate(order)
        for a in reversed(self.coeffs[:order]):
            acc = acc * inner + a
        return acc

    def evaluate(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        if self.exact:
            coeffs = [f"{c.numerator}/{c.denominator}" for c in self.coeffs]
        else:
            coeffs = list(self.coeffs)
        return {"order": self.order, "field": self.field, "coeffs": coeffs}

    @classmethod
    def from_json(cls, obj: dict | str) -> "PowerSeries":
        if isinstance(obj, str):
            obj = json.loads(obj)
        field = obj["field"]
        if field not in (RATIONAL, BINARY64):
            raise DomainError(f"unknown field tag {field!r}")
        coeffs = obj["coeffs"]
        if len(coeffs) != obj["order"] + 1:
            raise DomainError("coefficient count does not match the order")
        if field == RATIONAL:
            return cls([Fraction(c) for c in coeffs], exact=True)
        return cls([float(c) for c in coeffs], exact=False)


def polynomial(coeffs: Sequence, order: int, exact: bool = True) -> PowerSeries:
    return PowerSeries(coeffs, order, exact)


def series_pow(F: PowerSeries, s) -> PowerSeries:
    """``F ** s`` from the recurrence ``(F^s)' F = s F' F^s``.

    In rational mode ``s`` must be rational; a non-integer power additionally
    needs ``F(0) = 1`` so the result stays rational.
    """
    f = F.coeffs
    if not f[0]:
        raise DomainError("power of a series with zero constant term")
    if F.exact:
        if isinstance(s, float):
            if not s.is_integer():
                raise TypeError("rational-mode power needs a rational exponent")
            s = int(s)
        s = Fraction(s)
        if s.denominator == 1:
            g0 = f[0] ** s.numerator
        elif f[0] == 1:
            g0 = Fraction(1)
        else:
            raise DomainError("exact non-integer power needs constant term 1")
    else:
        s = float(s)
        if f[0] < 0 and not s.is_integer():
            raise DomainError("non-integer power of a series with negative constant term")
        g0 = f[0] ** s
    g = [g0]
    for n in range(1, len(f)):
        acc = F._zero()
        for k in range(1, n + 1):
            fk = f[k]
            if fk:
                acc += (s * k - (n - k)) * fk * g[n - k]
        g.append(acc / (n * f[0]))
    return F._new(g)


def cayley_series(N: int, exact: bool = True) -> PowerSeries:
    """Rooted labelled trees: coefficient of ``z^n`` is ``n^(n-1) / n!``."""
    if N < 1:
        raise DomainError("truncation order must be >= 1")
    coeffs = [0] + [Fraction(n ** (n - 1), factorial(n)) for n in range(1, N + 1)]
    return PowerSeries(coeffs, exact=exact) if exact else PowerSeries([float(c) for c in coeffs], exact=False)
