"""Sparse Laurent polynomials in one variable over exact rationals."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping


class NonExactDivision(ArithmeticError):
    """Raised when a Laurent division leaves a nonzero remainder."""


class LaurentPoly:
    """Immutable Laurent polynomial ``sum c_k t**k`` with Fraction coefficients.

    Coefficients are kept in a dict keyed by exponent; zero coefficients are
    never stored, so structural equality is polynomial equality.
    """

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v:
                    c[int(k)] = v
        self._c = c
        self._hash = None

    # construction helpers

    @classmethod
    def const(cls, value) -> "LaurentPoly":
        return cls({0: value})

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @classmethod
    def t(cls) -> "LaurentPoly":
        return cls({1: 1})

    @classmethod
    def from_dense(cls, coeffs: Iterable, low: int = 0) -> "LaurentPoly":
        return cls({low + i: c for i, c in enumerate(coeffs)})

    @classmethod
    def _coerce(cls, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Rational)):
            return cls.const(other)
        return NotImplemented

    # basic accessors

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self) -> bool:
        return bool(self._c)

    @property
    def min_degree(self) -> int:
        if not self._c:
            raise ValueError("zero polynomial has no degree")
        return min(self._c)

    @property
    def max_degree(self) -> int:
        if not self._c:
            raise ValueError("zero polynomial has no degree")
        return max(self._c)

    def __getitem__(self, k: int) -> Fraction:
        return self._c.get(k, Fraction(0))

    # ring operations

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self._c.items()})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return LaurentPoly(c)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        c: dict[int, Fraction] = {}
        for i, a in self._c.items():
            for j, b in other._c.items():
                c[i + j] = c.get(i + j, 0) + a * b
        return LaurentPoly(c)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._c) != 1:
                raise ValueError("only monomials have Laurent inverses")
            (k, v), = self._c.items()
            return LaurentPoly({k * n: Fraction(1) / v ** (-n)})
        out = LaurentPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, divisor: "LaurentPoly") -> tuple["LaurentPoly", "LaurentPoly"]:
        """Long division by ``divisor``, ordered from the top degree down.

        The remainder has max degree below ``divisor.max_degree`` after
        shifting both operands so the divisor's lowest term sits at t**0.
        """
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero Laurent polynomial")
        shift = divisor.min_degree
        d = divisor.shift(-shift)
        lead_k = d.max_degree
        lead_c = d[lead_k]
        rem = dict(self._c)
        quo: dict[int, Fraction] = {}
        while rem:
            top = max(rem)
            low = min(rem)
            if top - low < lead_k:
                break
            coef = rem[top] / lead_c
            k = top - lead_k
            quo[k] = coef
            for j, v in d._c.items():
                e = k + j
                nv = rem.get(e, 0) - coef * v
                if nv:
                    rem[e] = nv
                else:
                    rem.pop(e, None)
        return LaurentPoly(quo).shift(-shift), LaurentPoly(rem)

    def exact_div(self, divisor) -> "LaurentPoly":
        q, r = self.divmod(self._coerce(divisor))
        if not r.is_zero():
            raise NonExactDivision(f"{self} is not divisible by {divisor}; remainder {r}")
        return q

    def shift(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e + k: v for e, v in self._c.items()})

    # evaluation / comparison

    def __call__(self, t):
        if isinstance(t, int):
            t = Fraction(t)
        total = Fraction(0) if isinstance(t, Fraction) else 0.0
        for k, v in self._c.items():
            total += (v if isinstance(t, Fraction) else float(v)) * t ** k
        return total

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for k in sorted(self._c):
            v = self._c[k]
            if k == 0:
                parts.append(f"{v}")
            elif k == 1:
                parts.append(f"{v}*t")
            else:
                parts.append(f"{v}*t^{k}")
        return " + ".join(parts)

    # serialization: {exponent: "num/den"}

    def to_json(self) -> dict[str, str]:
        return {str(k): str(v) for k, v in sorted(self._c.items())}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "LaurentPoly":
        return cls({int(k): Fraction(v) for k, v in data.items()})
