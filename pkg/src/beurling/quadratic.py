"""Exact arithmetic in Q(sqrt D): numbers p + q*sqrt(D) with rational p, q."""

from __future__ import annotations

import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import total_ordering

_Rational = int | Fraction


def _squarefree_part(d: int) -> tuple[int, int]:
    """Write d = s^2 * r with r squarefree; return (s, r)."""
    s, r = 1, d
    f = 2
    while f * f <= r:
        while r % (f * f) == 0:
            r //= f * f
            s *= f
        f += 1
    return s, r


@total_ordering
class QuadraticIrrational:
    """The number ``p + q*sqrt(D)``.

    ``D`` is normalised to be squarefree; ``D == 1`` (or ``q == 0``) means the
    value is rational. Ordering and sign tests are exact.
    """

    __slots__ = ("p", "q", "D")

    def __init__(self, p: _Rational = 0, q: _Rational = 0, D: int = 2) -> None:
        if D < 1:
            raise ValueError(f"D must be a positive integer, got {D}")
        s, r = _squarefree_part(int(D))
        p, q = Fraction(p), Fraction(q) * s
        if r == 1:
            p, q = p + q, Fraction(0)
        self.p: Fraction = p
        self.q: Fraction = q
        self.D: int = r

    @classmethod
    def parse(cls, text: str) -> QuadraticIrrational:
        """Parse ``"sqrt2"``, ``"3*sqrt5"``, ``"1/2+1/2*sqrt5"``, ``"1-sqrt2"`` or a rational."""
        s = text.replace(" ", "").lower()
        m = re.fullmatch(
            r"(?:(?P<p>[+-]?[\d./]+)(?=[+-]))?(?P<q>[+-]?(?:[\d./]+\*?)?)sqrt\(?(?P<d>\d+)\)?", s
        )
        if m is None:
            return cls(Fraction(s), 0)
        p = Fraction(m.group("p")) if m.group("p") else Fraction(0)
        qs = m.group("q").rstrip("*")
        if qs in ("", "+"):
            q = Fraction(1)
        elif qs == "-":
            q = Fraction(-1)
        else:
            q = Fraction(qs)
        return cls(p, q, int(m.group("d")))

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def conjugate(self) -> QuadraticIrrational:
        return QuadraticIrrational(self.p, -self.q, self.D)

    def sign(self) -> int:
        """Exact sign of p + q*sqrt(D)."""
        sp = (self.p > 0) - (self.p < 0)
        sq = (self.q > 0) - (self.q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with q^2 D
        lhs, rhs = self.p * self.p, self.q * self.q * self.D
        if lhs == rhs:
            return 0
        return sp if lhs > rhs else sq

    def _coerce(self, other) -> QuadraticIrrational:
        if isinstance(other, QuadraticIrrational):
            if other.q != 0 and self.q != 0 and other.D != self.D:
                raise ValueError("mixing different quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticIrrational(other, 0, self.D)
        return NotImplemented

    def _field(self, other: QuadraticIrrational) -> int:
        return self.D if self.q != 0 else other.D

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticIrrational(self.p + o.p, self.q + o.q, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.p, -self.q, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        D = self._field(o)
        return QuadraticIrrational(self.p * o.p + self.q * o.q * D, self.p * o.q + self.q * o.p, D)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return (self - o).sign() == 0

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self) -> int:
        return hash((self.p, self.q, self.D if self.q else 1))

    def __float__(self) -> float:
        if self.q == 0:
            return float(self.p)
        # 50 significant digits, then a single rounding to double
        with localcontext() as ctx:
            ctx.prec = 50
            v = (Decimal(self.p.numerator) / self.p.denominator
                 + Decimal(self.q.numerator) / self.q.denominator * Decimal(self.D).sqrt())
        return float(v)

    def __repr__(self) -> str:
        if self.q == 0:
            return f"QuadraticIrrational({self.p})"
        return f"QuadraticIrrational({self.p}, {self.q}, D={self.D})"

    def __str__(self) -> str:
        if self.q == 0:
            return str(self.p)
        q = "" if self.q == 1 else "-" if self.q == -1 else f"{self.q}*"
        core = f"{q}sqrt{self.D}"
        if self.p == 0:
            return core
        return f"{self.p}{'' if core.startswith('-') else '+'}{core}"
