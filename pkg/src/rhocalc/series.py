"""Truncated Levi-Civita arithmetic.

An :class:`LCNumber` is a finite sparse series  sum_q  c_q * rho^q  with
rational exponents q and coefficients in an ordered backend, together
with a truncation *horizon* h: coefficients at exponents >= h are
unknown.  Exact inputs carry horizon +infinity; each arithmetic
operation propagates the tightest horizon it can soundly certify.

Two backends are provided: ``'rational'`` (exact Fractions) and
``'float'`` (complex floats with a relative dust threshold that sweeps
away roundoff terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .errors import BackendError, DivisionByZero, OrderError

INF = Fraction(10**9)  # sentinel horizon:  +infinity (exact series)
DUST_REL = 1e-13       # float backend: relative magnitude below which a
                       # coefficient is treated as accumulated roundoff

Exponent = Fraction
Coefficient = Union[Fraction, complex, float, int]


def _as_exp(q) -> Fraction:
    return q if isinstance(q, Fraction) else Fraction(q)


class Backend(Enum):
    RATIONAL = "rational"
    FLOAT = "float"


def _coerce_backend(b) -> Backend:
    if isinstance(b, Backend):
        return b
    try:
        return Backend(b)
    except ValueError:
        raise BackendError(f"unknown backend {b!r}")


def _check_coeff(c, backend: Backend):
    if backend is Backend.RATIONAL:
        if isinstance(c, Fraction):
            return c
        if isinstance(c, int):
            return Fraction(c)
        raise BackendError(f"rational backend needs Fraction/int coefficients, got {type(c).__name__}")
    if isinstance(c, (int, float, complex, Fraction)):
        return complex(c)
    raise BackendError(f"float backend cannot accept {type(c).__name__} coefficients")


class Sign(Enum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class Kind(Enum):
    ZERO = "Zero"
    INFINITESIMAL = "Infinitesimal"
    FINITE = "FiniteNonInfinitesimal"
    INFINITE = "Infinite"


@dataclass(frozen=True)
class ExtendedScalar:
    """Value of the standard part map: a backend scalar, +/-infinity, or
    the complex-infinite marker."""

    value: Optional[Coefficient] = None
    infinite: bool = False
    sign: int = 0          # +1 / -1 for real infinities, 0 for complex infinite

    @staticmethod
    def finite(v) -> "ExtendedScalar":
        return ExtendedScalar(value=v)

    @staticmethod
    def pos_inf() -> "ExtendedScalar":
        return ExtendedScalar(infinite=True, sign=1)

    @staticmethod
    def neg_inf() -> "ExtendedScalar":
        return ExtendedScalar(infinite=True, sign=-1)

    @staticmethod
    def complex_inf() -> "ExtendedScalar":
        return ExtendedScalar(infinite=True, sign=0)

    def __repr__(self):
        if not self.infinite:
            return f"ExtendedScalar({self.value!r})"
        return {1: "ExtendedScalar(+inf)", -1: "ExtendedScalar(-inf)",
                0: "ExtendedScalar(complex-inf)"}[self.sign]


class LCNumber:
    """Sparse truncated series over the scale rho, ordered by exponent."""

    __slots__ = ("terms", "horizon", "backend")

    def __init__(self, terms: Union[Mapping, Iterable, None] = None,
                 horizon=INF, backend="float", _trusted=False):
        backend = _coerce_backend(backend)
        horizon = _as_exp(horizon) if horizon != INF else INF
        if _trusted:
            self.terms = tuple(terms)
            self.horizon = horizon
            self.backend = backend
            return
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        acc: dict = {}
        for q, c in items:
            q = _as_exp(q)
            c = _check_coeff(c, backend)
            if q < horizon:
                acc[q] = acc.get(q, 0) + c
        cleaned = [(q, c) for q, c in acc.items() if c != 0]
        cleaned.sort(key=lambda t: t[0])
        self.terms = tuple(cleaned)
        self.horizon = horizon
        self.backend = backend

    # -- construction helpers ----------------------------------------
    @classmethod
    def from_scalar(cls, c, backend="float") -> "LCNumber":
        return cls({Fraction(0): c}, backend=backend)

    @classmethod
    def rho(cls, q=1, backend="float") -> "LCNumber":
        return cls({_as_exp(q): Fraction(1) if _coerce_backend(backend) is Backend.RATIONAL else 1.0},
                   backend=backend)

    @classmethod
    def zero(cls, backend="float") -> "LCNumber":
        return cls({}, backend=backend)

    def _make(self, terms, horizon) -> "LCNumber":
        return LCNumber(terms, horizon=horizon, backend=self.backend)

    def coefficient(self, q) -> Coefficient:
        """Coefficient at exponent q; raises if q is beyond the horizon."""
        q = _as_exp(q)
        if q >= self.horizon:
            raise OrderError(f"exponent {q} is at or beyond the horizon {self.horizon}")
        for p, c in self.terms:
            if p == q:
                return c
        return Fraction(0) if self.backend is Backend.RATIONAL else 0j

    def support(self) -> Tuple[Fraction, ...]:
        return tuple(q for q, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def truncate(self, h) -> "LCNumber":
        h = _as_exp(h) if h != INF else INF
        h = min(h, self.horizon)
        return self._make([(q, c) for q, c in self.terms if q < h], h)

    # -- valuation ----------------------------------------------------
    def valuation(self) -> Fraction:
        """Least support exponent; INF for (observed) zero."""
        return self.terms[0][0] if self.terms else INF

    def leading_coefficient(self) -> Coefficient:
        if not self.terms:
            raise DivisionByZero("zero series has no leading coefficient")
        return self.terms[0][1]

    def vnorm(self) -> float:
        """Valuation norm e^{-v}; 0 for zero."""
        v = self.valuation()
        return 0.0 if v == INF else math.exp(-float(v))

    # -- ring operations ----------------------------------------------
    def _join(self, other: "LCNumber") -> "LCNumber":
        if not isinstance(other, LCNumber):
            other = LCNumber.from_scalar(other, backend=self.backend)
        if other.backend is not self.backend:
            raise BackendError(f"mixed backends: {self.backend.value} vs {other.backend.value}")
        return other

    def __add__(self, other) -> "LCNumber":
        other = self._join(other)
        h = min(self.horizon, other.horizon)
        if self.backend is Backend.RATIONAL:
            return self._make(list(self.terms) + list(other.terms), h)
        # float backend: cancellation at an exponent leaves roundoff debris;
        # a coefficient tiny relative to what was summed there is noise
        acc: dict = {}
        mag: dict = {}
        for q, c in list(self.terms) + list(other.terms):
            if q < h:
                acc[q] = acc.get(q, 0j) + c
                mag[q] = max(mag.get(q, 0.0), abs(c))
        return self._make([(q, c) for q, c in acc.items()
                           if abs(c) > DUST_REL * mag[q]], h)

    __radd__ = __add__

    def __neg__(self) -> "LCNumber":
        return self._make([(q, -c) for q, c in self.terms], self.horizon)

    def __sub__(self, other) -> "LCNumber":
        return self + (-self._join(other))

    def __rsub__(self, other) -> "LCNumber":
        return (-self) + self._join(other)

    def __mul__(self, other) -> "LCNumber":
        other = self._join(other)
        # horizon: unknown tail of one factor meets the leading term of the
        # other, so the product is sound up to min(h1+v2, h2+v1).
        v1, v2 = self.valuation(), other.valuation()
        h = INF
        if self.horizon != INF:
            h = min(h, self.horizon + (v2 if v2 != INF else 0))
        if other.horizon != INF:
            h = min(h, other.horizon + (v1 if v1 != INF else 0))
        if self.is_zero() or other.is_zero():
            return self._make([], h)
        acc: dict = {}
        mag: dict = {}
        for q1, c1 in self.terms:
            for q2, c2 in other.terms:
                q = q1 + q2
                if q < h:
                    p = c1 * c2
                    acc[q] = acc.get(q, 0) + p
                    mag[q] = max(mag.get(q, 0.0), abs(p)) if self.backend is Backend.FLOAT else 0.0
        if self.backend is Backend.RATIONAL:
            return self._make(acc, h)
        return self._make([(q, c) for q, c in acc.items()
                           if abs(c) > DUST_REL * mag[q]], h)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LCNumber":
        if not isinstance(n, int):
            raise OrderError("integer powers only; use closure.nth_root for radicals")
        if n < 0:
            from .closure import inverse
            return inverse(self) ** (-n)
        out = LCNumber.from_scalar(
            Fraction(1) if self.backend is Backend.RATIONAL else 1.0, backend=self.backend)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __truediv__(self, other) -> "LCNumber":
        from .closure import inverse
        return self * inverse(self._join(other))

    def __rtruediv__(self, other) -> "LCNumber":
        from .closure import inverse
        return self._join(other) * inverse(self)

    # -- equality and order --------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float, complex, Fraction)):
            other = LCNumber.from_scalar(other, backend=self.backend)
        if not isinstance(other, LCNumber):
            return NotImplemented
        d = self - other
        return not d.terms  # agreement on the joint observable window

    def __hash__(self):
        return hash((self.terms, self.backend))

    def sign(self) -> Sign:
        """Sign of the leading coefficient (rational backend order)."""
        if self.backend is not Backend.RATIONAL:
            raise BackendError("ordering is defined on the rational backend only")
        if not self.terms:
            return Sign.ZERO
        return Sign.POSITIVE if self.terms[0][1] > 0 else Sign.NEGATIVE

    def __lt__(self, other):
        other = self._join(other)
        return (self - other).sign() is Sign.NEGATIVE

    def __le__(self, other):
        other = self._join(other)
        return (self - other).sign() is not Sign.POSITIVE

    def __gt__(self, other):
        return self._join(other) < self

    def __ge__(self, other):
        return self._join(other) <= self

    def abs(self) -> "LCNumber":
        """|x| in the ordered (rational) field sense."""
        return -self if self.sign() is Sign.NEGATIVE else self

    # -- classification -------------------------------------------------
    def kind(self) -> Kind:
        v = self.valuation()
        if v == INF:
            return Kind.ZERO
        if v > 0:
            return Kind.INFINITESIMAL
        if v == 0:
            return Kind.FINITE
        return Kind.INFINITE

    def is_infinitesimal(self) -> bool:
        return self.kind() in (Kind.ZERO, Kind.INFINITESIMAL)

    def is_finite(self) -> bool:
        return self.valuation() >= 0

    def standard_part(self) -> ExtendedScalar:
        """Coefficient at exponent 0, extended to +/-inf on infinite input."""
        k = self.kind()
        if k is Kind.INFINITE:
            if self.backend is Backend.RATIONAL:
                lead = self.leading_coefficient()
                return ExtendedScalar.pos_inf() if lead > 0 else ExtendedScalar.neg_inf()
            return ExtendedScalar.complex_inf()
        if k in (Kind.ZERO, Kind.INFINITESIMAL):
            if Fraction(0) >= self.horizon:
                raise OrderError("standard part not observable: horizon <= 0")
            z = Fraction(0) if self.backend is Backend.RATIONAL else 0j
            return ExtendedScalar.finite(z)
        return ExtendedScalar.finite(self.coefficient(0))

    def same_monad(self, other) -> bool:
        """x ~ y iff x - y is infinitesimal (finite-part equivalence)."""
        return (self - self._join(other)).is_infinitesimal()

    def same_galaxy(self, other) -> bool:
        """x ~ y iff x - y is finite."""
        return (self - self._join(other)).is_finite()

    # -- presentation -----------------------------------------------------
    def __repr__(self):
        h = "inf" if self.horizon == INF else str(self.horizon)
        return f"LCNumber({format_lc(self)!r}, horizon={h}, backend={self.backend.value!r})"


def format_lc(x: LCNumber) -> str:
    """Canonical text form: ``3*r^-2 + 1 + 5*r^(1/2)`` (ascending exponents)."""
    if not x.terms:
        return "0"
    parts = []
    for q, c in x.terms:
        if isinstance(c, complex):
            cs = repr(c.real) if c.imag == 0 else f"({c.real}{c.imag:+}j)"
        else:
            cs = str(c) if (isinstance(c, Fraction) and c.denominator == 1) or not isinstance(c, Fraction) \
                else f"({c})"
        if q == 0:
            parts.append(cs)
        else:
            qs = str(q) if q.denominator == 1 else f"({q})"
            parts.append(f"r^{qs}" if cs == "1" else f"{cs}*r^{qs}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Finite-dimensional vectors over the field
# ---------------------------------------------------------------------------

class LCVector:
    """Fixed-length tuple of LCNumbers with the sup valuation norm."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[LCNumber]):
        entries = tuple(entries)
        if not entries:
            raise OrderError("empty vector")
        b = entries[0].backend
        for e in entries:
            if not isinstance(e, LCNumber) or e.backend is not b:
                raise BackendError("vector entries must be LCNumbers on one backend")
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __add__(self, other: "LCVector") -> "LCVector":
        if len(other) != len(self):
            raise OrderError("dimension mismatch")
        return LCVector([a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "LCVector") -> "LCVector":
        if len(other) != len(self):
            raise OrderError("dimension mismatch")
        return LCVector([a - b for a, b in zip(self.entries, other.entries)])

    def scale(self, a: LCNumber) -> "LCVector":
        return LCVector([a * e for e in self.entries])

    def valuation(self) -> Fraction:
        return min(e.valuation() for e in self.entries)

    def vnorm(self) -> float:
        v = self.valuation()
        return 0.0 if v == INF else math.exp(-float(v))

    def __repr__(self):
        return f"LCVector([{', '.join(format_lc(e) for e in self.entries)}])"
