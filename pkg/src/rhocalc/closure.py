"""Algebraic and analytic closure operations on truncated series.

Multiplicative inverses and n-th roots are computed by factoring out the
leading monomial and summing the geometric/binomial series in the
remaining infinitesimal.  Polynomial root finding lifts first-order
(Newton polygon) data to full series roots by Newton iteration, with
recentering recursion for clusters that share a leading term.
Transcendental functions are lifted through their Taylor series around
the standard part.  Cantor completeness is witnessed constructively on
nested interval chains.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (BackendError, DivisionByZero, DomainError, LiftError,
                     OrderError, RootError)
from .series import INF, Backend, Kind, LCNumber, _as_exp

DEFAULT_DEPTH = Fraction(10)  # relative series depth used for exact inputs

# numpy scatters a root of multiplicity m over a disc of radius ~eps^(1/m),
# so clustering must be much coarser than machine precision
_CLUSTER_RTOL = 1e-3
_POLY_DUST = 1e-12
_MAX_RECENTER = 64


def _one(backend: Backend):
    return Fraction(1) if backend is Backend.RATIONAL else 1.0


def _rel_horizon(x: LCNumber, horizon) -> Fraction:
    """Relative working precision: terms of 1 + u are needed below this."""
    v = x.valuation()
    h = x.horizon - v if x.horizon != INF else INF
    if horizon is not None:
        h = min(h, _as_exp(horizon) + v) if h != INF else _as_exp(horizon) + v
    return DEFAULT_DEPTH if h == INF else h


def _split_unit(x: LCNumber) -> Tuple[Fraction, object, LCNumber]:
    """Write x = c * rho^v * (1 + u) and return (v, c, u)."""
    if x.is_zero():
        raise DivisionByZero("zero has no leading monomial")
    v = x.valuation()
    c = x.leading_coefficient()
    cinv = 1 / c if not isinstance(c, Fraction) else Fraction(1) / c
    rest = LCNumber([(q - v, cc * cinv) for q, cc in x.terms[1:]],
                    horizon=(x.horizon - v if x.horizon != INF else INF),
                    backend=x.backend.value)
    return v, c, rest


def _series_in(u: LCNumber, coeffs, H: Fraction) -> LCNumber:
    """Sum coeffs[k] * u^k for infinitesimal u, truncated below exponent H."""
    out = LCNumber.from_scalar(coeffs(0), backend=u.backend.value).truncate(H)
    if u.is_zero():
        return out
    w = u.valuation()
    if w <= 0:
        raise OrderError("series argument must be infinitesimal")
    term = LCNumber.from_scalar(_one(u.backend), backend=u.backend.value)
    k = 0
    while (k + 1) * w < H:
        k += 1
        term = (term * u).truncate(H)
        c = coeffs(k)
        if c != 0:
            out = out + term * LCNumber.from_scalar(c, backend=u.backend.value)
    return out.truncate(H)


def inverse(x: LCNumber, horizon=None) -> LCNumber:
    """1/x.  The result horizon is the soundness bound h - 2v for
    truncated input; exact input gets relative depth ``horizon``
    (default DEFAULT_DEPTH) past the leading exponent."""
    v, c, u = _split_unit(x)
    H = _rel_horizon(x, horizon)
    geom = _series_in(u, lambda k: _one(x.backend) * (-1) ** k, H)
    cinv = Fraction(1) / c if isinstance(c, Fraction) else 1 / c
    scaled = LCNumber([(q - v, cc * cinv) for q, cc in geom.terms],
                      horizon=H - v, backend=x.backend.value)
    if x.horizon != INF:
        scaled = scaled.truncate(x.horizon - 2 * v)
    return scaled


def _binom_coeffs(alpha: Fraction):
    cache = [Fraction(1)]

    def coeff(k: int) -> Fraction:
        while len(cache) <= k:
            j = len(cache) - 1
            cache.append(cache[-1] * (alpha - j) / (j + 1))
        return cache[k]

    return coeff


def nth_root(x: LCNumber, n: int, branch: int = 0, horizon=None) -> LCNumber:
    """Principal (or ``branch``-rotated) n-th root.

    Rational backend: the leading coefficient must itself be an n-th
    power of a rational, and only branch 0 exists.
    """
    if n < 1:
        raise RootError("root index must be a positive integer")
    v, c, u = _split_unit(x)
    if x.backend is Backend.RATIONAL:
        if branch != 0:
            raise BackendError("rational backend carries only the principal branch")
        if c < 0:
            raise RootError("negative leading coefficient has no ordered root")
        croot = _rational_nth_root(c, n)
        if croot is None:
            raise RootError(f"leading coefficient {c} is not a rational {n}-th power")
    else:
        r, phi = abs(c), cmath.phase(c)
        croot = r ** (1.0 / n) * cmath.exp(1j * (phi + 2 * math.pi * (branch % n)) / n)
    H = _rel_horizon(x, horizon)
    alpha = Fraction(1, n)
    bc = _binom_coeffs(alpha)
    coeffs = (lambda k: bc(k)) if x.backend is Backend.RATIONAL else (lambda k: complex(bc(k)))
    body = _series_in(u, coeffs, H)
    out = LCNumber([(q + v * alpha, cc * croot) for q, cc in body.terms],
                   horizon=H + v * alpha, backend=x.backend.value)
    return out


def sqrt(x: LCNumber, horizon=None) -> LCNumber:
    return nth_root(x, 2, horizon=horizon)


def _rational_nth_root(c: Fraction, n: int) -> Optional[Fraction]:
    def iroot(m: int) -> Optional[int]:
        if m == 0:
            return 0
        r = round(m ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == m:
                return cand
        return None

    p, q = iroot(c.numerator), iroot(c.denominator)
    return Fraction(p, q) if p is not None and q is not None else None


# ---------------------------------------------------------------------------
# Transcendental lifts
# ---------------------------------------------------------------------------

def _finite_split(x: LCNumber, name: str):
    if x.kind() is Kind.INFINITE:
        raise DomainError(f"{name} of an infinite element leaves the field")
    a = x.coefficient(0) if x.kind() is Kind.FINITE else (
        Fraction(0) if x.backend is Backend.RATIONAL else 0j)
    e = x - LCNumber.from_scalar(a, backend=x.backend.value)
    return a, e


def _taylor_apply(x: LCNumber, name: str, series, horizon=None) -> LCNumber:
    a, e = _finite_split(x, name)
    if x.backend is Backend.RATIONAL and a != 0:
        raise BackendError(
            f"{name} at nonzero standard part {a} is irrational; use the float backend")
    H = x.horizon if x.horizon != INF else (
        _as_exp(horizon) if horizon is not None else DEFAULT_DEPTH)
    return _series_in(e.truncate(H), series(a), H) if not e.is_zero() else \
        LCNumber.from_scalar(series(a)(0), backend=x.backend.value).truncate(H)


def lc_exp(x: LCNumber, horizon=None) -> LCNumber:
    def series(a):
        ea = _one(x.backend) if x.backend is Backend.RATIONAL else cmath.exp(complex(a))
        fact = [Fraction(1)]

        def coeff(k):
            while len(fact) <= k:
                fact.append(fact[-1] / len(fact))
            c = fact[k]
            return ea * c if x.backend is Backend.RATIONAL else ea * complex(c)
        return coeff
    return _taylor_apply(x, "exp", series, horizon)


def lc_sin(x: LCNumber, horizon=None) -> LCNumber:
    def series(a):
        if x.backend is Backend.RATIONAL:
            def coeff(k):
                if k % 2 == 0:
                    return Fraction(0)
                return Fraction((-1) ** (k // 2), math.factorial(k))
            return coeff
        sa, ca = cmath.sin(complex(a)), cmath.cos(complex(a))

        def coeff(k):
            d = (sa, ca, -sa, -ca)[k % 4]
            return d / math.factorial(k)
        return coeff
    return _taylor_apply(x, "sin", series, horizon)


def lc_cos(x: LCNumber, horizon=None) -> LCNumber:
    def series(a):
        if x.backend is Backend.RATIONAL:
            def coeff(k):
                if k % 2 == 1:
                    return Fraction(0)
                return Fraction((-1) ** (k // 2), math.factorial(k))
            return coeff
        sa, ca = cmath.sin(complex(a)), cmath.cos(complex(a))

        def coeff(k):
            d = (ca, -sa, -ca, sa)[k % 4]
            return d / math.factorial(k)
        return coeff
    return _taylor_apply(x, "cos", series, horizon)


def lc_log(x: LCNumber, horizon=None) -> LCNumber:
    """log on the unit-scale group: requires valuation 0 (otherwise the
    value would involve log(rho), which is outside the field)."""
    if x.is_zero():
        raise DomainError("log of zero")
    if x.valuation() != 0:
        raise DomainError("log requires a finite non-infinitesimal argument")
    v, c, u = _split_unit(x)
    if x.backend is Backend.RATIONAL:
        if c != 1:
            raise BackendError(
                f"log of leading coefficient {c} is irrational; use the float backend")
        lc0 = Fraction(0)
    else:
        if c == 0:
            raise DomainError("log of zero")
        lc0 = cmath.log(c)
    H = _rel_horizon(x, horizon)

    def coeff(k):
        if k == 0:
            return lc0
        q = Fraction((-1) ** (k + 1), k)
        return q if x.backend is Backend.RATIONAL else complex(q)
    return _series_in(u, coeff, H)


# ---------------------------------------------------------------------------
# Polynomials and root lifting
# ---------------------------------------------------------------------------

class LCPolynomial:
    """Univariate polynomial with LCNumber coefficients, a_0 + a_1 x + ..."""

    __slots__ = ("coeffs", "backend")

    def __init__(self, coeffs: Sequence[LCNumber]):
        cs = list(coeffs)
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        if not cs:
            raise OrderError("empty coefficient list")
        b = cs[0].backend
        for c in cs:
            if not isinstance(c, LCNumber) or c.backend is not b:
                raise BackendError("coefficients must be LCNumbers on one backend")
        self.coeffs = tuple(cs)
        self.backend = b

    @classmethod
    def from_scalars(cls, scalars, backend="float") -> "LCPolynomial":
        return cls([LCNumber.from_scalar(s, backend=backend) for s in scalars])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: LCNumber) -> LCNumber:
        out = LCNumber.zero(backend=self.backend.value)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def derivative(self) -> "LCPolynomial":
        if self.degree == 0:
            return LCPolynomial([LCNumber.zero(backend=self.backend.value)])
        return LCPolynomial([c * k for k, c in enumerate(self.coeffs) if k >= 1])

    def shift(self, a: LCNumber) -> "LCPolynomial":
        """Taylor shift: coefficients of p(a + y) in y."""
        d = self.degree
        p = self
        fact = 1
        out = [self(a)]
        for j in range(1, d + 1):
            p = p.derivative()
            fact *= j
            inv = Fraction(1, fact)
            val = p(a)
            out.append(LCNumber([(q, c * inv if isinstance(c, Fraction) else c / fact)
                                 for q, c in val.terms],
                                horizon=val.horizon, backend=self.backend.value))
        return LCPolynomial(out)

    def __repr__(self):
        from .series import format_lc
        return "LCPolynomial([" + ", ".join(format_lc(c) for c in self.coeffs) + "])"


@dataclass(frozen=True)
class PuiseuxRoot:
    value: LCNumber
    multiplicity: int


def _lower_hull(points: List[Tuple[int, Fraction]]) -> List[Tuple[int, Fraction]]:
    pts = sorted(points)
    hull: List[Tuple[int, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _cluster(values: np.ndarray) -> List[Tuple[complex, int]]:
    if len(values) == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(values))))
    out: List[Tuple[complex, int]] = []
    for z in values:
        for i, (c, m) in enumerate(out):
            if abs(z - c) <= _CLUSTER_RTOL * scale:
                out[i] = ((c * m + z) / (m + 1), m + 1)
                break
        else:
            out.append((complex(z), 1))
    return out


def poly_roots(poly: LCPolynomial, precision=Fraction(8)) -> List[PuiseuxRoot]:
    """All roots of the polynomial as truncated series, counted with
    multiplicity, each accurate to residual valuation >= ``precision``.

    Float backend only: the algorithm leans on numerical root finding
    for the associated leading-coefficient polynomials.
    """
    if poly.backend is not Backend.FLOAT:
        raise BackendError("poly_roots requires the float backend")
    precision = _as_exp(precision)
    raw = _puiseux(poly, precision + 2, 0)
    out = []
    for val, mult in raw:
        out.append(PuiseuxRoot(val.truncate(precision + 2), mult))
    return out


def _refine_center(assoc: np.ndarray, c0: complex, m: int) -> complex:
    """Sharpen a multiplicity-m cluster center: it is a simple root of the
    (m-1)-th derivative of the associated polynomial."""
    p = np.polynomial.Polynomial(assoc)
    for _ in range(m - 1):
        p = p.deriv()
    rs = p.roots()
    if len(rs) == 0:
        return c0
    return complex(rs[np.argmin(np.abs(rs - c0))])


def _depollute(poly: LCPolynomial) -> LCPolynomial:
    """Drop coefficient terms at roundoff level relative to the polynomial's
    global coefficient scale (recentering leaves such debris behind)."""
    scale = 0.0
    for c in poly.coeffs:
        for _, v in c.terms:
            scale = max(scale, abs(v))
    if scale == 0.0:
        return poly
    cut = _POLY_DUST * scale
    out = [LCNumber([(q, v) for q, v in c.terms if abs(v) > cut],
                    horizon=c.horizon, backend="float")
           for c in poly.coeffs]
    return LCPolynomial(out) if any(not c.is_zero() for c in out) else poly


def _segment_roots(cs: List[LCNumber], below: Optional[Fraction]):
    """Newton-polygon data: [(mu, [(lead_coeff, multiplicity), ...])] for
    the segments whose root valuation mu exceeds ``below`` (all if None)."""
    points = [(i, c.valuation()) for i, c in enumerate(cs) if not c.is_zero()]
    out = []
    for (i0, v0), (i1, v1) in zip(_lower_hull(points), _lower_hull(points)[1:]):
        mu = Fraction(v0 - v1, i1 - i0)
        if below is not None and mu <= below:
            continue
        assoc = np.zeros(i1 - i0 + 1, dtype=complex)
        for i in range(i0, i1 + 1):
            c = cs[i]
            if not c.is_zero() and c.valuation() == v0 - mu * (i - i0):
                assoc[i - i0] = complex(c.leading_coefficient())
        zs = np.roots(assoc[::-1])
        clusters = [(c0 if m == 1 else _refine_center(assoc, c0, m), m)
                    for c0, m in _cluster(zs)]
        out.append((mu, clusters))
    return out


def _puiseux(poly: LCPolynomial, target: Fraction, depth: int,
             below: Optional[Fraction] = None):
    """[(root, multiplicity)] for roots of valuation > ``below``, each
    determined below exponent ``target``."""
    if depth > _MAX_RECENTER:
        raise LiftError("root lifting failed to separate a cluster")
    cs = list(poly.coeffs)
    roots: List[Tuple[LCNumber, int]] = []
    # exact roots at the origin: observed-zero low coefficients
    k0 = 0
    while k0 < len(cs) - 1 and cs[k0].is_zero():
        k0 += 1
    if k0:
        roots.append((LCNumber.zero(backend="float"), k0))
        cs = cs[k0:]
    if len(cs) == 1:
        return roots
    for mu, clusters in _segment_roots(cs, below):
        for c0, mult in clusters:
            lead = LCNumber({mu: c0}, backend="float")
            if mult == 1:
                roots.append((_newton_refine(poly, lead, target), 1))
            elif mu >= target:
                roots.append((lead.truncate(target), mult))
            else:
                shifted = _depollute(poly.shift(lead))
                for tail, m in _puiseux(shifted, target, depth + 1, below=mu):
                    roots.append((lead + tail, m))
    return roots


def effective_valuation(x: LCNumber, tol: float) -> Fraction:
    """Least exponent whose coefficient exceeds ``tol`` in magnitude
    (INF if none): valuation up to float cancellation debris."""
    for q, c in x.terms:
        if abs(c) > tol:
            return q
    return INF


def _poly_scale(poly: LCPolynomial, x: LCNumber) -> float:
    s = max((abs(v) for c in poly.coeffs for _, v in c.terms), default=1.0)
    lead = abs(x.leading_coefficient()) if not x.is_zero() else 1.0
    return max(1.0, s) * max(1.0, lead) ** poly.degree


def _clean(x: LCNumber, tol: float) -> LCNumber:
    return LCNumber([(q, c) for q, c in x.terms if abs(c) > tol],
                    horizon=x.horizon, backend="float")


def _newton_refine(poly: LCPolynomial, x0: LCNumber, target: Fraction) -> LCNumber:
    dp = poly.derivative()
    work = target + 8
    tol = _POLY_DUST * _poly_scale(poly, x0)
    x = x0
    for _ in range(64):
        fx = _clean(poly(x).truncate(work + x0.valuation()), tol)
        dx = dp(x)
        if dx.is_zero():
            raise LiftError("Newton derivative vanished on a presumed simple root")
        if fx.is_zero() or fx.valuation() - dx.valuation() >= target:
            return _clean(x, tol).truncate(target)
        step = fx * inverse(dx, horizon=work)
        x = _clean((x - step).truncate(work), tol)
    raise LiftError("Newton refinement did not reach the requested precision")


# ---------------------------------------------------------------------------
# Cantor completeness on nested intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LCInterval:
    """Closed interval [lo, hi] on the rational (ordered) backend."""

    lo: LCNumber
    hi: LCNumber

    def __post_init__(self):
        if self.lo.backend is not Backend.RATIONAL or self.hi.backend is not Backend.RATIONAL:
            raise BackendError("intervals live on the ordered rational backend")
        if self.hi < self.lo:
            raise OrderError("empty interval: hi < lo")

    def width(self) -> LCNumber:
        return self.hi - self.lo

    def contains(self, x: LCNumber) -> bool:
        return self.lo <= x <= self.hi


def nested_interval_point(intervals: Sequence[LCInterval]) -> LCNumber:
    """A point in the intersection of a nested chain whose widths have
    strictly increasing valuation (the constructive content of Cantor
    completeness in the valuation topology)."""
    chain = list(intervals)
    if not chain:
        raise OrderError("no intervals given")
    prev = chain[0]
    for cur in chain[1:]:
        if not (prev.lo <= cur.lo and cur.hi <= prev.hi):
            raise OrderError("intervals are not nested")
        wp, wc = prev.width().valuation(), cur.width().valuation()
        if not (wc > wp or wc == INF):
            raise OrderError("interval widths must shrink in valuation")
        prev = cur
    last = chain[-1]
    w = last.width().valuation()
    if w == INF:
        return last.lo
    return last.lo.truncate(w)
