"""Symbolic magnitude calculus on the scale tower generated by rho.

A :class:`GrowthOrder` records the asymptotic size of a quantity as the
positive infinitesimal scale parameter ``rho`` tends to ``0+``.  The
vocabulary is deliberately closed: a magnitude is a finite product

    rho^r * prod_k log_k(1/rho)^(m_k) * prod_k exp_k(1/rho)^(e_k)

with rational exponents, where ``log_k`` / ``exp_k`` are the k-fold
iterated logarithm / exponential.  Sums of magnitudes reduce to the
dominant factor, so any two canonical orders compare, and membership in
the convex-ring chain

    F  <  L_rho  <  F_rho  <  M_rho  <  E_rho  <  StarC

is decidable.  Constant factors are invisible at this level: two
quantities of the same scale share one GrowthOrder.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Union

from .errors import CanonicalizationError, ParseError

RationalLike = Union[int, Fraction, str]


def _frac(x: RationalLike) -> Fraction:
    try:
        return Fraction(x)
    except (ValueError, TypeError) as exc:
        raise CanonicalizationError(f"not a rational multiplicity: {x!r}") from exc


def _clean_tower(tower: Mapping[int, RationalLike], kind: str) -> tuple:
    out = {}
    for level, mult in tower.items():
        if not isinstance(level, int) or level < 1:
            raise CanonicalizationError(f"{kind} tower level must be a positive int, got {level!r}")
        m = _frac(mult)
        if m != 0:
            out[level] = out.get(level, Fraction(0)) + m
    return tuple(sorted((k, v) for k, v in out.items() if v != 0))


class Cmp(Enum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class GrowthOrder:
    """Canonical product of scale-tower factors (magnitudes only, sign-free).

    ``rho`` is the exponent r of rho^r; note rho^r -> infinity iff r < 0.
    ``logs`` and ``exps`` map tower level k >= 1 to a nonzero rational
    multiplicity of log_k(1/rho) resp. exp_k(1/rho).
    """

    rho: Fraction = Fraction(0)
    logs: tuple = ()
    exps: tuple = ()

    def __init__(self, rho: RationalLike = 0,
                 logs: Mapping[int, RationalLike] | Iterable | None = None,
                 exps: Mapping[int, RationalLike] | Iterable | None = None):
        object.__setattr__(self, "rho", _frac(rho))
        object.__setattr__(self, "logs", _clean_tower(dict(logs or {}), "log"))
        object.__setattr__(self, "exps", _clean_tower(dict(exps or {}), "exp"))

    # -- constructors ------------------------------------------------
    @staticmethod
    def unit() -> "GrowthOrder":
        return GrowthOrder()

    @staticmethod
    def rho_power(r: RationalLike) -> "GrowthOrder":
        return GrowthOrder(rho=r)

    @staticmethod
    def log_tower(k: int, mult: RationalLike = 1) -> "GrowthOrder":
        return GrowthOrder(logs={k: mult})

    @staticmethod
    def exp_tower(k: int, mult: RationalLike = 1) -> "GrowthOrder":
        return GrowthOrder(exps={k: mult})

    # -- group structure ---------------------------------------------
    def __mul__(self, other: "GrowthOrder") -> "GrowthOrder":
        logs = dict(self.logs)
        for k, m in other.logs:
            logs[k] = logs.get(k, Fraction(0)) + m
        exps = dict(self.exps)
        for k, m in other.exps:
            exps[k] = exps.get(k, Fraction(0)) + m
        return GrowthOrder(self.rho + other.rho, logs, exps)

    def inverse(self) -> "GrowthOrder":
        return self.power(-1)

    def power(self, a: RationalLike) -> "GrowthOrder":
        a = _frac(a)
        return GrowthOrder(self.rho * a,
                           {k: m * a for k, m in self.logs},
                           {k: m * a for k, m in self.exps})

    def is_unit(self) -> bool:
        return self.rho == 0 and not self.logs and not self.exps

    # -- size --------------------------------------------------------
    def dominance_sign(self) -> int:
        """+1 if the magnitude tends to infinity, -1 to zero, 0 if unit scale.

        Dominance ranks: exp towers (higher level first) beat rho powers,
        which beat log towers (lower level first).
        """
        for level, mult in sorted(self.exps, reverse=True):
            if mult != 0:
                return 1 if mult > 0 else -1
        if self.rho != 0:
            return 1 if self.rho < 0 else -1
        for level, mult in self.logs:
            if mult != 0:
                return 1 if mult > 0 else -1
        return 0

    def __repr__(self) -> str:
        return f"GrowthOrder({format_growth(self)!r})"


def cmp_growth(a: GrowthOrder, b: GrowthOrder) -> Cmp:
    """Total order by asymptotic dominance as rho -> 0+."""
    if not isinstance(a, GrowthOrder) or not isinstance(b, GrowthOrder):
        raise CanonicalizationError("cmp_growth expects canonical GrowthOrder values")
    sign = (a * b.inverse()).dominance_sign()
    return Cmp(sign)


# ---------------------------------------------------------------------------
# The convex-ring chain
# ---------------------------------------------------------------------------

class RingFamily(Enum):
    """Rings of the chain F < L_rho < F_rho < M_rho < E_rho < StarC,
    each paired with its ideal (I, L_rho0, I_rho, N_rho, E_rho0, {0})."""

    F = "F"
    L_RHO = "L_rho"
    F_RHO = "F_rho"
    M_RHO = "M_rho"
    E_RHO = "E_rho"
    STAR_C = "StarC"


CHAIN = (RingFamily.F, RingFamily.L_RHO, RingFamily.F_RHO,
         RingFamily.M_RHO, RingFamily.E_RHO, RingFamily.STAR_C)

IDEAL_NAME = {
    RingFamily.F: "I",
    RingFamily.L_RHO: "L_rho0",
    RingFamily.F_RHO: "I_rho",
    RingFamily.M_RHO: "N_rho",
    RingFamily.E_RHO: "E_rho0",
    RingFamily.STAR_C: "{0}",
}


class Membership(Enum):
    IN_IDEAL = "InIdeal"
    IN_RING_NOT_IDEAL = "InRingNotIdeal"
    OUTSIDE = "Outside"


def _exp_sign(g: GrowthOrder) -> int:
    """Sign of the dominant exponential factor (0 if no exp factors)."""
    for level, mult in sorted(g.exps, reverse=True):
        if mult != 0:
            return 1 if mult > 0 else -1
    return 0


def _log1_mult(g: GrowthOrder) -> Fraction:
    for level, mult in g.logs:
        if level == 1:
            return mult
    return Fraction(0)


def in_ring(g: GrowthOrder, r: RingFamily) -> bool:
    """Decide |z| scale membership in a ring of the chain.

    The quantified definitions ("for all n" / "for some n" over the
    generating family) are resolved by dominance against the family's
    symbolic limit inside the closed tower vocabulary.
    """
    es = _exp_sign(g)
    if r is RingFamily.STAR_C or r is RingFamily.E_RHO:
        # exp_{n+1} dominates any finite product involving exp_n and below.
        return True
    if r is RingFamily.M_RHO:
        return es <= 0
    if r is RingFamily.F_RHO:
        return es < 0 or (es == 0 and g.rho >= 0)
    if r is RingFamily.L_RHO:
        # Everything growing slower than every positive power of log_1.
        return es < 0 or (es == 0 and (g.rho > 0 or (g.rho == 0 and _log1_mult(g) <= 0)))
    if r is RingFamily.F:
        return g.dominance_sign() <= 0
    raise CanonicalizationError(f"unknown ring family {r!r}")


def in_ideal(g: GrowthOrder, r: RingFamily) -> bool:
    """Ideal membership via inversion duality: g in M0 iff 1/g not in M."""
    if g.is_unit():
        return False
    return not in_ring(g.inverse(), r)


def classify_ring(g: GrowthOrder, r: RingFamily) -> Membership:
    if in_ideal(g, r):
        return Membership.IN_IDEAL
    if in_ring(g, r):
        return Membership.IN_RING_NOT_IDEAL
    return Membership.OUTSIDE


def chain_position(g: GrowthOrder) -> RingFamily:
    """Smallest family of the chain containing g."""
    for r in CHAIN:
        if in_ring(g, r):
            return r
    return RingFamily.STAR_C  # unreachable: E_rho absorbs the vocabulary


# ---------------------------------------------------------------------------
# Generating sequences
# ---------------------------------------------------------------------------

class SequenceKind(Enum):
    DECREASING = "Decreasing"
    INCREASING = "Increasing"


@dataclass(frozen=True)
class GeneratingEntry:
    n: int
    infinitely_large: bool
    monotone_ok: bool
    witness_halving: Optional[int]   # m for the doubling/halving condition
    witness_squaring: Optional[int]  # m for the squaring condition

    @property
    def ok(self) -> bool:
        return (self.infinitely_large and self.monotone_ok
                and self.witness_halving is not None
                and self.witness_squaring is not None)


@dataclass(frozen=True)
class ValidationReport:
    kind: SequenceKind
    n_max: int
    entries: tuple
    first_failure: Optional[tuple]  # (n, reason) or None

    @property
    def valid(self) -> bool:
        return self.first_failure is None


def validate_generating(kind: SequenceKind, family: Callable[[int], GrowthOrder],
                        n_max: int) -> ValidationReport:
    """Check the doubling and squaring closure conditions for a family.

    Witnesses m are searched in 1..2*n_max (the squaring witness for
    root-power families sits at m = 2n).  Strict dominance is required
    for the doubling condition since constant factors are invisible at
    scale level; the squaring condition accepts scale equality.
    """
    m_hi = 2 * n_max
    seq = {n: family(n) for n in range(1, m_hi + 1)}
    entries = []
    first_failure = None
    dec = kind is SequenceKind.DECREASING
    for n in range(1, n_max + 1):
        g = seq[n]
        large = cmp_growth(g, GrowthOrder.unit()) is Cmp.GT
        if n < n_max:
            c = cmp_growth(seq[n + 1], g)
            monotone = (c is not Cmp.GT) if dec else (c is not Cmp.LT)
        else:
            monotone = True
        wh = ws = None
        for m in range(1, m_hi + 1):
            gm = seq[m]
            if wh is None:
                if dec and cmp_growth(gm, g) is Cmp.LT:
                    wh = m
                elif not dec and cmp_growth(g, gm) is Cmp.LT:
                    wh = m
            if ws is None:
                if dec and cmp_growth(gm.power(2), g) is not Cmp.GT:
                    ws = m
                elif not dec and cmp_growth(g.power(2), gm) is not Cmp.GT:
                    ws = m
            if wh is not None and ws is not None:
                break
        entry = GeneratingEntry(n, large, monotone, wh, ws)
        entries.append(entry)
        if first_failure is None and not entry.ok:
            if not large:
                reason = "not infinitely large"
            elif not monotone:
                reason = "not monotone"
            elif wh is None:
                reason = "no doubling witness"
            else:
                reason = "no squaring witness"
            first_failure = (n, reason)
    return ValidationReport(kind, n_max, tuple(entries), first_failure)


# ---------------------------------------------------------------------------
# Spilling principles on threshold sets
# ---------------------------------------------------------------------------

class ThresholdKind(Enum):
    AT_MOST = "AtMost"   # {z : |z| <= b}
    LESS = "Less"        # {z : |z| < b}


@dataclass(frozen=True)
class ThresholdSet:
    bound: GrowthOrder
    kind: ThresholdKind = ThresholdKind.AT_MOST


@dataclass(frozen=True)
class PrincipleReport:
    name: str
    hypothesis_holds: bool
    conclusion_holds: Optional[bool]      # None when hypothesis fails
    witness: Optional[GrowthOrder]
    note: str = ""


@dataclass(frozen=True)
class SpillReport:
    threshold: ThresholdSet
    ring: RingFamily
    principles: tuple

    def __getitem__(self, name: str) -> PrincipleReport:
        for p in self.principles:
            if p.name == name:
                return p
        raise KeyError(name)


_IDEAL_WITNESS = {
    RingFamily.F: GrowthOrder.rho_power(1),
    RingFamily.L_RHO: GrowthOrder.log_tower(1, -1),
    RingFamily.F_RHO: GrowthOrder.rho_power(1),
    RingFamily.M_RHO: GrowthOrder.exp_tower(1, -1),
    RingFamily.E_RHO: None,   # no nonzero element in the closed vocabulary
    RingFamily.STAR_C: None,
}

_LARGE_IN_RING = {
    RingFamily.F: GrowthOrder.unit(),
    RingFamily.L_RHO: GrowthOrder.log_tower(2),
    RingFamily.F_RHO: GrowthOrder.log_tower(1),
    RingFamily.M_RHO: GrowthOrder.rho_power(-1),
    RingFamily.E_RHO: GrowthOrder.exp_tower(1),
    RingFamily.STAR_C: GrowthOrder.exp_tower(1),
}


def _in_threshold(g: GrowthOrder, s: ThresholdSet) -> bool:
    c = cmp_growth(g, s.bound)
    if c is Cmp.LT:
        return True
    return c is Cmp.EQ and s.kind is ThresholdKind.AT_MOST


def spill_check(s: ThresholdSet, r: RingFamily) -> SpillReport:
    """Decide the four spilling conclusions for the internal set
    A = {z : |z| <= b}  (or < b), read cofinally: "arbitrarily large in Y"
    means cofinal in Y, "arbitrarily small in Y" means coinitial in Y.

    Threshold sets are downward closed, so each hypothesis reduces to a
    classification of the bound b against the ring and each conclusion,
    when applicable, can be verified by an explicit witness scale.
    """
    b = s.bound
    cls = classify_ring(b, r)
    in_m = cls is not Membership.OUTSIDE
    in_m0 = cls is Membership.IN_IDEAL
    reports = []

    # (i) Overflow of M: A cofinal in M  =>  A coinitial in *C \ M.
    h = not in_m
    if h:
        w = b.power(Fraction(1, 2))
        if in_ring(w, r):
            w = b if s.kind is ThresholdKind.AT_MOST else None
        note = "witness lies in A and outside the ring"
    else:
        w, note = None, "bound lies in the ring: A is not cofinal in it"
    reports.append(PrincipleReport("overflow_ring", h, True if h else None, w, note))

    # (ii) Underflow of M \ M0: A coinitial in M \ M0  =>  A cofinal in M0.
    h = not in_m0
    if h:
        w = _IDEAL_WITNESS[r]
        note = ("A contains the whole ideal" if w is not None
                else "ideal has no nonzero element in the closed scale vocabulary")
    else:
        w, note = None, "bound lies in the ideal: A misses the ring's units"
    reports.append(PrincipleReport("underflow_units", h, True if h else None, w, note))

    # (iii) Overflow of M0: A cofinal in M0  =>  A coinitial in M \ M0.
    ideal_nonempty = _IDEAL_WITNESS[r] is not None
    h = (not in_m0) and ideal_nonempty
    if h:
        unit = GrowthOrder.unit()
        if _in_threshold(unit, s):
            w, note = unit, "unit scale lies in A and in the ring minus its ideal"
        elif in_m and s.kind is ThresholdKind.AT_MOST:
            w, note = b, "the bound itself lies in the ring minus its ideal"
        else:
            # Same scale class as b, strictly below b; not expressible as a
            # distinct GrowthOrder, so report the class with a note.
            w, note = b, "witness b*(1-rho): same scale class, strictly below the bound"
    else:
        w = None
        note = ("ideal empty in the closed vocabulary" if not ideal_nonempty
                else "bound lies in the ideal: A is not cofinal in it")
    reports.append(PrincipleReport("overflow_ideal", h, True if h else None, w, note))

    # (iv) Underflow of *C \ M: A coinitial in *C \ M  =>  A cofinal in M.
    h = not in_m
    if h:
        w = _LARGE_IN_RING[r]
        note = "A contains the whole ring"
    else:
        w, note = None, "bound lies in the ring: A misses its complement"
    reports.append(PrincipleReport("underflow_complement", h, True if h else None, w, note))

    return SpillReport(s, r, tuple(reports))


# ---------------------------------------------------------------------------
# Text syntax: rho^(-3)*log1^2, exp2, 1
# ---------------------------------------------------------------------------

_FACTOR_RE = re.compile(
    r"^(?:(?P<one>1)|(?P<base>rho|log(?P<lk>\d+)|exp(?P<ek>\d+))"
    r"(?:\^(?P<exp>\(?-?\d+(?:/\d+)?\)?))?)$"
)


def parse_growth(text: str) -> GrowthOrder:
    """Parse the factor-product syntax, e.g. ``rho^(-3)*log1^2`` or ``exp2``."""
    g = GrowthOrder.unit()
    for raw in text.replace(" ", "").split("*"):
        m = _FACTOR_RE.match(raw)
        if not m:
            raise ParseError(f"bad growth-order factor {raw!r}")
        if m.group("one"):
            continue
        exp = Fraction(m.group("exp").strip("()")) if m.group("exp") else Fraction(1)
        base = m.group("base")
        if base == "rho":
            g = g * GrowthOrder.rho_power(exp)
        elif m.group("lk") is not None:
            g = g * GrowthOrder.log_tower(int(m.group("lk")), exp)
        else:
            g = g * GrowthOrder.exp_tower(int(m.group("ek")), exp)
    return g


def format_growth(g: GrowthOrder) -> str:
    parts = []
    if g.rho != 0:
        parts.append("rho" if g.rho == 1 else f"rho^({g.rho})")
    for k, m in g.logs:
        parts.append(f"log{k}" if m == 1 else f"log{k}^({m})")
    for k, m in g.exps:
        parts.append(f"exp{k}" if m == 1 else f"exp{k}^({m})")
    return "*".join(parts) if parts else "1"
