"""Fréchet-filter sandbox: the decidable core of "almost everywhere".

Sequences over N are compared with cofinite-set semantics.  Everything a
free ultrafilter would additionally decide is answered ``Undecided`` and
tagged "ultrafilter-dependent" — the sandbox models exactly the fragment
that needs no choice principle.  Finite prefixes carry measure zero, so
no decided answer may depend on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

from .errors import DomainError

ULTRA_NOTE = "ultrafilter-dependent"


@dataclass(frozen=True)
class Verdict:
    value: Optional[bool]        # True / False / None = Undecided
    note: str = ""

    @property
    def decided(self) -> bool:
        return self.value is not None

    def __bool__(self):
        return self.value is True

    def __repr__(self):
        if self.value is None:
            return f"Undecided({self.note!r})"
        return f"Verdict({self.value})"


TRUE = Verdict(True)
FALSE = Verdict(False)


def undecided(note: str = ULTRA_NOTE) -> Verdict:
    return Verdict(None, note)


# ---------------------------------------------------------------------------
# Sequence generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EventuallyConstant:
    tail: object
    prefix: Tuple = ()          # transient values at indices 0..len-1

    def value_at(self, i: int):
        return self.prefix[i] if i < len(self.prefix) else self.tail


@dataclass(frozen=True)
class Periodic:
    pattern: Tuple
    overrides: Dict[int, object] = field(default_factory=dict)

    def __post_init__(self):
        if not self.pattern:
            raise DomainError("empty period")

    def value_at(self, i: int):
        if i in self.overrides:
            return self.overrides[i]
        return self.pattern[i % len(self.pattern)]

    def tail_values(self) -> frozenset:
        return frozenset(self.pattern)


@dataclass(frozen=True)
class ClosedForm:
    """a_i = fn(i) with declared tail knowledge: ``diverges_to`` in
    {"+inf", "-inf", "0", None} and optional value densities
    (value -> "cofinite" | "infinite" | "finite")."""

    fn: Callable[[int], object]
    description: str = ""
    diverges_to: Optional[str] = None
    densities: Dict[object, str] = field(default_factory=dict)
    overrides: Dict[int, object] = field(default_factory=dict)

    def value_at(self, i: int):
        return self.overrides[i] if i in self.overrides else self.fn(i)


@dataclass(frozen=True)
class Sampled:
    prefix: Tuple

    def value_at(self, i: int):
        if i < len(self.prefix):
            return self.prefix[i]
        raise DomainError("Sampled sequence has no tail knowledge")


FilterSeq = Union[EventuallyConstant, Periodic, ClosedForm, Sampled]


def perturb(seq: FilterSeq, changes: Dict[int, object]) -> FilterSeq:
    """Finite-prefix perturbation; never changes a decided verdict."""
    if isinstance(seq, EventuallyConstant):
        n = max(changes, default=-1) + 1
        pref = tuple(changes.get(i, seq.value_at(i)) for i in range(max(n, len(seq.prefix))))
        return EventuallyConstant(seq.tail, pref)
    if isinstance(seq, Periodic):
        return Periodic(seq.pattern, {**seq.overrides, **changes})
    if isinstance(seq, ClosedForm):
        return ClosedForm(seq.fn, seq.description, seq.diverges_to,
                          seq.densities, {**seq.overrides, **changes})
    if isinstance(seq, Sampled):
        n = max(len(seq.prefix), max(changes, default=-1) + 1)
        return Sampled(tuple(changes.get(i, seq.prefix[i] if i < len(seq.prefix) else None)
                             for i in range(n)))
    raise DomainError(f"unknown sequence kind {type(seq).__name__}")


# ---------------------------------------------------------------------------
# a.e. equality
# ---------------------------------------------------------------------------

def ae_equal(a: FilterSeq, b: FilterSeq) -> Verdict:
    """True: agreement provably cofinite.  False: disagreement provably
    infinite.  Undecided otherwise (with the ultrafilter note)."""
    if a is b:
        return TRUE
    ka, kb = type(a).__name__, type(b).__name__
    if isinstance(b, (EventuallyConstant,)) and not isinstance(a, EventuallyConstant):
        return ae_equal(b, a)
    if isinstance(a, EventuallyConstant):
        if isinstance(b, EventuallyConstant):
            return TRUE if a.tail == b.tail else FALSE
        if isinstance(b, Periodic):
            vals = b.tail_values()
            if vals == {a.tail}:
                return TRUE
            # every pattern slot recurs infinitely often
            return FALSE
        if isinstance(b, ClosedForm):
            if b.diverges_to in ("+inf", "-inf"):
                return FALSE  # divergence disagrees cofinitely with any constant
            d = b.densities.get(a.tail)
            if d == "cofinite":
                return TRUE
            if d == "finite":
                return FALSE
            if any(v != a.tail and dd in ("cofinite", "infinite")
                   for v, dd in b.densities.items()):
                return FALSE
            return undecided()
        return undecided("no tail knowledge")
    if isinstance(a, Periodic) and isinstance(b, Periodic):
        period = math.lcm(len(a.pattern), len(b.pattern))
        mism = [i for i in range(period) if a.pattern[i % len(a.pattern)]
                != b.pattern[i % len(b.pattern)]]
        return TRUE if not mism else FALSE
    if isinstance(a, ClosedForm) and isinstance(b, ClosedForm):
        if a.fn is b.fn or (a.description and a.description == b.description):
            return TRUE
        if {a.diverges_to, b.diverges_to} == {"+inf", "-inf"}:
            return FALSE
        return undecided()
    if isinstance(a, Sampled) or isinstance(b, Sampled):
        return undecided("no tail knowledge")
    return undecided()


# ---------------------------------------------------------------------------
# The canonical infinite index and magnitude verdicts
# ---------------------------------------------------------------------------

def canonical_nu() -> ClosedForm:
    """ν = ⟨0, 1, 2, …⟩: the canonical infinitely large element."""
    return ClosedForm(lambda i: i, description="nu: a_i = i", diverges_to="+inf")


def exceeds(seq: FilterSeq, eps: float) -> Verdict:
    """Is {i : a_i > eps} cofinite?"""
    if isinstance(seq, EventuallyConstant):
        return TRUE if seq.tail > eps else FALSE
    if isinstance(seq, Periodic):
        vals = seq.tail_values()
        if all(v > eps for v in vals):
            return TRUE
        return FALSE  # some slot ≤ eps recurs infinitely often
    if isinstance(seq, ClosedForm):
        if seq.diverges_to == "+inf":
            return TRUE
        if seq.diverges_to in ("-inf", "0"):
            return FALSE if eps >= 0 else undecided()
        return undecided()
    return undecided("no tail knowledge")


def infinitesimal_reciprocal(seq: FilterSeq) -> Verdict:
    """Is {i : 1/a_i < eps} cofinite for every eps > 0 (i.e. 1/a infinitesimal)?"""
    if isinstance(seq, ClosedForm) and seq.diverges_to in ("+inf", "-inf"):
        return TRUE
    if isinstance(seq, EventuallyConstant):
        return FALSE
    return undecided()


# ---------------------------------------------------------------------------
# Star-extension of finite sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StarElement:
    value: Optional[object]     # the unique a.e. value, or None if undecided
    note: str = ""


def star_extend_finite(S: Sequence, a: FilterSeq) -> StarElement:
    """For a sequence over a finite set S, the unique s ∈ S with
    {i : a_i = s} cofinite — when the generator can prove one exists."""
    S = list(S)

    def check(v):
        if v not in S:
            raise DomainError(f"sequence value {v!r} outside the finite set")
        return v

    if isinstance(a, EventuallyConstant):
        for p in a.prefix:
            check(p)
        return StarElement(check(a.tail))
    if isinstance(a, Periodic):
        vals = {check(v) for v in a.pattern}
        if len(vals) == 1:
            return StarElement(next(iter(vals)))
        return StarElement(None, ULTRA_NOTE)
    if isinstance(a, ClosedForm):
        cof = [v for v, d in a.densities.items() if d == "cofinite"]
        if cof:
            return StarElement(check(cof[0]))
        inf_vals = [v for v, d in a.densities.items() if d == "infinite"]
        if len(inf_vals) >= 2:
            return StarElement(None, ULTRA_NOTE)
        return StarElement(None, "insufficient density knowledge")
    if isinstance(a, Sampled):
        for p in a.prefix:
            check(p)
        return StarElement(None, "no tail knowledge")
    raise DomainError(f"unknown sequence kind {type(a).__name__}")
