import random
from fractions import Fraction

import pytest

from rhocalc.growth import (CHAIN, Cmp, GrowthOrder, Membership, RingFamily,
                            SequenceKind, ThresholdKind, ThresholdSet,
                            chain_position, classify_ring, cmp_growth,
                            format_growth, in_ideal, in_ring, parse_growth,
                            spill_check, validate_generating)
from rhocalc.errors import ParseError


def G(text):
    return parse_growth(text)


class TestOrdering:
    def test_exp_beats_power(self):
        assert cmp_growth(G("exp1"), G("rho^(-100)")) is Cmp.GT

    def test_power_beats_log(self):
        assert cmp_growth(G("rho^(-1/10)"), G("log1^100")) is Cmp.GT

    def test_lower_log_level_dominates(self):
        assert cmp_growth(G("log1"), G("log2^50")) is Cmp.GT

    def test_small_rho_powers(self):
        assert cmp_growth(G("rho^2"), G("rho")) is Cmp.LT
        assert cmp_growth(G("rho^(1/2)"), G("rho")) is Cmp.GT

    def test_unit_equality(self):
        assert cmp_growth(G("1"), GrowthOrder.unit()) is Cmp.EQ

    def test_group_inverse(self):
        g = G("rho^(-3)*log1^2")
        assert (g * g.inverse()).is_unit()

    def test_total_order_transitive_fuzz(self):
        rng = random.Random(3)
        orders = [_random_growth(rng) for _ in range(60)]
        key_sorted = sorted(orders, key=_cmp_key(orders))
        for a, b in zip(key_sorted, key_sorted[1:]):
            assert cmp_growth(a, b) is not Cmp.GT


def _cmp_key(orders):
    import functools
    return functools.cmp_to_key(lambda a, b: cmp_growth(a, b).value)


def _random_growth(rng):
    g = GrowthOrder.rho_power(Fraction(rng.randint(-6, 6), rng.randint(1, 3)))
    if rng.random() < 0.5:
        g = g * GrowthOrder.log_tower(rng.randint(1, 3), rng.randint(-3, 3))
    if rng.random() < 0.3:
        g = g * GrowthOrder.exp_tower(rng.randint(1, 2), rng.randint(-2, 2))
    return g


class TestChain:
    def test_paper_examples(self):
        assert chain_position(G("log1")) is RingFamily.F_RHO         # ln(1/rho)
        assert chain_position(G("log2")) is RingFamily.L_RHO
        assert chain_position(G("log3^(5)")) is RingFamily.L_RHO
        assert chain_position(G("rho^(-3/2)")) is RingFamily.M_RHO   # rho^x, x<0
        assert chain_position(G("exp1")) is RingFamily.E_RHO         # e^{1/rho}
        assert chain_position(G("1")) is RingFamily.F
        assert chain_position(G("rho")) is RingFamily.F

    def test_ideal_duality(self):
        # exp-small elements form the ideal of M_rho
        assert classify_ring(G("exp1^(-1)"), RingFamily.M_RHO) is Membership.IN_IDEAL
        assert classify_ring(G("rho"), RingFamily.M_RHO) is Membership.IN_RING_NOT_IDEAL
        # rho is in the ideal of F_rho but log1^{-1} is not
        assert classify_ring(G("rho"), RingFamily.F_RHO) is Membership.IN_IDEAL
        assert classify_ring(G("log1^(-1)"), RingFamily.F_RHO) is Membership.IN_RING_NOT_IDEAL

    def test_unit_never_in_ideal(self):
        for r in CHAIN:
            assert not in_ideal(GrowthOrder.unit(), r)

    def test_chain_monotone_fuzz(self):
        rng = random.Random(11)
        for _ in range(500):
            g = _random_growth(rng)
            flags = [in_ring(g, r) for r in CHAIN]
            assert flags == sorted(flags), (format_growth(g), flags)
            ideals = [in_ideal(g, r) for r in CHAIN]
            assert ideals == sorted(ideals, reverse=True)
            for r in CHAIN:
                assert not in_ideal(g, r) or in_ring(g, r)

    def test_rings_multiplicatively_closed_fuzz(self):
        rng = random.Random(13)
        for _ in range(300):
            a, b = _random_growth(rng), _random_growth(rng)
            for r in CHAIN:
                if in_ring(a, r) and in_ring(b, r):
                    assert in_ring(a * b, r)
                if in_ring(a, r) and in_ideal(b, r):
                    assert in_ideal(a * b, r) or (a * b).is_unit() is False and \
                        classify_ring(a * b, r) is not Membership.OUTSIDE


class TestGenerating:
    def test_root_powers_decreasing(self):
        rep = validate_generating(SequenceKind.DECREASING,
                                  lambda n: GrowthOrder.rho_power(Fraction(-1, n)), 8)
        assert rep.valid
        # squaring witness for rho^{-1/n} sits at m = 2n
        for e in rep.entries:
            assert e.witness_squaring == 2 * e.n

    def test_integer_powers_increasing(self):
        rep = validate_generating(SequenceKind.INCREASING,
                                  lambda n: GrowthOrder.rho_power(Fraction(-n)), 8)
        assert rep.valid

    def test_log_family(self):
        rep = validate_generating(SequenceKind.DECREASING,
                                  lambda n: GrowthOrder.log_tower(1, Fraction(1, n)), 6)
        assert rep.valid

    def test_exp_family(self):
        rep = validate_generating(SequenceKind.INCREASING,
                                  lambda n: GrowthOrder.exp_tower(1, n), 6)
        assert rep.valid

    def test_infinitesimal_family_rejected(self):
        rep = validate_generating(SequenceKind.DECREASING,
                                  lambda n: GrowthOrder.rho_power(Fraction(1, n)), 4)
        assert not rep.valid
        assert rep.first_failure[1] == "not infinitely large"


class TestSpilling:
    def test_overflow_of_ring(self):
        # bound above M_rho: threshold set is cofinal in M_rho, so it spills
        s = ThresholdSet(G("exp1"))
        rep = spill_check(s, RingFamily.M_RHO)
        p = rep["overflow_ring"]
        assert p.hypothesis_holds and p.conclusion_holds
        assert p.witness is not None and not in_ring(p.witness, RingFamily.M_RHO)

    def test_underflow_principles_inside_ring(self):
        s = ThresholdSet(G("rho^(-2)"))
        rep = spill_check(s, RingFamily.M_RHO)
        assert not rep["overflow_ring"].hypothesis_holds
        p = rep["underflow_units"]
        assert p.hypothesis_holds and p.conclusion_holds
        assert in_ideal(p.witness, RingFamily.M_RHO)

    def test_bound_in_ideal(self):
        s = ThresholdSet(G("exp1^(-1)"), ThresholdKind.AT_MOST)
        rep = spill_check(s, RingFamily.M_RHO)
        assert not rep["underflow_units"].hypothesis_holds
        assert not rep["overflow_ideal"].hypothesis_holds

    def test_empty_ideal_noted(self):
        s = ThresholdSet(G("exp2"))
        rep = spill_check(s, RingFamily.E_RHO)
        p = rep["overflow_ideal"]
        assert not p.hypothesis_holds
        assert "empty" in p.note


class TestParsing:
    def test_roundtrip(self):
        for text in ("1", "rho", "rho^(-3)*log1^2", "exp2^(1/2)", "log1^(-1)"):
            assert cmp_growth(parse_growth(format_growth(parse_growth(text))),
                              parse_growth(text)) is Cmp.EQ

    def test_bad_factor(self):
        with pytest.raises(ParseError):
            parse_growth("foo^2")
