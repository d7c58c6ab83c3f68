import random
from fractions import Fraction

import pytest

from rhocalc.errors import BackendError, OrderError
from rhocalc.series import (INF, ExtendedScalar, Kind, LCNumber, LCVector,
                            format_lc)


def rnum(rng, backend="rational", max_terms=4, horizon=INF):
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        q = Fraction(rng.randint(-8, 16), rng.choice((1, 2, 3, 4)))
        if backend == "rational":
            c = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        else:
            c = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if c:
            terms[q] = c
    return LCNumber(terms, horizon=horizon, backend=backend)


class TestConstruction:
    def test_scalar_and_rho(self):
        x = LCNumber.from_scalar(Fraction(3, 2), backend="rational")
        assert x.standard_part().value == Fraction(3, 2)
        r = LCNumber.rho(backend="rational")
        assert r.valuation() == 1 and r.leading_coefficient() == 1

    def test_zero_removed(self):
        x = LCNumber({Fraction(1): Fraction(0), Fraction(2): Fraction(1)},
                     backend="rational")
        assert x.support() == (Fraction(2),)

    def test_coefficient_beyond_horizon_raises(self):
        x = LCNumber({Fraction(0): Fraction(1)}, horizon=Fraction(3),
                     backend="rational")
        assert x.coefficient(Fraction(2)) == 0
        with pytest.raises(OrderError):
            x.coefficient(Fraction(3))

    def test_backend_coeff_check(self):
        with pytest.raises(BackendError):
            LCNumber({Fraction(0): 1.5}, backend="rational")


class TestArithmetic:
    def test_horizon_add_is_min(self):
        a = LCNumber({Fraction(0): Fraction(1)}, horizon=Fraction(5), backend="rational")
        b = LCNumber({Fraction(0): Fraction(1)}, horizon=Fraction(3), backend="rational")
        assert (a + b).horizon == Fraction(3)

    def test_horizon_mul_rule(self):
        # h = min(h1 + v2, h2 + v1)
        a = LCNumber({Fraction(-1): Fraction(1)}, horizon=Fraction(5), backend="rational")
        b = LCNumber({Fraction(2): Fraction(1)}, horizon=Fraction(4), backend="rational")
        assert (a * b).horizon == min(Fraction(5) + 2, Fraction(4) - 1)

    def test_valuation_rules_fuzz(self):
        rng = random.Random(7)
        for _ in range(400):
            x, y = rnum(rng), rnum(rng)
            if not x.is_zero() and not y.is_zero():
                assert (x * y).valuation() == x.valuation() + y.valuation()
                s = x + y
                if not s.is_zero():
                    assert s.valuation() >= min(x.valuation(), y.valuation())
                if x.valuation() != y.valuation():
                    assert s.valuation() == min(x.valuation(), y.valuation())

    def test_pow_matches_repeated_mul(self):
        rng = random.Random(9)
        for _ in range(50):
            x = rnum(rng, max_terms=3)
            p = LCNumber.from_scalar(Fraction(1), backend="rational")
            for k in range(5):
                assert x ** k == p
                p = p * x

    def test_division_roundtrip(self):
        x = LCNumber({Fraction(0): Fraction(2), Fraction(1): Fraction(1)},
                     backend="rational")
        y = x / x
        assert y.standard_part().value == 1
        assert (y - 1).is_zero() or (y - 1).valuation() >= y.horizon

    def test_float_dust_preserves_geometric_tail(self):
        # 1/(1 - rho) keeps its full geometric tail even after scaling games
        x = LCNumber({Fraction(0): 1.0, Fraction(1): -1.0}, backend="float")
        inv = 1 / x
        for k in range(8):
            assert inv.coefficient(Fraction(k)) == pytest.approx(1.0, rel=1e-12)


class TestOrderAndKind:
    def test_sign_and_trichotomy(self):
        r = LCNumber.rho(backend="rational")
        assert r > 0 and (-r) < 0 and r < Fraction(1, 10 ** 12)
        assert 1 / r > 10 ** 12

    def test_ordering_float_raises(self):
        x = LCNumber.from_scalar(1.0)
        with pytest.raises(BackendError):
            _ = x < x

    def test_kinds(self):
        r = LCNumber.rho(backend="rational")
        assert r.kind() is Kind.INFINITESIMAL
        assert (1 + r).kind() is Kind.FINITE
        assert (1 / r).kind() is Kind.INFINITE
        assert LCNumber.zero("rational").kind() is Kind.ZERO

    def test_standard_part(self):
        r = LCNumber.rho(backend="rational")
        assert (3 + r).standard_part().value == 3
        assert (1 / r).standard_part() == ExtendedScalar.pos_inf()
        assert (-1 / r).standard_part() == ExtendedScalar.neg_inf()
        x = LCNumber({Fraction(-1): 1j}, backend="float")
        assert x.standard_part() == ExtendedScalar.complex_inf()

    def test_monad_galaxy(self):
        r = LCNumber.rho(backend="rational")
        assert (1 + r).same_monad(1 + r * r)
        assert not (1 + r).same_monad(2 + r)
        assert (1 / r).same_galaxy(1 / r + 5)
        assert not (1 / r).same_galaxy(1 / (r * r))

    def test_vnorm(self):
        r = LCNumber.rho(backend="rational")
        assert r.vnorm() < 1 < (1 / r).vnorm()
        assert LCNumber.zero("rational").vnorm() == 0.0


class TestFormatting:
    def test_format(self):
        x = LCNumber({Fraction(-2): Fraction(3), Fraction(0): Fraction(1),
                      Fraction(1, 2): Fraction(5)}, backend="rational")
        assert format_lc(x) == "3*r^-2 + 1 + 5*r^(1/2)"


class TestVector:
    def test_sup_valuation(self):
        r = LCNumber.rho(backend="rational")
        v = LCVector([r, r * r, LCNumber.zero("rational")])
        assert v.valuation() == 1
        assert (v + v)[0] == 2 * r
        assert v.scale(r)[1] == r ** 3
