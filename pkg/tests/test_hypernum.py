import numpy as np
import pytest

from hypervekua import HyperbolicNumber, ZeroDivisor, conj, inverse, mul, to_idempotent
from hypervekua.hypernum import (J, ONE, exp, from_idempotent, hyper,
                                 modulus_squared, power)


def test_j_squared_is_one():
    assert J * J == ONE


def test_light_cone_product_vanishes():
    assert HyperbolicNumber(1, 1) * HyperbolicNumber(1, -1) == HyperbolicNumber(0, 0)


def test_product_against_modulus():
    # (2+j)(2-j) = re^2 - im^2 = 3
    z = HyperbolicNumber(2, 1)
    assert z * z.conj() == HyperbolicNumber(3, 0)
    assert modulus_squared(z) == 3


def test_mul_formula():
    a = HyperbolicNumber(1.5, -2.0)
    b = HyperbolicNumber(0.25, 3.0)
    got = mul(a, b)
    assert got.re == a.re * b.re + a.im * b.im
    assert got.im == a.re * b.im + a.im * b.re


def test_conj_examples():
    assert conj(J) == HyperbolicNumber(0, -1)
    assert conj(HyperbolicNumber(2, 3)) == HyperbolicNumber(2, -3)


def test_conj_is_multiplicative():
    rng = np.random.default_rng(42)
    for _ in range(200):
        a = HyperbolicNumber(*rng.uniform(-3, 3, 2))
        b = HyperbolicNumber(*rng.uniform(-3, 3, 2))
        lhs = conj(a * b)
        rhs = conj(a) * conj(b)
        scale = max(abs(lhs), abs(rhs), 1.0)
        assert abs(lhs - rhs) <= 1e-14 * scale


def test_mul_commutative_associative():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = HyperbolicNumber(*rng.uniform(-2, 2, 2))
        b = HyperbolicNumber(*rng.uniform(-2, 2, 2))
        c = HyperbolicNumber(*rng.uniform(-2, 2, 2))
        assert abs(a * b - b * a) == 0.0
        assert abs((a * b) * c - a * (b * c)) <= 1e-14 * max(abs((a * b) * c), 1.0)


def test_inverse_examples():
    inv = inverse(HyperbolicNumber(2, 1))
    assert abs(inv - HyperbolicNumber(2 / 3, -1 / 3)) < 1e-15
    assert abs(HyperbolicNumber(2, 1) * inv - ONE) < 1e-15
    assert inverse(ONE) == ONE


def test_inverse_round_trip_random():
    rng = np.random.default_rng(11)
    count = 0
    while count < 200:
        a = HyperbolicNumber(*rng.uniform(-5, 5, 2))
        if not a.is_invertible():
            continue
        count += 1
        residual = a * inverse(a) - ONE
        assert abs(residual) <= 1e-12


@pytest.mark.parametrize("bad", [
    HyperbolicNumber(1, 1),
    HyperbolicNumber(-2, 2),
    HyperbolicNumber(0, 0),
    HyperbolicNumber(3.0, 3.0 * (1 + 5e-15)),  # inside the relative guard band
])
def test_zero_divisors_rejected(bad):
    assert bad.is_zero_divisor()
    with pytest.raises(ZeroDivisor):
        inverse(bad)


def test_idempotent_examples():
    assert to_idempotent(ONE).p == 1 and to_idempotent(ONE).q == 1
    assert to_idempotent(J).p == 1 and to_idempotent(J).q == -1
    c = to_idempotent(HyperbolicNumber(2, 1))
    assert (c.p, c.q) == (3, 1)


def test_idempotent_round_trip_dyadic():
    # dyadic components round-trip without rounding
    for re, im in [(0.5, 0.25), (3.0, -1.5), (-2.25, 0.125)]:
        z = HyperbolicNumber(re, im)
        assert from_idempotent(to_idempotent(z)) == z


def test_idempotent_round_trip_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        z = HyperbolicNumber(*rng.uniform(-4, 4, 2))
        back = from_idempotent(to_idempotent(z))
        assert abs(back - z) <= 4e-16 * max(abs(z), 1.0)


def test_idempotent_multiplication_componentwise():
    rng = np.random.default_rng(17)
    for _ in range(200):
        a = HyperbolicNumber(*rng.uniform(-3, 3, 2))
        b = HyperbolicNumber(*rng.uniform(-3, 3, 2))
        ca = to_idempotent(a)
        cb = to_idempotent(b)
        cab = to_idempotent(a * b)
        scale = max(abs(cab.p), abs(cab.q), 1.0)
        assert abs(cab.p - ca.p * cb.p) <= 1e-14 * scale
        assert abs(cab.q - ca.q * cb.q) <= 1e-14 * scale


def test_invertible_iff_idempotent_components_nonzero():
    rng = np.random.default_rng(23)
    samples = [HyperbolicNumber(*rng.uniform(-3, 3, 2)) for _ in range(100)]
    samples += [HyperbolicNumber(1, 1), HyperbolicNumber(-1, 1),
                HyperbolicNumber(0, 0), HyperbolicNumber(2, -2)]
    for z in samples:
        c = to_idempotent(z)
        frame = 1e-14 * max(abs(z), 1.0)
        expect = abs(c.p) > frame and abs(c.q) > frame
        assert z.is_invertible() == expect


def test_division_uses_inverse():
    a = HyperbolicNumber(3, 1)
    b = HyperbolicNumber(2, 1)
    assert abs(a / b * b - a) <= 1e-14
    with pytest.raises(ZeroDivisor):
        a / HyperbolicNumber(1, 1)


def test_exp_addition_law_on_j_axis():
    t1, t2 = 0.3, -0.8
    lhs = exp(HyperbolicNumber(0, t1)) * exp(HyperbolicNumber(0, t2))
    rhs = exp(HyperbolicNumber(0, t1 + t2))
    assert abs(lhs - rhs) < 1e-14


def test_power_matches_repeated_mul():
    z = HyperbolicNumber(0.7, -0.4)
    acc = ONE
    for n in range(6):
        assert abs(power(z, n) - acc) == 0.0
        acc = acc * z


def test_json_pair_serialization():
    z = HyperbolicNumber(1.25, -3.5)
    assert z.to_json_pair() == [1.25, -3.5]
    assert HyperbolicNumber.from_json_pair([1.25, -3.5]) == z


def test_hyper_coercions():
    assert hyper(2) == HyperbolicNumber(2, 0)
    assert hyper((1, 2)) == HyperbolicNumber(1, 2)
    assert hyper(HyperbolicNumber(1, 1)) == HyperbolicNumber(1, 1)
    assert 2.0 * J == HyperbolicNumber(0, 2)
    assert 1 + J == HyperbolicNumber(1, 1)
