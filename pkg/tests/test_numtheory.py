import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from primelearn.numtheory import (
    FactoredInteger,
    FunctionId,
    RadicalProduct,
    bit_class,
    bit_size,
    count_multiplicity_vectors,
    eval_f,
    factorize,
    is_prime,
    iroot,
    multiplicity_vectors,
    omega_table,
    pi_omega_exact,
    prime_power_decompose,
    primes_below,
    primes_in_bit_class,
    random_prime,
)


def trial_division_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


# --- primality


@pytest.mark.parametrize("n,expected", [(2, True), (1, False), (0, False), (2**31 - 1, True)])
def test_is_prime_examples(n, expected):
    assert is_prime(n) is expected


def test_mersenne_cross_check_by_trial_division():
    assert trial_division_prime(2**31 - 1)


def test_is_prime_matches_trial_division_below_20000():
    assert [n for n in range(20000) if is_prime(n)] == [n for n in range(20000) if trial_division_prime(n)]


@pytest.mark.parametrize(
    "n,expected",
    [
        (3215031751, False),  # strong pseudoprime to bases 2, 3, 5, 7
        (3825123056546413051, False),  # fools the first nine prime bases
        (2**61 - 1, True),
        (2**64 - 59, True),  # largest prime below 2**64
        (2**89 - 1, True),
        (2**127 - 1, True),
        ((2**61 - 1) * (2**89 - 1), False),
    ],
)
def test_is_prime_hard_cases(n, expected):
    assert is_prime(n) is expected


@given(st.integers(min_value=2, max_value=10**6), st.integers(min_value=2, max_value=10**6))
def test_products_are_composite(a, b):
    assert not is_prime(a * b)


# --- bit sizes


def test_bit_size_convention():
    assert [bit_size(x) for x in (1, 2, 3, 4, 5, 8, 9, 16, 17)] == [1, 1, 2, 2, 3, 3, 4, 4, 5]
    assert bit_class(2) == 2 and bit_class(3) == 2 and bit_class(5) == 3 and bit_class(13) == 4
    with pytest.raises(ValueError):
        bit_size(0)


def test_bit_classes():
    assert primes_in_bit_class(2) == (2, 3)
    assert primes_in_bit_class(3) == (5, 7)
    assert primes_in_bit_class(4) == (11, 13)
    assert len(primes_in_bit_class(8)) == sum(1 for p in range(128, 256) if trial_division_prime(p))


# --- random primes


@pytest.mark.parametrize("j,allowed", [(2, {2, 3}), (3, {5, 7}), (4, {11, 13})])
def test_random_prime_small_classes(j, allowed):
    rng = random.Random(j)
    counts = Counter(random_prime(j, rng) for _ in range(4000))
    assert set(counts) == allowed
    for p in allowed:
        assert abs(counts[p] / 4000 - 1 / len(allowed)) < 0.05


@pytest.mark.parametrize("j", [3, 4, 5])
def test_random_prime_uniform_chi_square(j):
    rng = random.Random(100 + j)
    support = primes_in_bit_class(j)
    counts = Counter(random_prime(j, rng) for _ in range(100_000))
    assert set(counts) == set(support)
    assert chisquare([counts[p] for p in support]).pvalue > 0.001


def test_random_prime_large_bits_lands_in_class():
    rng = random.Random(5)
    for j in (16, 40, 64, 100):
        p = random_prime(j, rng)
        assert 2 ** (j - 1) <= p < 2**j and is_prime(p)
        assert math.ceil(math.log2(p + 1)) == j


def test_random_prime_rejects_bad_bits():
    with pytest.raises(ValueError):
        random_prime(1, random.Random(0))


# --- factorization


@pytest.mark.parametrize(
    "n,primes,mults",
    [(12, (2, 3), (2, 1)), (97, (97,), (1,)), (5184, (2, 3), (6, 4)), (2**10, (2,), (10,))],
)
def test_factorize_examples(n, primes, mults):
    fx = factorize(n)
    assert (fx.value, fx.primes, fx.mults) == (n, primes, mults)


def test_factorize_large_semiprimes():
    p, q = 2**61 - 1, 1000000007
    assert factorize(p * q).primes == (q, p)
    n = (2**31 - 1) ** 2 * 65537 * 3
    fx = factorize(n)
    assert fx.primes == (3, 65537, 2**31 - 1) and fx.mults == (1, 1, 2)


@pytest.mark.parametrize("n", [0, 1, 2**128 + 1])
def test_factorize_range(n):
    with pytest.raises(ValueError):
        factorize(n)


@settings(max_examples=300)
@given(st.integers(min_value=2, max_value=2**64))
def test_factorize_round_trip(n):
    fx = factorize(n)
    assert math.prod(p**r for p, r in zip(fx.primes, fx.mults)) == n
    assert list(fx.primes) == sorted(set(fx.primes))
    assert fx.check_primes()


def test_factored_integer_validation():
    with pytest.raises(ValueError):
        FactoredInteger(12, (3, 2), (1, 2))
    with pytest.raises(ValueError):
        FactoredInteger(13, (2, 3), (2, 1))
    assert FactoredInteger.from_parts([3, 2], [1, 2]) == FactoredInteger(12, (2, 3), (2, 1))


# --- prime powers and roots


@pytest.mark.parametrize("z,expected", [(9, (3, 2)), (12, None), (1024, (2, 10)), (7, (7, 1)), (36, None)])
def test_prime_power_decompose_examples(z, expected):
    assert prime_power_decompose(z) == expected


def test_prime_power_decompose_all_small_prime_powers():
    for p in primes_below(1 << 10):
        for r in range(1, 21):
            assert prime_power_decompose(p**r) == (p, r)


@given(st.integers(min_value=0, max_value=2**200), st.integers(min_value=1, max_value=12))
def test_iroot_floor(n, k):
    r = iroot(n, k)
    assert r**k <= n < (r + 1) ** k


# --- the three functions


def test_eval_f_examples():
    assert eval_f(FunctionId.F1, factorize(12)) == 5
    assert eval_f("f2", factorize(30)) == 30
    assert eval_f("f3", factorize(12)) == 12
    assert eval_f("f3", factorize(16)) == 4


def test_f3_three_primes_is_exact_radical():
    v = eval_f("f3", factorize(30))
    assert isinstance(v, RadicalProduct) and not v.is_integer
    assert v.terms == ((2, Fraction(2)), (3, Fraction(1)), (5, Fraction(1, 2)))
    assert abs(float(v) - 12 * math.sqrt(5)) < 1e-12
    assert str(v.evaluate(30)).startswith("26.8328157299974763569")


@given(st.integers(min_value=6, max_value=10**7))
def test_two_prime_identities(x):
    fx = factorize(x)
    if fx.omega != 2:
        return
    p1, p2 = fx.primes
    assert eval_f("f3", fx) == p1 * p1 * p2
    assert x % eval_f("f2", fx) == 0


# --- counting


@pytest.mark.parametrize("m,omega,expected", [(4, 1, 10), (4, 2, 5), (4, 5, 0)])
def test_pi_omega_examples(m, omega, expected):
    assert pi_omega_exact(m, omega) == expected


def test_pi_omega_range():
    with pytest.raises(ValueError):
        pi_omega_exact(25, 1)


def test_omega_table_matches_factorize():
    tab = omega_table(5000)
    assert all(tab[n] == factorize(n).omega for n in range(2, 5001))


@pytest.mark.parametrize("primes,m,expected", [([2, 3], 4, 2), ([2, 3], 10, 24), ([2], 5, 5), ([5, 7], 5, 0)])
def test_count_multiplicity_examples(primes, m, expected):
    assert count_multiplicity_vectors(primes, m).count == expected


def _has_exactly(x, primes):
    for p in primes:
        if x % p:
            return False
        while x % p == 0:
            x //= p
    return x == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(primes_below(60)), min_size=1, max_size=3, unique=True), st.integers(2, 14))
def test_count_multiplicity_brute_force(primes, m):
    primes = sorted(primes)
    brute = sum(_has_exactly(x, primes) for x in range(2, 2**m + 1))
    assert count_multiplicity_vectors(primes, m).count == brute
    for r in multiplicity_vectors(primes, m):
        assert math.prod(p**e for p, e in zip(primes, r)) <= 2**m


def test_lemma3_volume_ratio_trend():
    rng = random.Random(11)
    ps = primes_below(256)
    for _ in range(10):
        pair = sorted(rng.sample(ps, 2))
        ratios = [count_multiplicity_vectors(pair, m).ratio for m in (16, 24, 32, 48, 96)]
        assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
        assert 0.5 <= count_multiplicity_vectors(pair, 96).ratio <= 2.0
