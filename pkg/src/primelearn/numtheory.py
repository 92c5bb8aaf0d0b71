"""Integer primitives and exact evaluation of the factorization-derived functions.

Everything here works on Python ints, so values are exact at any size.  The
sieve-backed helpers (``primes_below``, ``omega_table``) use numpy and are only
meant for the small ranges the tests and the sampler's exact tables need.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "FunctionId",
    "FactoredInteger",
    "RadicalProduct",
    "MultiplicityCount",
    "RetryLimitExceeded",
    "bit_size",
    "bit_class",
    "is_prime",
    "iroot",
    "random_prime",
    "factorize",
    "prime_power_decompose",
    "eval_f",
    "primes_below",
    "primes_in_bit_class",
    "omega_table",
    "pi_omega_exact",
    "multiplicity_vectors",
    "count_multiplicity_vectors",
]

FACTORIZE_LIMIT = 1 << 128
PI_OMEGA_MAX_M = 24


class RetryLimitExceeded(RuntimeError):
    """A rejection loop ran past its cap; points at an RNG or parameter fault."""


class FunctionId(str, enum.Enum):
    F1 = "f1"  # sum of the distinct primes
    F2 = "f2"  # product of the distinct primes
    F3 = "f3"  # nested radical, raised to the 4th power

    @classmethod
    def parse(cls, name: str | FunctionId) -> FunctionId:
        if isinstance(name, cls):
            return name
        return cls(str(name).lower())


def bit_size(x: int) -> int:
    """Input size b(x) = ceil(log2 x) for x >= 2, with b(1) = 1."""
    if x < 1:
        raise ValueError(f"bit_size needs a positive integer, got {x}")
    if x == 1:
        return 1
    return (x - 1).bit_length()


def bit_class(p: int) -> int:
    """Bit class of a prime: j such that 2**(j-1) <= p < 2**j.

    Agrees with ``bit_size`` on odd primes; for 2 (binary ``10``) it is 2.
    """
    return p.bit_length()


# ---------------------------------------------------------------------------
# primality

_SMALL_LIMIT = 1 << 16
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)  # deterministic below 3.3e24
_EXTRA_ROUNDS = 40  # 4**-40 = 2**-80


@lru_cache(maxsize=None)
def _sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def primes_below(n: int) -> list[int]:
    """All primes p < n (sieve of Eratosthenes)."""
    if n <= 2:
        return []
    flags = _sieve(n - 1)
    return np.flatnonzero(flags).tolist()


_SMALL_FLAGS = _sieve(_SMALL_LIMIT)
_SMALL_PRIMES = tuple(np.flatnonzero(_SMALL_FLAGS).tolist())


def _is_strong_probable_prime(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 2**64, error <= 2**-80 above."""
    if n <= _SMALL_LIMIT:
        return n >= 0 and bool(_SMALL_FLAGS[n])
    for p in _SMALL_PRIMES[:50]:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if not all(_is_strong_probable_prime(n, a, d, s) for a in _MR_BASES):
        return False
    if n < (1 << 64):
        return True
    rng = random.Random(n)
    return all(
        _is_strong_probable_prime(n, rng.randrange(2, n - 1), d, s) for _ in range(_EXTRA_ROUNDS)
    )


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def random_prime(bits: int, rng: random.Random, max_tries: int | None = None) -> int:
    """Uniform prime from the bit class [2**(bits-1), 2**bits).

    Odd candidates are drawn uniformly and kept on the first prime hit.
    """
    if bits < 2:
        raise ValueError("no primes with fewer than 2 bits")
    if bits == 2:
        return rng.choice((2, 3))
    lo, hi = (1 << (bits - 1)) + 1, 1 << bits
    cap = max_tries if max_tries is not None else 100 * bits
    for _ in range(cap):
        candidate = rng.randrange(lo, hi, 2)
        if is_prime(candidate):
            return candidate
    raise RetryLimitExceeded(f"no {bits}-bit prime after {cap} candidates")


@lru_cache(maxsize=64)
def primes_in_bit_class(j: int) -> tuple[int, ...]:
    """Sorted tuple of all j-bit primes (sieve; keep j small)."""
    if j < 2:
        return ()
    if j > 26:
        raise ValueError(f"bit class {j} too large to enumerate")
    lo = 1 << (j - 1)
    return tuple(p for p in primes_below(1 << j) if p >= lo)


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class FactoredInteger:
    """An integer with its ascending distinct primes and their multiplicities."""

    value: int
    primes: tuple[int, ...]
    mults: tuple[int, ...]

    def __post_init__(self):
        if len(self.primes) != len(self.mults):
            raise ValueError("primes and mults differ in length")
        if any(b <= a for a, b in zip(self.primes, self.primes[1:])):
            raise ValueError(f"primes must be strictly increasing: {self.primes}")
        if any(r < 1 for r in self.mults):
            raise ValueError(f"multiplicities must be positive: {self.mults}")
        if math.prod(p**r for p, r in zip(self.primes, self.mults)) != self.value:
            raise ValueError(f"{self.primes}^{self.mults} does not multiply to {self.value}")

    @classmethod
    def from_parts(cls, primes: Sequence[int], mults: Sequence[int]) -> FactoredInteger:
        pairs = sorted(zip(primes, mults))
        ps = tuple(p for p, _ in pairs)
        rs = tuple(r for _, r in pairs)
        return cls(math.prod(p**r for p, r in pairs), ps, rs)

    @property
    def omega(self) -> int:
        return len(self.primes)

    @property
    def bits(self) -> int:
        return bit_size(self.value)

    def check_primes(self) -> bool:
        return all(is_prime(p) for p in self.primes)


def _pollard_brent(n: int, rng: random.Random) -> int:
    """A non-trivial factor of an odd composite n."""
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split(n: int, rng: random.Random, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    root = prime_power_decompose(n)
    if root is not None:
        p, r = root
        out[p] = out.get(p, 0) + r
        return
    d = _pollard_brent(n, rng)
    _split(d, rng, out)
    _split(n // d, rng, out)


@lru_cache(maxsize=1 << 16)
def factorize(n: int) -> FactoredInteger:
    """Full factorization by trial division below 2**16, then Pollard-Brent rho."""
    if not 2 <= n <= FACTORIZE_LIMIT:
        raise ValueError(f"factorize supports 2 <= n <= 2**128, got {n}")
    found: dict[int, int] = {}
    rest = n
    for p in _SMALL_PRIMES:
        if p * p > rest:
            break
        if rest % p == 0:
            r = 0
            while rest % p == 0:
                rest //= p
                r += 1
            found[p] = r
    if rest > 1:
        _split(rest, random.Random(n), found)
    primes = sorted(found)
    return FactoredInteger(n, tuple(primes), tuple(found[p] for p in primes))


def prime_power_decompose(z: int) -> tuple[int, int] | None:
    """(p, r) with z == p**r and p prime, or None when z is not a prime power."""
    if z < 2:
        return None
    for k in range(z.bit_length() - 1 if z > 2 else 1, 0, -1):
        root = iroot(z, k)
        if root >= 2 and root**k == z and is_prime(root):
            return root, k
    return None


# ---------------------------------------------------------------------------
# the three functions


@dataclass(frozen=True)
class RadicalProduct:
    """Exact product prod p_i**e_i with dyadic rational exponents.

    This is what f3 evaluates to once there are three or more distinct primes.
    """

    terms: tuple[tuple[int, Fraction], ...]

    @property
    def is_integer(self) -> bool:
        return all(e.denominator == 1 for _, e in self.terms)

    def __int__(self) -> int:
        if not self.is_integer:
            raise ValueError("f3 value is not an integer")
        return math.prod(p ** int(e) for p, e in self.terms)

    def evaluate(self, digits: int = 50) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = digits + 10
            total = Decimal(1)
            for p, e in self.terms:
                total *= Decimal(p) ** (Decimal(e.numerator) / Decimal(e.denominator))
            ctx.prec = digits
            return +total

    def to_fraction(self, digits: int = 50) -> Fraction:
        return Fraction(self.evaluate(digits))

    def __float__(self) -> float:
        return float(self.evaluate(20))


def eval_f(fn: FunctionId | str, fx: FactoredInteger) -> int | RadicalProduct:
    """Exact f1 / f2 / f3 of a factored integer.

    f3 = prod p_i ** 2**(2-i) with primes ascending; an int whenever omega <= 2.
    """
    fn = FunctionId.parse(fn)
    if fn is FunctionId.F1:
        return sum(fx.primes)
    if fn is FunctionId.F2:
        return math.prod(fx.primes)
    terms = tuple((p, Fraction(4, 2 ** (i + 1))) for i, p in enumerate(fx.primes))
    value = RadicalProduct(terms)
    return int(value) if value.is_integer else value


# ---------------------------------------------------------------------------
# counting


@lru_cache(maxsize=4)
def omega_table(limit: int) -> np.ndarray:
    """omega(n) for 0 <= n <= limit, built from a smallest-prime-factor sieve."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.arange(limit + 1)
    unset = spf == 0
    spf[unset] = idx[unset]
    spf[:2] = 0
    omega = np.zeros(limit + 1, dtype=np.int8)
    lo = 2
    # n // spf(n) <= n / 2 < lo inside [lo, 2 lo), so each dyadic block only reads finished entries
    while lo <= limit:
        hi = min(2 * lo, limit + 1)
        n = idx[lo:hi]
        s = spf[lo:hi]
        rest = n // s
        omega[lo:hi] = omega[rest] + (spf[rest] != s)
        lo = hi
    return omega


def pi_omega_exact(m: int, omega: int) -> int:
    """Number of 2 <= n <= 2**m with exactly ``omega`` distinct prime factors."""
    if not 1 <= m <= PI_OMEGA_MAX_M:
        raise ValueError(f"pi_omega_exact supports 1 <= m <= {PI_OMEGA_MAX_M}, got {m}")
    if omega < 1:
        raise ValueError("omega must be >= 1")
    table = omega_table(1 << m)
    return int(np.count_nonzero(table[2:] == omega))


class MultiplicityCount(NamedTuple):
    count: int
    volume: float

    @property
    def ratio(self) -> float:
        return self.count / self.volume


def multiplicity_vectors(primes: Sequence[int], m: int) -> Iterator[tuple[int, ...]]:
    """All r >= 1 (componentwise) with prod p_i**r_i <= 2**m, lexicographic order."""
    budget = 1 << m

    def rec(i: int, remaining: int) -> Iterator[tuple[int, ...]]:
        if i == len(primes):
            yield ()
            return
        # reserve room for one copy of each later prime
        reserve = math.prod(primes[i + 1 :])
        power, r = primes[i], 1
        while power * reserve <= remaining:
            for tail in rec(i + 1, remaining // power):
                yield (r, *tail)
            power *= primes[i]
            r += 1

    if not primes:
        return iter(())
    return rec(0, budget)


def count_multiplicity_vectors(primes: Sequence[int], m: int) -> MultiplicityCount:
    """Exact |N_{p1..pw}(2**m)| together with its simplex-volume approximation."""
    count = sum(1 for _ in multiplicity_vectors(primes, m))
    w = len(primes)
    volume = m**w / math.factorial(w) / math.prod(math.log2(p) for p in primes) if w else 0.0
    return MultiplicityCount(count, volume)
