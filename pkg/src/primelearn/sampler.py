"""Classical generator of factored integers, near-uniform over {x <= 2**m : 1 <= omega(x) <= K}.

A draw runs three steps and restarts from the first one on rejection:

1. the number of distinct primes, with Landau-style weights (ln m)**(w-1)/(w-1)!;
2. a non-decreasing vector of prime bit lengths, then uniform primes of those lengths;
   the draw is rejected if the primes multiply past 2**m;
3. a multiplicity vector, uniform over all that keep the product <= 2**m.

``exact_pmf`` expands the same three steps exhaustively for small m so the
sampler can be checked against its own distribution.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .numtheory import (
    FactoredInteger,
    RetryLimitExceeded,
    bit_class,
    multiplicity_vectors,
    omega_table,
    primes_in_bit_class,
    random_prime,
)

__all__ = [
    "SamplerConfig",
    "StepTwoTables",
    "Sampler",
    "threshold_c_K",
    "omega_weights",
    "sample_omega",
    "compute_step_two_tables",
    "enumerate_bitlength_vectors",
    "sample_primes_for_l",
    "sample_multiplicities",
    "generate_factored_sample",
    "exact_pmf",
    "support",
]

EXACT_PMF_MAX_M = 12
EXACT_PMF_MAX_K = 3
# Rosser-Schoenfeld style constants for the j-bit prime count bounds
_LOWER_A, _LOWER_B = Fraction(37, 100), Fraction(1)
_UPPER_A, _UPPER_B = Fraction(76, 100), Fraction(126, 100)


@dataclass(frozen=True)
class SamplerConfig:
    m: int
    K: int = 2
    seed: int = 0
    max_rejections: int = 1000
    omega_log_base: float = math.e
    log_m_override: float | None = None  # test hook: replaces log(m) in the step-1 weights

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be positive")

    @property
    def log_m(self) -> float:
        if self.log_m_override is not None:
            return self.log_m_override
        return math.log(self.m, self.omega_log_base)


# ---------------------------------------------------------------------------
# step 1


def omega_weights(cfg: SamplerConfig) -> list[float]:
    """Unnormalized weights (log m)**(w-1)/(w-1)! for w = 1..K."""
    lm = cfg.log_m
    return [lm ** (w - 1) / math.factorial(w - 1) for w in range(1, cfg.K + 1)]


def _inverse_cdf(cumulative: Sequence[float], rng: random.Random) -> int:
    return bisect.bisect_right(cumulative, rng.random() * cumulative[-1])


def sample_omega(cfg: SamplerConfig, rng: random.Random) -> int:
    cumulative = list(itertools.accumulate(omega_weights(cfg)))
    return 1 + _inverse_cdf(cumulative, rng)


# ---------------------------------------------------------------------------
# step 2


def _lower_count(j: int) -> int:
    return math.floor((1 << j) * (_LOWER_A * j - _LOWER_B) / (j * (j - 1)))


def _upper_count(j: int) -> int:
    return math.ceil((1 << j) * (_UPPER_A * j - _UPPER_B) / (j * (j - 1)))


def threshold_c_K(K: int) -> int:
    """C_K = max(6, c_K), c_K the least c with K <= floor(2**c (0.37c - 1)/(c(c-1)))."""
    c = 2
    while _lower_count(c) < K:
        c += 1
    return max(6, c)


@dataclass(frozen=True)
class StepTwoTables:
    C_K: int
    exact_counts: dict[int, int]
    upper_counts: dict[int, int]

    def class_count(self, j: int) -> int:
        """Count used in the step-2 binomials: exact below C_K, upper bound from C_K on."""
        if j < self.C_K:
            return self.exact_counts[j]
        return self.upper_counts[j]


def compute_step_two_tables(cfg: SamplerConfig) -> StepTwoTables:
    C_K = threshold_c_K(cfg.K)
    exact = {j: len(primes_in_bit_class(j)) for j in range(2, C_K)}
    # bit lengths can reach m + K - 2(K - 1) <= m + 1; cover m + K for safety
    upper = {j: _upper_count(j) for j in range(C_K, cfg.m + cfg.K + 1)}
    return StepTwoTables(C_K, exact, upper)


def _length_weight(l: Sequence[int], tables: StepTwoTables) -> float:
    weight = 1.0
    for j, v in Counter(l).items():
        weight *= math.comb(tables.class_count(j), v) / j**v
    return weight


def enumerate_bitlength_vectors(
    cfg: SamplerConfig, omega: int, tables: StepTwoTables
) -> list[tuple[tuple[int, ...], float]]:
    """Every admissible non-decreasing length vector with its unnormalized weight.

    Admissible: entries >= 2, sum <= m + omega, and no bit class below C_K asked
    for more distinct primes than it holds.
    """
    if not 1 <= omega <= cfg.K:
        raise ValueError(f"omega must lie in [1, {cfg.K}], got {omega}")
    budget = cfg.m + omega
    out: list[tuple[tuple[int, ...], float]] = []

    def rec(prefix: list[int], start: int, remaining: int, left: int) -> None:
        if left == 0:
            l = tuple(prefix)
            counts = Counter(l)
            if all(j >= tables.C_K or v <= tables.exact_counts[j] for j, v in counts.items()):
                out.append((l, _length_weight(l, tables)))
            return
        for j in range(start, remaining - 2 * (left - 1) + 1):
            prefix.append(j)
            rec(prefix, j, remaining - j, left - 1)
            prefix.pop()

    rec([], 2, budget, omega)
    if not out:
        raise ValueError(f"no admissible bit-length vectors for m={cfg.m}, omega={omega}")
    return out


def sample_primes_for_l(
    l: Sequence[int], rng: random.Random, max_retries: int = 1000
) -> tuple[int, ...]:
    """Distinct uniform primes with the requested bit lengths, sorted ascending."""
    chosen: list[int] = []
    for j, v in sorted(Counter(l).items()):
        picked: set[int] = set()
        tries = 0
        while len(picked) < v:
            if tries >= max_retries:
                raise RetryLimitExceeded(f"could not draw {v} distinct {j}-bit primes")
            picked.add(random_prime(j, rng))
            tries += 1
        chosen.extend(picked)
    return tuple(sorted(chosen))


# ---------------------------------------------------------------------------
# step 3


@lru_cache(maxsize=1 << 15)
def _multiplicity_table(primes: tuple[int, ...], m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(multiplicity_vectors(primes, m))


def sample_multiplicities(primes: Sequence[int], m: int, rng: random.Random) -> tuple[int, ...]:
    vectors = _multiplicity_table(tuple(primes), m)
    if not vectors:
        raise ValueError(f"primes {tuple(primes)} already exceed 2**{m}")
    return vectors[rng.randrange(len(vectors))]


# ---------------------------------------------------------------------------
# full generator


@dataclass
class Sampler:
    """Precomputed tables for one configuration, plus attempt/rejection counters."""

    cfg: SamplerConfig
    tables: StepTwoTables = field(init=False)
    attempts: int = field(default=0, init=False)
    rejections: int = field(default=0, init=False)

    def __post_init__(self):
        self.tables = compute_step_two_tables(self.cfg)
        self._omega_cdf = list(itertools.accumulate(omega_weights(self.cfg)))
        self._vectors: dict[int, list[tuple[int, ...]]] = {}
        self._cdfs: dict[int, list[float]] = {}

    def length_distribution(self, omega: int) -> list[tuple[tuple[int, ...], float]]:
        return enumerate_bitlength_vectors(self.cfg, omega, self.tables)

    def sample_l(self, omega: int, rng: random.Random) -> tuple[int, ...]:
        if omega not in self._vectors:
            weighted = self.length_distribution(omega)
            self._vectors[omega] = [l for l, _ in weighted]
            self._cdfs[omega] = list(itertools.accumulate(w for _, w in weighted))
        return self._vectors[omega][_inverse_cdf(self._cdfs[omega], rng)]

    def attempt(self, rng: random.Random) -> FactoredInteger | None:
        """One pass through the three steps; None when the prime product overshoots 2**m."""
        self.attempts += 1
        omega = 1 + _inverse_cdf(self._omega_cdf, rng)
        primes = sample_primes_for_l(self.sample_l(omega, rng), rng)
        if math.prod(primes) > 1 << self.cfg.m:
            self.rejections += 1
            return None
        mults = sample_multiplicities(primes, self.cfg.m, rng)
        return FactoredInteger.from_parts(primes, mults)

    def draw(self, rng: random.Random) -> FactoredInteger:
        for _ in range(self.cfg.max_rejections + 1):
            sample = self.attempt(rng)
            if sample is not None:
                return sample
        raise RetryLimitExceeded(
            f"{self.cfg.max_rejections} consecutive rejections at m={self.cfg.m}, K={self.cfg.K}"
        )

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.attempts if self.attempts else 0.0


@lru_cache(maxsize=32)
def _cached_sampler(cfg: SamplerConfig) -> Sampler:
    return Sampler(cfg)


def generate_factored_sample(cfg: SamplerConfig, rng: random.Random) -> FactoredInteger:
    return _cached_sampler(cfg).draw(rng)


# ---------------------------------------------------------------------------
# exact distribution


def _prime_sets(classes: list[tuple[int, int]], limit: int):
    """Yield (primes, probability) for every choice of distinct per-class subsets
    whose product stays <= limit.  Subsets within a class are uniform."""

    def rec(i: int, partial: tuple[int, ...], prod: int, prob: float):
        if i == len(classes):
            yield partial, prob
            return
        j, v = classes[i]
        pool = primes_in_bit_class(j)
        p_subset = prob / math.comb(len(pool), v)
        for subset in itertools.combinations(pool, v):
            new_prod = prod * math.prod(subset)
            if new_prod > limit:
                # pool is ascending, so later subsets in lexicographic order may still fit
                continue
            yield from rec(i + 1, partial + subset, new_prod, p_subset)

    yield from rec(0, (), 1, 1.0)


def exact_pmf(cfg: SamplerConfig) -> dict[int, float]:
    """Probability of each x under the generator, conditioned on acceptance."""
    if not (cfg.m <= EXACT_PMF_MAX_M and cfg.K <= EXACT_PMF_MAX_K):
        raise ValueError(
            f"exact_pmf supports m <= {EXACT_PMF_MAX_M}, K <= {EXACT_PMF_MAX_K}; got m={cfg.m}, K={cfg.K}"
        )
    tables = compute_step_two_tables(cfg)
    w_omega = omega_weights(cfg)
    total_omega = math.fsum(w_omega)
    limit = 1 << cfg.m
    mass: dict[int, float] = {}
    for omega in range(1, cfg.K + 1):
        p_omega = w_omega[omega - 1] / total_omega
        weighted = enumerate_bitlength_vectors(cfg, omega, tables)
        total_l = math.fsum(w for _, w in weighted)
        for l, w in weighted:
            classes = sorted(Counter(l).items())
            for primes, p_set in _prime_sets(classes, limit):
                primes = tuple(sorted(primes))
                vectors = _multiplicity_table(primes, cfg.m)
                share = p_omega * (w / total_l) * p_set / len(vectors)
                for r in vectors:
                    x = math.prod(p**e for p, e in zip(primes, r))
                    mass[x] = mass.get(x, 0.0) + share
    accepted = math.fsum(mass.values())
    return {x: p / accepted for x, p in sorted(mass.items())}


def exact_rejection_probability(cfg: SamplerConfig) -> float:
    """1 - P(accept) for a single attempt, by the same expansion as ``exact_pmf``."""
    tables = compute_step_two_tables(cfg)
    w_omega = omega_weights(cfg)
    total_omega = math.fsum(w_omega)
    accepted = 0.0
    for omega in range(1, cfg.K + 1):
        weighted = enumerate_bitlength_vectors(cfg, omega, tables)
        total_l = math.fsum(w for _, w in weighted)
        for l, w in weighted:
            p_fit = math.fsum(p for _, p in _prime_sets(sorted(Counter(l).items()), 1 << cfg.m))
            accepted += w_omega[omega - 1] / total_omega * w / total_l * p_fit
    return 1.0 - accepted


def support(m: int, K: int) -> set[int]:
    """{2 <= x <= 2**m : omega(x) <= K}, read off the smallest-prime-factor sieve."""
    table = omega_table(1 << m)
    return set((np.flatnonzero((table >= 1) & (table <= K))).tolist())


def bit_length_vector(primes: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(bit_class(p) for p in primes))
