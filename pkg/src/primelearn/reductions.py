"""Recover a prime factor of x = p1**r1 * p2**r2 from noisy estimates of f1, or of f2 and f3.

Both reductions walk the integers around the rounded estimate (centre, then one
step down, one up, ...) and try to verify each candidate as the true function
value.  Verification hands back a prime dividing x, so a returned factor is
always checked and never trusted from the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .numtheory import bit_size, factorize, iroot, is_prime, prime_power_decompose
from .oracles import Estimate, OracleModel, query

__all__ = [
    "ReductionResult",
    "candidate_count",
    "candidate_values",
    "root_search_f1",
    "factor_via_f1",
    "factor_via_f2_f3",
    "is_two_prime_form",
]


@dataclass(frozen=True)
class ReductionResult:
    factor: int | None
    candidates_tried: int
    guessed_exponents: tuple[int, int] | None = None
    elapsed_iterations: int = 0
    estimates_used: int = 1
    two_prime_form: bool | None = None

    @property
    def found(self) -> bool:
        return self.factor is not None


def is_two_prime_form(x: int) -> bool:
    return x >= 6 and factorize(x).omega == 2


def candidate_count(c: float, u: float, x: int) -> int:
    """Number of candidates examined: ceil(2 c b(x)**u) + 1."""
    return math.ceil(2 * c * bit_size(x) ** u) + 1


def _round_half_up(value: Estimate) -> int:
    return math.floor(Fraction(value) + Fraction(1, 2))


def candidate_values(fhat: Estimate, c: float, u: float, x: int) -> Iterator[int]:
    """round(fhat), then the update f <- f + (-1)**k k for k = 1, 2, ...

    That zig-zags outward (6, 5, 7, 4, 8, ... around 6), so within 2d + 1
    yields every integer at distance <= d from the centre has appeared.
    """
    f = _round_half_up(fhat)
    yield f
    for k in range(1, candidate_count(c, u, x)):
        f += k if k % 2 == 0 else -k
        yield f


# ---------------------------------------------------------------------------
# f1: two roots of u**a (f - u)**b = x**(1/g)


def _rising_crossing(
    a: int, b: int, f: int, hi: int, target: int, guess: int | None = None
) -> tuple[int | None, int]:
    """Smallest t in [1, hi] with t**a (f - t)**b >= target, or None.

    The polynomial rises on [1, hi] (hi <= a f / (a + b)).  Binary search on
    exact integers; a ``guess`` (the answer for a neighbouring candidate) only
    seeds the bracket, by galloping away from it until the crossing is
    enclosed.  Returns (t, bisection steps).
    """
    if hi < 1 or hi**a * (f - hi) ** b < target:
        return None, 0
    if (f - 1) ** b >= target:
        return 1, 0
    lo, steps = 1, 0
    # invariant: q(lo) < target <= q(hi)
    if guess is not None and lo < guess < hi:
        step = 1
        if guess**a * (f - guess) ** b >= target:
            hi = guess
            while hi - step > lo:
                t = hi - step
                steps += 1
                if t**a * (f - t) ** b >= target:
                    hi, step = t, 2 * step
                else:
                    lo = t
                    break
        else:
            lo = guess
            while lo + step < hi:
                t = lo + step
                steps += 1
                if t**a * (f - t) ** b < target:
                    lo, step = t, 2 * step
                else:
                    hi = t
                    break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        steps += 1
        if mid**a * (f - mid) ** b >= target:
            hi = mid
        else:
            lo = mid
    return hi, steps


def _exact_root(x: int, g: int) -> int | None:
    root = iroot(x, g)
    return root if root**g == x else None


def _root_search(
    ftilde: int,
    x: int,
    r1: int,
    r2: int,
    roots: dict[int, int | None] | None = None,
    guesses: tuple[int | None, int | None] = (None, None),
) -> tuple[list[int], int]:
    if ftilde <= 1 or r1 < 1 or r2 < 1:
        return [], 0
    g = math.gcd(r1, r2)
    if roots is None:
        target = _exact_root(x, g)
    else:
        if g not in roots:
            roots[g] = _exact_root(x, g)
        target = roots[g]
    if target is None:
        return [], 0
    a, b = r1 // g, r2 // g
    f = ftilde
    # q(t) = t**a (f - t)**b rises on [0, u_max] and falls on [u_max, f], u_max = a f / (a + b)
    u_lo = a * f // (a + b)
    u_hi = -(-a * f // (a + b))
    left, s1 = _rising_crossing(a, b, f, u_lo, target, guesses[0])
    # the falling half in t is the rising half in f - t with the exponents swapped
    mirrored = None if guesses[1] is None else f - guesses[1]
    t, s2 = _rising_crossing(b, a, f, f - u_hi, target, mirrored)
    right = None if t is None else f - t
    # each boundary integer is the exact root whenever that half has an integer root
    out = [h for h in (left, right) if h is not None]
    if len(out) == 2 and out[0] == out[1]:
        out.pop()
    return out, 1 + s1 + s2


def root_search_f1(ftilde: int, x: int, r1: int, r2: int) -> list[int]:
    """Integers nearest the roots of u**(r1/g) (f - u)**(r2/g) - x**(1/g) in (0, f).

    g = gcd(r1, r2); when x has no exact g-th root the pair is skipped.  Up to
    one candidate comes from each monotone half of (0, f).
    """
    return _root_search(ftilde, x, r1, r2)[0]


def _exponent_range(x: int) -> range:
    return range(1, max(1, math.floor(math.log2(x))) + 1)


def _repeat_estimates(o: OracleModel, x: int, attempts: int) -> Iterator[Estimate]:
    yield query(o, x)
    for attempt in range(1, attempts):
        yield query(o.reseeded(attempt), x)


def _edge_exponent(edge: int, target: int) -> int:
    """Least e >= 1 with edge**e >= target."""
    e, power = 1, edge
    while power < target:
        power *= edge
        e += 1
    return e


def _nearby(seen: dict[int, list[int]], ftilde: int) -> tuple[int | None, int | None]:
    for other in (ftilde - 1, ftilde + 1):
        found = seen.get(other)
        if found is not None and len(found) == 2:
            return found[0], found[1]
    return None, None


def _f1_single(x: int, fhat: Estimate, o: OracleModel) -> ReductionResult:
    tried = iterations = 0
    roots: dict[int, int | None] = {}
    history: dict[tuple[int, int], dict[int, list[int]]] = {}
    exponents = _exponent_range(x)
    max_total = x.bit_length()
    for ftilde in candidate_values(fhat, o.c, o.u, x):
        tried += 1
        if ftilde < 5:  # 2 + 3 is the smallest sum of two distinct primes
            continue
        edge = ftilde - 1
        edge_verifies: bool | None = None
        betas: dict[int, int] = {}
        for r1 in exponents:
            for r2 in exponents:
                if r1 + r2 > max_total:
                    # p1**r1 p2**r2 >= 2**(r1 + r2) rules these out before any search
                    continue
                g = math.gcd(r1, r2)
                if g not in roots:
                    roots[g] = _exact_root(x, g)
                target = roots[g]
                if target is None:
                    continue
                a, b = r1 // g, r2 // g
                if g not in betas:
                    betas[g] = _edge_exponent(edge, target)
                u_lo = a * ftilde // (a + b)
                u_hi = -(-a * ftilde // (a + b))
                if a >= betas[g] and b >= betas[g] and u_lo >= 1 and u_hi <= edge:
                    # q(1) and q(f - 1) both reach the target, so the two
                    # crossings are the interval ends 1 and f - 1
                    iterations += 1
                    if edge_verifies is None:
                        edge_verifies = x % edge == 0 and is_prime(edge)
                    if edge_verifies:
                        return ReductionResult(edge, tried, (r1, r2), iterations)
                    continue
                seen = history.setdefault((r1, r2), {})
                found, steps = _root_search(ftilde, x, r1, r2, roots, _nearby(seen, ftilde))
                seen[ftilde] = found
                iterations += steps
                verified = [h for h in found if h >= 2 and x % h == 0 and is_prime(h)]
                if verified:
                    return ReductionResult(min(verified), tried, (r1, r2), iterations)
    return ReductionResult(None, tried, None, iterations)


def factor_via_f1(x: int, o: OracleModel, attempts: int = 1) -> ReductionResult:
    """Prime factor of x from estimates of f1(x) = p1 + p2.

    ``attempts`` > 1 re-queries with independent noise after a failed sweep,
    which drives the success probability of a flaky oracle towards 1.
    """
    if o.fn.value != "f1":
        raise ValueError("factor_via_f1 needs an f1 oracle")
    total_tried = total_iter = 0
    used = 0
    result = ReductionResult(None, 0)
    for fhat in _repeat_estimates(o, x, attempts):
        used += 1
        result = _f1_single(x, fhat, o)
        total_tried += result.candidates_tried
        total_iter += result.elapsed_iterations
        if result.found:
            break
    return ReductionResult(
        result.factor,
        total_tried,
        result.guessed_exponents,
        total_iter,
        used,
        is_two_prime_form(x) if x <= 1 << 128 else None,
    )


# ---------------------------------------------------------------------------
# f2 then f3


def _prime_power_factor(z: int, x: int) -> int | None:
    pp = prime_power_decompose(z)
    if pp is not None and x % pp[0] == 0:
        return pp[0]
    return None


def _phase_one(x: int, fhat: Estimate, o2: OracleModel) -> tuple[int | None, bool, int, int]:
    """(factor, saw_z_equal_one, candidates_tried, iterations)"""
    tried = iterations = 0
    saw_one = False
    for ftilde in candidate_values(fhat, o2.c, o2.u, x):
        tried += 1
        if ftilde < 2:
            continue
        z = x
        while z % ftilde == 0:
            z //= ftilde
            iterations += 1
        if z == 1:
            saw_one = True
            continue
        p = _prime_power_factor(z, x)
        if p is not None:
            return p, saw_one, tried, iterations
    return None, saw_one, tried, iterations


def _phase_two(x: int, fhat: Estimate, o3: OracleModel) -> tuple[int | None, tuple[int, int] | None, int, int]:
    tried = iterations = 0
    x2 = x * x
    for ftilde in candidate_values(fhat, o3.c, o3.u, x):
        tried += 1
        if ftilde < 2:
            continue
        # x**2 / f3**r1 = p2**(2 r2 - r1) covers r1 < 2 r2; x / f3**r2 = p1**(r1 - 2 r2) covers r1 > 2 r2
        for r in _exponent_range(x):
            power = ftilde**r
            iterations += 1
            if power > x2:
                break
            if x2 % power == 0:
                p = _prime_power_factor(x2 // power, x)
                if p is not None:
                    return p, (r, 0), tried, iterations
            if x % power == 0:
                p = _prime_power_factor(x // power, x)
                if p is not None:
                    return p, (0, r), tried, iterations
    return None, None, tried, iterations


def factor_via_f2_f3(
    x: int, o2: OracleModel, o3: OracleModel, attempts: int = 1
) -> ReductionResult:
    """Prime factor of x from estimates of f2 = p1 p2 and, when r1 == r2, f3 = p1**2 p2.

    Phase 1 divides x by each f2 candidate as often as it goes.  A prime power
    residue yields a factor; a residue of 1 means f2 may be right but the
    exponents are equal, which is what phase 2 (driven by f3) resolves.
    Each phase re-queries its oracle up to ``attempts`` times.
    """
    if o2.fn.value != "f2" or o3.fn.value != "f3":
        raise ValueError("factor_via_f2_f3 needs an f2 and an f3 oracle")
    tried = iterations = used = 0
    saw_one = False
    two_prime = is_two_prime_form(x) if x <= 1 << 128 else None
    for fhat in _repeat_estimates(o2, x, attempts):
        used += 1
        p, one, t, it = _phase_one(x, fhat, o2)
        tried += t
        iterations += it
        saw_one = saw_one or one
        if p is not None:
            return ReductionResult(p, tried, None, iterations, used, two_prime)
        if saw_one:
            break
    if saw_one:
        for fhat in _repeat_estimates(o3, x, attempts):
            used += 1
            p, exps, t, it = _phase_two(x, fhat, o3)
            tried += t
            iterations += it
            if p is not None:
                return ReductionResult(p, tried, exps, iterations, used, two_prime)
    return ReductionResult(None, tried, None, iterations, used, two_prime)
