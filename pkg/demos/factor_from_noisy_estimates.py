"""Recovering a prime factor from a noisy estimate of p1 + p2.

Run: python3 demos/factor_from_noisy_estimates.py
"""
# %%
from primelearn.numtheory import factorize
from primelearn.oracles import OracleModel, query
from primelearn.reductions import candidate_values, factor_via_f1, factor_via_f2_f3, root_search_f1

# An in-contract oracle may be off by up to c * b(x)**u.  The worst-case mode
# always sits exactly on that edge, which is the hardest legal input.
x = 3**2 * 11**3
o = OracleModel("f1", c=2, u=1, mode="worst-case", seed=1)
fhat = query(o, x)
print(f"x = {x} = {factorize(x).primes} ^ {factorize(x).mults}")
print(f"true f1 = 14, oracle says {fhat}")

# %%
# The algorithm walks outward from round(fhat); the true sum is somewhere in here.
stream = list(candidate_values(fhat, o.c, o.u, x))
print("candidates:", stream[:9], "...", len(stream), "in total")

# %%
# For the right candidate and exponent guess, u**2 (f - u)**3 = x has an integer root at p1.
print("roots for f=14, (r1, r2) = (2, 3):", root_search_f1(14, x, 2, 3))

r = factor_via_f1(x, o)
print(f"factor {r.factor} after {r.candidates_tried} candidates, exponents {r.guessed_exponents}")

# %%
# The product route: f2 = p1 p2 peels x down to a prime power unless r1 == r2,
# in which case f3 = p1**2 p2 finishes the job.
for x in (2**4 * 3**2, 2**2 * 3**2, 5**3 * 7**3):
    res = factor_via_f2_f3(x, OracleModel("f2", c=1, mode="worst-case"), OracleModel("f3", c=1, mode="worst-case"))
    print(f"x = {x}: factor {res.factor}, phase-two exponents {res.guessed_exponents}")

# %%
# A flaky oracle (30% garbage) still works if we ask again after a failed sweep.
flaky = OracleModel("f1", c=1, delta=0.3, mode="failing", seed=9)
xs = [x for x in range(5000, 9000) if factorize(x).omega == 2][:300]
for attempts in (1, 2, 3):
    ok = sum(factor_via_f1(x, flaky, attempts=attempts).found for x in xs)
    print(f"{attempts} estimate(s): {ok}/{len(xs)} factored")
