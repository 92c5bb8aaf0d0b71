"""A circuit expectation value that a least-squares fit learns from examples.

Run: python3 demos/learning_a_circuit_function.py
"""
# %%
import random

import numpy as np

from primelearn.qlearn import (
    CircuitFamily,
    estimate_value,
    exact_value,
    feature_dim,
    fit_model,
    predict,
    random_string,
    shot_count,
)

family = CircuitFamily(seed=2024)
circuit = family(6)
print(f"l=6 uses {circuit.qubits} qubits and {len(circuit)} gates;", circuit.gates[:4], "...")

# %%
# Estimating f(x) on "hardware": shots of Z on the first qubit, Hoeffding-sized.
rng = random.Random(1)
x = random_string(6, rng)
print("x =", x, " exact f =", round(exact_value(x, 0, family), 6))
nprng = np.random.default_rng(1)
for c in (1.0, 0.3, 0.1):
    est = estimate_value(x, 0, c, 0.1, nprng, family)
    print(f"c={c}: {shot_count(6, 0, c, 0.1):7d} shots -> {est:.4f}")

# %%
# The same function is a quadratic form in x, so 21 + 5 labelled strings pin it down.
n = feature_dim(6) + 5
train = [(s, exact_value(s, 0, family)) for s in (random_string(6, rng) for _ in range(n))]
model = fit_model(train, 0)
test = [random_string(6, rng) for _ in range(200)]
err = max(abs(predict(model, s) - exact_value(s, 0, family)) for s in test)
print(f"fit on {n} exact labels: worst held-out error {err:.1e}")

# %%
# With shot-noise labels the fit is only as good as the labels (and the conditioning).
noisy = [(s, estimate_value(s, 0, 0.1, 0.1, nprng, family)) for s, _ in train]
model = fit_model(noisy, 0)
err = max(abs(predict(model, s) - exact_value(s, 0, family)) for s in test)
print(f"fit on {n} estimated labels (c=0.1): worst held-out error {err:.3f}")
