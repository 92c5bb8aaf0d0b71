"""Factorization-derived functions, a sampler for factored integers, noisy-oracle
reductions to factoring, and a learnable circuit-expectation function."""

__version__ = "0.1.0"

from .numtheory import (
    FactoredInteger,
    FunctionId,
    RadicalProduct,
    bit_size,
    count_multiplicity_vectors,
    eval_f,
    factorize,
    is_prime,
    pi_omega_exact,
    prime_power_decompose,
    random_prime,
)
from .oracles import NoiseMode, OracleModel, TrainingSet, emit_training_set, query
from .reductions import (
    ReductionResult,
    candidate_values,
    factor_via_f1,
    factor_via_f2_f3,
    root_search_f1,
)
from .sampler import Sampler, SamplerConfig, exact_pmf, generate_factored_sample

__all__ = [
    "FactoredInteger",
    "FunctionId",
    "RadicalProduct",
    "bit_size",
    "count_multiplicity_vectors",
    "eval_f",
    "factorize",
    "is_prime",
    "pi_omega_exact",
    "prime_power_decompose",
    "random_prime",
    "NoiseMode",
    "OracleModel",
    "TrainingSet",
    "emit_training_set",
    "query",
    "ReductionResult",
    "candidate_values",
    "factor_via_f1",
    "factor_via_f2_f3",
    "root_search_f1",
    "Sampler",
    "SamplerConfig",
    "exact_pmf",
    "generate_factored_sample",
]
