"""Function-value oracles with an additive noise contract, and training-set emission.

An oracle answers f(x) up to ``c * b(x)**u``.  It stands in for an efficient
estimator of f: the exact value comes from factorizing x, and the mode decides
how the answer is perturbed inside (or, for FAILING, sometimes outside) the
contract.  Answers are deterministic in (oracle, x).
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Union

from ._rng import substream
from .numtheory import FunctionId, RadicalProduct, bit_size, eval_f, factorize
from .sampler import SamplerConfig, generate_factored_sample

__all__ = [
    "NoiseMode",
    "OracleModel",
    "TrainingSet",
    "Estimate",
    "exact_value",
    "noise_bound",
    "query",
    "in_contract",
    "emit_training_set",
    "format_decimal",
    "parse_decimal",
]

Estimate = Union[int, Fraction]
F3_DIGITS = 60  # precision used when an irrational f3 value must become a Fraction


class NoiseMode(str, enum.Enum):
    EXACT = "exact"
    WORST_CASE = "worst-case"
    UNIFORM_NOISE = "uniform"
    FAILING = "failing"


@dataclass(frozen=True)
class OracleModel:
    fn: FunctionId
    c: float = 1.0
    u: float = 0.0
    delta: float = 0.0
    mode: NoiseMode = NoiseMode.EXACT
    seed: int = 0
    K: int = 2

    def __post_init__(self):
        object.__setattr__(self, "fn", FunctionId.parse(self.fn))
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.u < 0:
            raise ValueError("u must be non-negative")
        if not 0 <= self.delta < 0.5:
            raise ValueError("delta must lie in [0, 1/2)")

    def reseeded(self, attempt: int) -> OracleModel:
        """Same contract, independent noise: used for repeated estimates of one x."""
        return replace(self, seed=int(substream(self.seed, "repeat", attempt).getrandbits(63)))


def exact_value(fn: FunctionId | str, x: int) -> int | RadicalProduct:
    return eval_f(fn, factorize(x))


def _as_fraction(value: int | RadicalProduct) -> Fraction:
    if isinstance(value, RadicalProduct):
        return value.to_fraction(F3_DIGITS)
    return Fraction(value)


def noise_bound(o: OracleModel, x: int) -> float:
    """Contract radius c * b(x)**u."""
    return o.c * bit_size(x) ** o.u


def _sign(o: OracleModel, x: int) -> int:
    return 1 if substream(o.seed, "sign", x).getrandbits(1) else -1


def query(o: OracleModel, x: int) -> Estimate:
    """Estimate of f(x) under the oracle's noise mode.

    EXACT and WORST_CASE return ints (the latter is f(x) +- floor(c b(x)**u));
    the noisy modes return exact dyadic Fractions.
    """
    if x < 2:
        raise ValueError(f"oracle domain starts at 2, got {x}")
    fx = factorize(x)
    if fx.omega > o.K:
        raise ValueError(f"x={x} has {fx.omega} distinct primes, above K={o.K}")
    value = eval_f(o.fn, fx)
    if o.mode is NoiseMode.EXACT:
        return value if isinstance(value, int) else _as_fraction(value)
    bound = noise_bound(o, x)
    if o.mode is NoiseMode.WORST_CASE:
        shift = _sign(o, x) * math.floor(bound)
        return value + shift if isinstance(value, int) else _as_fraction(value) + shift
    rng = substream(o.seed, o.fn.value, o.mode.value, x)
    exact = _as_fraction(value)
    if o.mode is NoiseMode.FAILING and rng.random() < o.delta:
        return Fraction(rng.random()) * 2 * exact
    return exact + (2 * Fraction(rng.random()) - 1) * Fraction(bound)


def in_contract(o: OracleModel, x: int, estimate: Estimate) -> bool:
    return abs(Fraction(estimate) - _as_fraction(exact_value(o.fn, x))) <= Fraction(noise_bound(o, x))


# ---------------------------------------------------------------------------
# decimal rendering


def format_decimal(value: int | Fraction | float | RadicalProduct) -> str:
    """Exact decimal string for ints and dyadic Fractions; 17 significant digits otherwise."""
    if isinstance(value, bool):
        raise TypeError("booleans are not labels")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, RadicalProduct):
        return format(value.evaluate(17), ".17g")
    if isinstance(value, float):
        return format(value, ".17g")
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = (den & -den).bit_length() - 1
    if den != 1 << twos:
        return format(Decimal(value.numerator) / Decimal(den), ".17g")
    # n / 2**t == n * 5**t / 10**t, a terminating decimal
    scaled = abs(value.numerator) * 5**twos
    digits = str(scaled).rjust(twos + 1, "0")
    sign = "-" if value < 0 else ""
    return f"{sign}{digits[:-twos]}.{digits[-twos:]}".rstrip("0").rstrip(".")


def parse_decimal(text: str) -> int | Fraction:
    frac = Fraction(text)
    return frac.numerator if frac.denominator == 1 else frac


# ---------------------------------------------------------------------------
# training sets


@dataclass
class TrainingSet:
    pairs: list[tuple[int, Estimate]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a training set needs at least one pair")

    def __len__(self) -> int:
        return len(self.pairs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y"])
        for x, y in self.pairs:
            writer.writerow([str(x), format_decimal(y)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": self.meta,
            "pairs": [{"x": str(x), "y": format_decimal(y)} for x, y in self.pairs],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        Path(path).write_text(text)

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> TrainingSet:
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([(int(r["x"]), parse_decimal(r["y"])) for r in rows], dict(meta or {}))

    @classmethod
    def from_json(cls, text: str) -> TrainingSet:
        doc = json.loads(text)
        pairs = [(int(p["x"]), parse_decimal(p["y"])) for p in doc["pairs"]]
        return cls(pairs, doc.get("meta", {}))

    @classmethod
    def read(cls, path: str | Path) -> TrainingSet:
        text = Path(path).read_text()
        return cls.from_json(text) if text.lstrip().startswith("{") else cls.from_csv(text)


def emit_training_set(
    cfg: SamplerConfig, o: OracleModel, n: int, rng: random.Random
) -> TrainingSet:
    """n sampler draws, each labelled by the oracle."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if o.K < cfg.K:
        o = replace(o, K=cfg.K)
    pairs = []
    for _ in range(n):
        x = generate_factored_sample(cfg, rng).value
        pairs.append((x, query(o, x)))
    meta = {
        "m": cfg.m,
        "K": cfg.K,
        "fn": o.fn.value,
        "seed": cfg.seed,
        "n": n,
        "oracle": {k: (v.value if isinstance(v, enum.Enum) else v) for k, v in asdict(o).items()},
    }
    return TrainingSet(pairs, meta)
