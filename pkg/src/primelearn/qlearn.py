"""Circuit-expectation functions, their shot-based estimator, and a least-squares learner.

A string x over Z_q is amplitude-encoded (|i> for i = 1..l stored at basis
index i-1), pushed through a seeded pseudo-random circuit U on k qubits and
measured with Z on qubit 0 (the most significant bit of the basis index):

    f(x) = l**(u+1) <x| U^dag Z_1 U |x>.

Because the encoding is real, f is a quadratic form in x, and the learner
recovers it from l(l+1)/2 features by least squares.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rng import np_substream, substream

__all__ = [
    "GATE_ARITY",
    "Gate",
    "CircuitSpec",
    "StateVector",
    "CircuitFamily",
    "LearnedModel",
    "RankDeficientError",
    "poly_budget",
    "build_circuit",
    "apply_circuit",
    "unitary",
    "observable_matrix",
    "encode_state",
    "qubits_for_length",
    "z1_expectation",
    "exact_value",
    "shot_count",
    "estimate_value",
    "feature_dim",
    "feature_vector",
    "hermitian_vector",
    "fit_model",
    "predict",
    "random_string",
    "sample_budget",
    "sample_budget_closed_form",
]

MAX_QUBITS = 12
DEFAULT_ALPHABET = 16

GATE_ARITY = {"H": 1, "S": 1, "T": 1, "X": 1, "Z": 1, "CNOT": 2, "CZ": 2}

_R2 = 1 / math.sqrt(2)
_SINGLE = {
    "H": np.array([[_R2, _R2], [_R2, -_R2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class RankDeficientError(ValueError):
    """Design matrix lacks full column rank; more (or more varied) samples are needed."""


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]  # (control, target) for the two-qubit gates

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != GATE_ARITY[self.kind] or len(set(self.targets)) != len(self.targets):
            raise ValueError(f"bad targets {self.targets} for {self.kind}")


@dataclass(frozen=True)
class CircuitSpec:
    qubits: int
    gates: tuple[Gate, ...]
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.targets) >= self.qubits or min(g.targets) < 0:
                raise ValueError(f"gate {g} outside {self.qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def touched(self) -> set[int]:
        return {t for g in self.gates for t in g.targets}

    def to_dict(self) -> dict:
        return {
            "qubits": self.qubits,
            "seed": self.seed,
            "gates": [{"kind": g.kind, "targets": list(g.targets)} for g in self.gates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> CircuitSpec:
        gates = [Gate(g["kind"], tuple(g["targets"])) for g in doc["gates"]]
        return cls(int(doc["qubits"]), tuple(gates), doc.get("seed"))

    @classmethod
    def from_json(cls, text: str) -> CircuitSpec:
        return cls.from_dict(json.loads(text))


def poly_budget(k: int) -> int:
    return 20 * k * k


def build_circuit(k: int, seed: int, depth: int | None = None) -> CircuitSpec:
    """Seeded pseudo-random Clifford+T circuit on k qubits.

    A layer of H on every qubit comes first (so each qubit is touched), then
    ``depth`` random gates (default 3k^2), keeping the total within 20k^2.
    Some draws make U^dag Z_1 U purely imaginary (an odd Pauli string, say),
    so that f vanishes on every real input; those are redrawn from the same
    stream.
    """
    if not 1 <= k <= MAX_QUBITS:
        raise ValueError(f"k must be in [1, {MAX_QUBITS}], got {k}")
    depth = 3 * k * k if depth is None else depth
    if depth < 0 or k + depth > poly_budget(k):
        raise ValueError(f"{k + depth} gates exceed the budget {poly_budget(k)}")
    rng = substream(seed, "circuit", k)
    probes = np_substream(seed, "probe", k).normal(size=(1 << k, 2))
    probes /= np.linalg.norm(probes, axis=0)
    kinds = sorted(GATE_ARITY) if k > 1 else sorted(x for x, a in GATE_ARITY.items() if a == 1)
    for _ in range(100):
        gates = [Gate("H", (q,)) for q in range(k)]
        for _ in range(depth):
            kind = rng.choice(kinds)
            gates.append(Gate(kind, tuple(rng.sample(range(k), GATE_ARITY[kind]))))
        spec = CircuitSpec(k, tuple(gates), seed)
        out = apply_circuit(spec, probes)
        if max(abs(z1_expectation(out[:, i])) for i in range(2)) > 1e-9:
            return spec
    raise RuntimeError(f"no non-degenerate circuit found for k={k}, seed={seed}")


def _apply_gate(psi: np.ndarray, g: Gate, k: int) -> np.ndarray:
    # psi has shape (2,)*k + (batch,); axis q is qubit q
    if g.kind in _SINGLE:
        (t,) = g.targets
        out = np.tensordot(_SINGLE[g.kind], psi, axes=([1], [t]))
        return np.moveaxis(out, 0, t)
    ctrl, t = g.targets
    idx = [slice(None)] * (k + 1)
    idx[ctrl] = 1
    sub = psi[tuple(idx)]  # control set; target axis shifts down if it sat above ctrl
    ax = t if t < ctrl else t - 1
    psi = psi.copy()
    if g.kind == "CNOT":
        psi[tuple(idx)] = np.flip(sub, axis=ax)
    else:
        flip = [slice(None)] * k
        flip[ax] = 1
        sub = sub.copy()
        sub[tuple(flip)] *= -1
        psi[tuple(idx)] = sub
    return psi


def apply_circuit(spec: CircuitSpec, amplitudes: np.ndarray) -> np.ndarray:
    """Apply the gate list to a state (length 2^k) or to the columns of a 2^k x B array."""
    amps = np.asarray(amplitudes, dtype=complex)
    vector = amps.ndim == 1
    k = spec.qubits
    if amps.shape[0] != 1 << k:
        raise ValueError(f"state of length {amps.shape[0]} does not fit {k} qubits")
    psi = amps.reshape((2,) * k + (-1,))
    for g in spec.gates:
        psi = _apply_gate(psi, g, k)
    out = psi.reshape(1 << k, -1)
    return out[:, 0] if vector else out


def unitary(spec: CircuitSpec) -> np.ndarray:
    """Dense 2^k x 2^k matrix of the circuit, column by column."""
    return apply_circuit(spec, np.eye(1 << spec.qubits, dtype=complex))


def observable_matrix(spec: CircuitSpec) -> np.ndarray:
    """M = U^dag Z_1 U, assembled densely."""
    U = unitary(spec)
    half = 1 << (spec.qubits - 1)
    z1 = np.ones(1 << spec.qubits)
    z1[half:] = -1
    return U.conj().T @ (z1[:, None] * U)


# ---------------------------------------------------------------------------
# encoding and the exact function


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        n = self.amplitudes.shape[0]
        if n & (n - 1):
            raise ValueError("length must be a power of two")
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-10:
            raise ValueError("state is not normalized")

    @property
    def qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1


def qubits_for_length(ell: int) -> int:
    """Fewest qubits holding ell amplitudes: ceil(log2 ell)."""
    if ell < 1:
        raise ValueError("empty string")
    return (ell - 1).bit_length()


def _as_vector(x: Sequence[float]) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("x must be a non-empty 1-d string of symbols")
    if not np.any(v):
        raise ValueError("all-zero string has no encoding")
    return v


def encode_state(x: Sequence[float], qubits: int | None = None) -> StateVector:
    v = _as_vector(x)
    k = qubits_for_length(v.size) if qubits is None else qubits
    if v.size > 1 << k:
        raise ValueError(f"{v.size} symbols do not fit {k} qubits")
    amps = np.zeros(1 << k, dtype=complex)
    amps[: v.size] = v / np.linalg.norm(v)
    return StateVector(amps)


@dataclass
class CircuitFamily:
    """l -> U_l, one seeded circuit per qubit count (k = max(1, ceil(log2 l)))."""

    seed: int = 0
    identity: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def qubits(self, ell: int) -> int:
        return max(1, qubits_for_length(ell))

    def __call__(self, ell: int) -> CircuitSpec:
        k = self.qubits(ell)
        if k not in self._cache:
            self._cache[k] = CircuitSpec(k, (), None) if self.identity else build_circuit(k, self.seed)
        return self._cache[k]


def z1_expectation(psi: np.ndarray) -> float:
    p = np.abs(psi) ** 2
    half = p.size // 2
    return float(p[:half].sum() - p[half:].sum())


def _plus_probability(psi: np.ndarray) -> float:
    p = np.abs(psi) ** 2
    return float(min(1.0, max(0.0, p[: p.size // 2].sum())))


def _output_state(x: Sequence[float], family: CircuitFamily) -> np.ndarray:
    v = _as_vector(x)
    circuit = family(v.size)
    return apply_circuit(circuit, encode_state(v, circuit.qubits).amplitudes)


def exact_value(x: Sequence[float], u_exp: float, family: CircuitFamily) -> float:
    ell = len(x)
    return ell ** (u_exp + 1) * z1_expectation(_output_state(x, family))


def shot_count(ell: int, u_exp: float, c: float, delta: float) -> int:
    """Hoeffding budget for +-1 outcomes: ceil(2 l^(2(u+1)) ln(2/delta) / c^2)."""
    if c <= 0 or not 0 < delta < 0.5:
        raise ValueError("need c > 0 and 0 < delta < 1/2")
    return math.ceil(2 * ell ** (2 * (u_exp + 1)) * math.log(2 / delta) / c**2)


def estimate_value(
    x: Sequence[float],
    u_exp: float,
    c: float,
    delta: float,
    rng: np.random.Generator,
    family: CircuitFamily,
) -> float:
    """Scaled empirical mean of shot_count single-shot Z_1 measurements.

    The shots are i.i.d., so their +1 count is drawn as one binomial variate.
    """
    ell = len(x)
    n = shot_count(ell, u_exp, c, delta)
    plus = int(rng.binomial(n, _plus_probability(_output_state(x, family))))
    return ell ** (u_exp + 1) * (2 * plus - n) / n


# ---------------------------------------------------------------------------
# learning the quadratic form


def feature_dim(ell: int) -> int:
    return ell * (ell + 1) // 2


def feature_vector(x: Sequence[float]) -> np.ndarray:
    """[x_i^2 ..., 2 x_i x_j (i<j) ...] / |x|^2."""
    v = _as_vector(x)
    iu, ju = np.triu_indices(v.size, k=1)
    return np.concatenate([v * v, 2 * v[iu] * v[ju]]) / float(v @ v)


def hermitian_vector(M: np.ndarray, ell: int) -> np.ndarray:
    """[M_ii ..., Re M_ij (i<j) ...] over the leading l x l block."""
    block = np.asarray(M)[:ell, :ell]
    iu, ju = np.triu_indices(ell, k=1)
    return np.concatenate([np.real(np.diag(block)), np.real(block[iu, ju])])


@dataclass(frozen=True)
class LearnedModel:
    ell: int
    u_exp: float
    vM: np.ndarray
    residual: float = 0.0
    n_samples: int = 0

    def __post_init__(self):
        if self.vM.shape != (feature_dim(self.ell),):
            raise ValueError(f"vM must have dimension {feature_dim(self.ell)}")


def fit_model(samples: Sequence[tuple[Sequence[float], float]], u_exp: float) -> LearnedModel:
    """Least-squares solve of l^(u+1) V vM = y over samples sharing one length l."""
    if not samples:
        raise ValueError("no samples")
    lengths = {len(x) for x, _ in samples}
    if len(lengths) != 1:
        raise ValueError(f"samples mix lengths {sorted(lengths)}")
    (ell,) = lengths
    dim = feature_dim(ell)
    if len(samples) < dim:
        raise ValueError(f"need at least {dim} samples for l={ell}, got {len(samples)}")
    V = np.array([feature_vector(x) for x, _ in samples]) * ell ** (u_exp + 1)
    y = np.array([float(f) for _, f in samples])
    vM, _, rank, _ = np.linalg.lstsq(V, y, rcond=None)
    if rank < dim:
        raise RankDeficientError(f"design matrix rank {rank} < {dim}")
    return LearnedModel(ell, u_exp, vM, float(np.linalg.norm(V @ vM - y)), len(samples))


def predict(model: LearnedModel, x: Sequence[float]) -> float:
    if len(x) != model.ell:
        raise ValueError(f"model is for l={model.ell}, got a string of length {len(x)}")
    return model.ell ** (model.u_exp + 1) * float(feature_vector(x) @ model.vM)


def random_string(ell: int, rng: random.Random, q: int = DEFAULT_ALPHABET) -> list[int]:
    """Uniform non-zero string of length ell over Z_q."""
    if q < 2:
        raise ValueError("alphabet needs q >= 2")
    while True:
        x = [rng.randrange(q) for _ in range(ell)]
        if any(x):
            return x


def sample_budget(ell: int) -> int:
    """Samples to learn every length up to l, budgeting i^2 >= i(i+1)/2 per length i."""
    return sum(i * i for i in range(1, ell + 1))


def sample_budget_closed_form(ell: int) -> Fraction:
    return Fraction(ell**3, 3) + Fraction(ell**2, 2) + Fraction(ell, 6)
