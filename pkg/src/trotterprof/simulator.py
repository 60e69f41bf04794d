"""Dense statevector simulation for small registers.

States are plain complex amplitude vectors; gates are Pauli-word rotations
``exp(-i * angle * P)`` applied via ``cos(a)|psi> - i sin(a) P|psi>``.
The exact evolution ``exp(-iHt)`` comes from a cached Hermitian
eigendecomposition and serves as the ground-truth oracle, so measured
deviations contain only algorithmic error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import cos, sin
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionMismatchError,
    HermiticityError,
)
from .pauli import DENSE_CAP, OperatorSum, apply_pauli_word, dense_word, to_dense

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over ``2**n`` basis states."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise DimensionMismatchError(
                f"amplitude shape {amps.shape} does not match n={self.n}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise DegenerateInputError(f"state norm {norm!r} is not 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, raw: Sequence[complex]) -> StateVector:
        """Build a state from unnormalized amplitudes (length must be 2**n).

        Idempotent: already-normalized input is kept bit for bit, so states
        survive serialization round trips unchanged.
        """
        amps = np.asarray(raw, dtype=complex)
        n = int(np.log2(amps.shape[0]))
        if (1 << n) != amps.shape[0]:
            raise DimensionMismatchError("amplitude count is not a power of two")
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise DegenerateInputError("cannot normalize the zero vector")
        if abs(norm - 1.0) > 1e-12:
            amps = amps / norm
        return cls(amps, n)


@dataclass(frozen=True)
class PauliRotation:
    """The gate ``exp(-i * angle * P)`` for a non-identity Pauli word P."""

    word: str
    angle: float

    def __post_init__(self) -> None:
        if set(self.word) <= {"I"}:
            raise DegenerateInputError("rotation word must touch at least one qubit")
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def n(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list; the leftmost (first) gate acts first on the state."""

    gates: tuple[PauliRotation, ...]
    n: int

    def __post_init__(self) -> None:
        for g in self.gates:
            if g.n != self.n:
                raise DimensionMismatchError(
                    f"gate on {g.n} qubits in a circuit of {self.n}"
                )

    def __len__(self) -> int:
        return len(self.gates)


def init_product_state(factors: Sequence[tuple[complex, complex]]) -> StateVector:
    """Kronecker product of per-qubit ``(c0, c1)`` pairs, normalized at the end."""
    if not factors:
        raise DegenerateInputError("need at least one qubit factor")
    amps = np.array([1.0 + 0.0j])
    for k, (c0, c1) in enumerate(factors):
        pair = np.array([c0, c1], dtype=complex)
        if np.all(pair == 0):
            raise DegenerateInputError(f"factor for qubit {k + 1} is zero")
        amps = np.kron(amps, pair)
    norm = np.linalg.norm(amps)
    return StateVector(amps / norm, len(factors))


def apply_pauli_rotation(state: StateVector, g: PauliRotation) -> StateVector:
    """Return ``exp(-i * angle * P)|state>``."""
    if g.n != state.n:
        raise DimensionMismatchError("gate and state qubit counts differ")
    rotated = cos(g.angle) * state.amplitudes - 1.0j * sin(g.angle) * apply_pauli_word(
        g.word, state.amplitudes
    )
    return StateVector(rotated, state.n)


def apply_circuit(state: StateVector, c: Circuit) -> StateVector:
    """Apply gates left to right in list order."""
    if c.n != state.n:
        raise DimensionMismatchError("circuit and state qubit counts differ")
    amps = state.amplitudes
    for g in c.gates:
        amps = cos(g.angle) * amps - 1.0j * sin(g.angle) * apply_pauli_word(g.word, amps)
    return StateVector(amps, state.n)


@lru_cache(maxsize=64)
def _eigh(h: OperatorSum) -> tuple[np.ndarray, np.ndarray]:
    dense = to_dense(h).matrix
    w, v = np.linalg.eigh(dense)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def exact_evolve(h: OperatorSum, t: float, state: StateVector) -> StateVector:
    """Ground truth ``exp(-iHt)|state>`` via Hermitian eigendecomposition."""
    if not h.hermitian:
        raise HermiticityError("exact evolution requires a Hermitian Hamiltonian")
    if h.n != state.n:
        raise DimensionMismatchError("Hamiltonian and state qubit counts differ")
    w, v = _eigh(h)
    rotated = v @ (np.exp(-1.0j * w * t) * (v.conj().T @ state.amplitudes))
    return StateVector(rotated, state.n)


def exact_unitary(h: OperatorSum, t: float) -> np.ndarray:
    """Dense ``exp(-iHt)`` from the cached eigendecomposition."""
    if not h.hermitian:
        raise HermiticityError("exact evolution requires a Hermitian Hamiltonian")
    w, v = _eigh(h)
    return (v * np.exp(-1.0j * w * t)) @ v.conj().T


def circuit_unitary(c: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of a circuit (first gate is the rightmost matrix factor)."""
    if c.n > cap:
        raise DimensionMismatchError(f"dense circuit of {c.n} qubits exceeds cap {cap}")
    dim = 1 << c.n
    mat = np.eye(dim, dtype=complex)
    ident = np.eye(dim, dtype=complex)
    for g in c.gates:
        gate = cos(g.angle) * ident - 1.0j * sin(g.angle) * dense_word(g.word)
        mat = gate @ mat
    return mat


def expectation(state: StateVector, obs: OperatorSum) -> float:
    """Exact ``<psi|O|psi>`` for a Hermitian observable."""
    if not obs.hermitian:
        raise HermiticityError("expectation requires a Hermitian observable")
    if obs.n != state.n:
        raise DimensionMismatchError("observable and state qubit counts differ")
    amps = state.amplitudes
    value = 0.0 + 0.0j
    for term in obs.terms:
        value += term.coeff * np.vdot(amps, apply_pauli_word(term.word, amps))
    if abs(value.imag) >= 1e-10:
        raise HermiticityError(
            f"expectation has imaginary residue {value.imag!r}"
        )
    return float(value.real)


@dataclass
class GaussianJitter:
    """Optional additive Gaussian perturbation of measured expectation values.

    Exists solely to exercise fit robustness; ``sigma=0`` leaves values exact.
    """

    sigma: float = 0.0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    @classmethod
    def from_seed(cls, sigma: float, seed: int) -> GaussianJitter:
        return cls(sigma, np.random.default_rng(seed))

    def perturb(self, value: float) -> float:
        if self.sigma == 0.0:
            return value
        return value + self.rng.normal(0.0, self.sigma)


def measure(state: StateVector, obs: OperatorSum, jitter: GaussianJitter | None = None) -> float:
    """Expectation value with the optional synthetic noise injector applied."""
    value = expectation(state, obs)
    if jitter is not None:
        value = jitter.perturb(value)
    return value
