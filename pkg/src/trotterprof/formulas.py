"""Product formulas: splitting tables, circuit compilation, and order checks.

A formula is an ordered table of ``(fragment_index, coefficient)`` steps.
Compilation expands each step into Pauli rotations for every term of the
addressed fragment, in the fragment's stored term order, and the resulting
gate list is applied left to right.  The single-step circuit at ``t/N`` is
repeated ``N`` times to form the usual iterated circuit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, FormulaError
from .pauli import HERMITIAN_TOL, OperatorSum, mutually_commuting, words_commute
from .simulator import Circuit, PauliRotation, circuit_unitary, exact_unitary

FORMULA_NAMES = ("lie1", "strang2", "ruth3", "suzuki4")

#: Ruth's third-order coefficient table, alternating fragments A, B, A, B, ...
RUTH_COEFFICIENTS = (7.0 / 24.0, 2.0 / 3.0, 3.0 / 4.0, -2.0 / 3.0, -1.0 / 24.0, 1.0)

#: Recursion constant for the fourth-order Suzuki construction.
SUZUKI_P = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))


@dataclass(frozen=True)
class Fragment:
    """A commuting bundle of Hamiltonian terms, exponentiable gate by gate."""

    terms: OperatorSum

    def __post_init__(self) -> None:
        if not mutually_commuting(self.terms.terms):
            raise FormulaError("fragment terms must mutually commute")
        if not self.terms.hermitian:
            raise FormulaError("fragment terms must carry real coefficients")

    @property
    def n(self) -> int:
        return self.terms.n


@dataclass(frozen=True)
class PartitionedHamiltonian:
    """An ordered fragment list whose term union is the full Hamiltonian."""

    fragments: tuple[Fragment, ...]
    n: int

    def __post_init__(self) -> None:
        if not self.fragments:
            raise FormulaError("a partition needs at least one fragment")
        for f in self.fragments:
            if f.n != self.n:
                raise FormulaError("fragments act on different qubit counts")

    @property
    def hamiltonian(self) -> OperatorSum:
        total = OperatorSum.zero(self.n)
        for f in self.fragments:
            total = total + f.terms
        return total

    def scale(self) -> float:
        """One-norm of the full Hamiltonian, used to normalize time windows."""
        return self.hamiltonian.one_norm()


@dataclass(frozen=True)
class ProductFormula:
    """Splitting table with its first error order and symmetry flag.

    ``alpha`` is the lowest power of t at which the compiled circuit deviates
    from the exact evolution; the formula's conventional accuracy order is
    ``alpha - 1``.
    """

    steps: tuple[tuple[int, float], ...]
    alpha: int
    symmetric: bool

    def __post_init__(self) -> None:
        if self.alpha < 2:
            raise FormulaError("alpha must be at least 2")
        if not self.steps:
            raise FormulaError("a formula needs at least one step")
        sums: dict[int, float] = {}
        for index, coeff in self.steps:
            if index < 0:
                raise FormulaError(f"negative fragment index {index}")
            sums[index] = sums.get(index, 0.0) + coeff
        for index, total in sums.items():
            if abs(total - 1.0) > 1e-12:
                raise FormulaError(
                    f"fragment {index} coefficients sum to {total!r}, expected 1"
                )

    @property
    def fragment_count(self) -> int:
        return max(index for index, _ in self.steps) + 1


def _strang_steps(k: int, scale: float) -> list[tuple[int, float]]:
    half = [(i, 0.5 * scale) for i in range(k - 1)]
    return half + [(k - 1, scale)] + half[::-1]


def builtin_formula(name: str, partition: PartitionedHamiltonian) -> ProductFormula:
    """Construct one of the built-in splitting tables for a given partition.

    ``lie1`` is first order (alpha 2), ``strang2`` the symmetric second-order
    splitting (alpha 3), ``ruth3`` the third-order table over exactly two
    fragments (alpha 4), and ``suzuki4`` the fourth-order recursion
    ``S4(t) = S2(pt) S2(pt) S2((1-4p)t) S2(pt) S2(pt)`` (alpha 5).
    """
    k = len(partition.fragments)
    if name == "lie1":
        return ProductFormula(tuple((i, 1.0) for i in range(k)), 2, False)
    if name == "strang2":
        if k < 2:
            raise FormulaError("strang2 needs at least two fragments")
        return ProductFormula(tuple(_strang_steps(k, 1.0)), 3, True)
    if name == "ruth3":
        if k != 2:
            raise FormulaError("ruth3 alternates exactly two fragments")
        steps = tuple(
            (i % 2, c) for i, c in enumerate(RUTH_COEFFICIENTS)
        )
        return ProductFormula(steps, 4, False)
    if name == "suzuki4":
        if k < 2:
            raise FormulaError("suzuki4 needs at least two fragments")
        seq: list[tuple[int, float]] = []
        for c in (SUZUKI_P, SUZUKI_P, 1.0 - 4.0 * SUZUKI_P, SUZUKI_P, SUZUKI_P):
            seq.extend(_strang_steps(k, c))
        return ProductFormula(tuple(seq), 5, True)
    raise FormulaError(f"unknown formula {name!r}; choose from {FORMULA_NAMES}")


def compile_circuit(
    f: ProductFormula,
    partition: PartitionedHamiltonian,
    t: float,
    trotter_steps: int = 1,
) -> Circuit:
    """Compile the iterated circuit ``(V(t/N))^N`` into a flat gate list."""
    if trotter_steps < 1:
        raise FormulaError("trotter_steps must be at least 1")
    if f.fragment_count > len(partition.fragments):
        raise FormulaError(
            f"formula addresses fragment {f.fragment_count - 1}, "
            f"partition has {len(partition.fragments)}"
        )
    dt = t / trotter_steps
    single: list[PauliRotation] = []
    for index, coeff in f.steps:
        for term in partition.fragments[index].terms:
            if abs(term.coeff.imag) > HERMITIAN_TOL:
                raise FormulaError("fragment coefficients must be real")
            single.append(PauliRotation(term.word, coeff * dt * term.coeff.real))
    return Circuit(tuple(single) * trotter_steps, partition.n)


def invert_circuit(c: Circuit) -> Circuit:
    """Reverse the gate order and negate every angle; gate count unchanged."""
    return Circuit(
        tuple(PauliRotation(g.word, -g.angle) for g in reversed(c.gates)), c.n
    )


def canonical_gate_sequence(c: Circuit) -> tuple[tuple[str, float], ...]:
    """Deterministic normal form for syntactic circuit comparison.

    Maximal runs of mutually commuting gates are sorted by (word, angle);
    reordering inside such a run leaves the unitary unchanged.  Negative
    zero angles normalize to 0.0.
    """
    blocks: list[list[PauliRotation]] = []
    current: list[PauliRotation] = []
    for g in c.gates:
        if all(words_commute(g.word, h.word) for h in current):
            current.append(g)
        else:
            blocks.append(current)
            current = [g]
    if current:
        blocks.append(current)
    out: list[tuple[str, float]] = []
    for block in blocks:
        out.extend(sorted((g.word, g.angle + 0.0) for g in block))
    return tuple(out)


def empirical_order(
    f: ProductFormula,
    partition: PartitionedHamiltonian,
    probe: Sequence[float],
) -> float:
    """Log-log slope of the max-entry deviation between V(t) and exp(-iHt).

    Probe times must be small enough that the deviation stays below 0.1 but
    above the double-precision floor.
    """
    if len(probe) < 4:
        raise DegenerateInputError("need at least 4 probe times")
    h = partition.hamiltonian
    deviations = []
    for t in probe:
        v = circuit_unitary(compile_circuit(f, partition, t))
        u = exact_unitary(h, t)
        deviations.append(float(np.max(np.abs(v - u))))
    deviations = np.asarray(deviations)
    if np.any(deviations < 1e-14):
        raise DegenerateInputError("deviation underflows 1e-14; slope undefined")
    if np.any(deviations >= 0.1):
        raise DegenerateInputError("probe too coarse; deviation reached 0.1")
    slope, _ = np.polyfit(np.log(np.asarray(probe, dtype=float)), np.log(deviations), 1)
    return float(slope)
