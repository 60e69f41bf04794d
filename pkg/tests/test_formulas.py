"""Splitting tables, compilation, inversion, and empirical order checks."""

from __future__ import annotations

import numpy as np
import pytest

from trotterprof import (
    Circuit,
    DegenerateInputError,
    FormulaError,
    Fragment,
    OperatorSum,
    PartitionedHamiltonian,
    PauliRotation,
    PauliTerm,
    ProductFormula,
    apply_circuit,
    builtin_formula,
    compile_circuit,
    empirical_order,
    invert_circuit,
)
from trotterprof.formulas import RUTH_COEFFICIENTS, SUZUKI_P, canonical_gate_sequence

from conftest import random_state

RUTH_TABLE = (7 / 24, 2 / 3, 3 / 4, -2 / 3, -1 / 24, 1.0)


def test_lie1_table(tfim_ruth3):
    f = builtin_formula("lie1", tfim_ruth3.partition)
    assert f.steps == ((0, 1.0), (1, 1.0))
    assert f.alpha == 2 and not f.symmetric


def test_strang2_table(tfim_ruth3):
    f = builtin_formula("strang2", tfim_ruth3.partition)
    assert f.steps == ((0, 0.5), (1, 1.0), (0, 0.5))
    assert f.alpha == 3 and f.symmetric


def test_ruth3_table(tfim_ruth3):
    f = builtin_formula("ruth3", tfim_ruth3.partition)
    assert tuple(c for _, c in f.steps) == pytest.approx(RUTH_TABLE)
    assert tuple(k for k, _ in f.steps) == (0, 1, 0, 1, 0, 1)
    assert f.alpha == 4 and not f.symmetric
    assert RUTH_COEFFICIENTS == pytest.approx(RUTH_TABLE)


def test_suzuki4_table(tfim_ruth3):
    f = builtin_formula("suzuki4", tfim_ruth3.partition)
    assert f.alpha == 5 and f.symmetric
    assert SUZUKI_P == pytest.approx(1.0 / (4.0 - 4.0 ** (1.0 / 3.0)))
    assert SUZUKI_P == pytest.approx(0.4144908, abs=1e-7)
    sums = {}
    for k, c in f.steps:
        sums[k] = sums.get(k, 0.0) + c
    for total in sums.values():
        assert total == pytest.approx(1.0, abs=1e-12)


def test_every_builtin_has_unit_coefficient_sums(tfim_ruth3):
    for name in ("lie1", "strang2", "ruth3", "suzuki4"):
        f = builtin_formula(name, tfim_ruth3.partition)
        sums = {}
        for k, c in f.steps:
            sums[k] = sums.get(k, 0.0) + c
        assert all(abs(total - 1.0) <= 1e-12 for total in sums.values())


def test_unknown_formula_name(tfim_ruth3):
    with pytest.raises(FormulaError):
        builtin_formula("magic9", tfim_ruth3.partition)


def test_ruth3_requires_two_fragments():
    z = Fragment(OperatorSum.from_terms([PauliTerm("Z")]))
    single = PartitionedHamiltonian((z,), 1)
    with pytest.raises(FormulaError):
        builtin_formula("ruth3", single)


def test_formula_coefficient_consistency_enforced():
    with pytest.raises(FormulaError):
        ProductFormula(((0, 0.5), (1, 1.0)), 2, False)


def test_fragment_rejects_noncommuting_terms():
    with pytest.raises(FormulaError):
        Fragment(OperatorSum.from_terms([PauliTerm("Z"), PauliTerm("X")]))


def test_compile_zero_time_is_identity(tfim_ruth3, rng):
    f = tfim_ruth3.formula
    c = compile_circuit(f, tfim_ruth3.partition, 0.0)
    assert all(g.angle == 0.0 for g in c.gates)
    s = random_state(rng, 4)
    np.testing.assert_allclose(apply_circuit(s, c).amplitudes, s.amplitudes)


def test_compile_lie1_layer_structure(tfim_ruth3):
    # one splitting step: the ZZ layer (angles J*t) then the X layer (angles h*t)
    f = builtin_formula("lie1", tfim_ruth3.partition)
    t = 0.37
    c = compile_circuit(f, tfim_ruth3.partition, t)
    words = [g.word for g in c.gates]
    assert words == ["ZZII", "IIZZ", "IZZI", "XIII", "IXII", "IIXI", "IIIX"]
    assert [g.angle for g in c.gates[:3]] == pytest.approx([t, t, t])
    assert [g.angle for g in c.gates[3:]] == pytest.approx([t / 3] * 4)


def test_compile_more_steps_halves_angles(tfim_ruth3):
    f = tfim_ruth3.formula
    c1 = compile_circuit(f, tfim_ruth3.partition, 0.4, 1)
    c2 = compile_circuit(f, tfim_ruth3.partition, 0.4, 2)
    assert len(c2.gates) == 2 * len(c1.gates)
    for g1, g2 in zip(c1.gates, c2.gates):
        assert g2.word == g1.word
        assert g2.angle == pytest.approx(g1.angle / 2)


def test_compiled_gate_count_linear_in_steps(tfim_ruth3):
    f = tfim_ruth3.formula
    base = len(compile_circuit(f, tfim_ruth3.partition, 1.0, 1).gates)
    for n in (2, 3, 5):
        assert len(compile_circuit(f, tfim_ruth3.partition, 1.0, n).gates) == n * base


def test_compile_rejects_bad_fragment_index():
    z = Fragment(OperatorSum.from_terms([PauliTerm("Z")]))
    part = PartitionedHamiltonian((z,), 1)
    f = ProductFormula(((0, 0.5), (1, 1.0), (0, 0.5)), 3, True)
    with pytest.raises(FormulaError):
        compile_circuit(f, part, 0.1)


def test_invert_circuit_reverses_and_negates():
    c = Circuit((PauliRotation("ZZ", 0.4), PauliRotation("XI", 0.2)), 2)
    inv = invert_circuit(c)
    assert [g.word for g in inv.gates] == ["XI", "ZZ"]
    assert [g.angle for g in inv.gates] == [-0.2, -0.4]
    assert len(inv.gates) == len(c.gates)


def test_invert_empty_circuit():
    inv = invert_circuit(Circuit((), 3))
    assert inv.gates == ()


def test_invert_round_trips_through_state(tfim_ruth3, rng):
    c = compile_circuit(tfim_ruth3.formula, tfim_ruth3.partition, 0.6, 2)
    s = random_state(rng, 4)
    out = apply_circuit(apply_circuit(s, c), invert_circuit(c))
    np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-10)


@pytest.mark.parametrize("name", ["strang2", "suzuki4"])
def test_symmetric_formulas_honor_their_flag(tfim_ruth3, name):
    # inverted forward circuit equals the circuit at negated time, gate for
    # gate once commuting runs are put in canonical order
    f = builtin_formula(name, tfim_ruth3.partition)
    t = 0.31
    forward = compile_circuit(f, tfim_ruth3.partition, t)
    assert canonical_gate_sequence(invert_circuit(forward)) == canonical_gate_sequence(
        compile_circuit(f, tfim_ruth3.partition, -t)
    )


def test_asymmetric_formula_fails_the_symmetry_comparison(tfim_ruth3):
    f = builtin_formula("ruth3", tfim_ruth3.partition)
    t = 0.31
    forward = compile_circuit(f, tfim_ruth3.partition, t)
    assert canonical_gate_sequence(invert_circuit(forward)) != canonical_gate_sequence(
        compile_circuit(f, tfim_ruth3.partition, -t)
    )


EXPECTED_ORDERS = {"lie1": 2, "strang2": 3, "ruth3": 4, "suzuki4": 5}


@pytest.mark.parametrize("name,alpha", sorted(EXPECTED_ORDERS.items()))
def test_empirical_orders_on_tfim(tfim_ruth3, name, alpha):
    f = builtin_formula(name, tfim_ruth3.partition)
    probe = np.geomspace(0.01, 0.06, 6)
    slope = empirical_order(f, tfim_ruth3.partition, probe)
    assert slope == pytest.approx(alpha, abs=0.3)
    assert slope >= f.alpha - 0.3


def test_empirical_order_suzuki4_on_xxz(xxz_ruth3):
    f = builtin_formula("suzuki4", xxz_ruth3.partition)
    probe = np.geomspace(0.008, 0.04, 6)
    assert empirical_order(f, xxz_ruth3.partition, probe) == pytest.approx(5.0, abs=0.3)


@pytest.mark.parametrize("name,alpha", sorted(EXPECTED_ORDERS.items()))
def test_empirical_orders_reach_alpha_on_xxz(xxz_ruth3, name, alpha):
    f = builtin_formula(name, xxz_ruth3.partition)
    probe = np.geomspace(0.008, 0.04, 6)
    assert empirical_order(f, xxz_ruth3.partition, probe) >= alpha - 0.3


def test_empirical_order_degenerate_probe(tfim_ruth3):
    f = tfim_ruth3.formula
    with pytest.raises(DegenerateInputError):
        empirical_order(f, tfim_ruth3.partition, [0.01, 0.02])  # too few
    with pytest.raises(DegenerateInputError):
        empirical_order(f, tfim_ruth3.partition, [1e-9, 2e-9, 3e-9, 4e-9])
