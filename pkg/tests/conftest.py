"""Shared fixtures: benchmark setups and a tiny two-fragment system."""

from __future__ import annotations

import numpy as np
import pytest

from trotterprof import (
    Fragment,
    OperatorSum,
    PartitionedHamiltonian,
    PauliTerm,
    init_product_state,
    tfim_config,
    xxz_config,
)


@pytest.fixture(scope="session")
def tfim_ruth3():
    return tfim_config("ruth3")


@pytest.fixture(scope="session")
def tfim_suzuki4():
    return tfim_config("suzuki4")


@pytest.fixture(scope="session")
def xxz_ruth3():
    return xxz_config("ruth3")


@pytest.fixture(scope="session")
def xxz_suzuki4():
    return xxz_config("suzuki4")


@pytest.fixture(scope="session")
def zx_partition():
    """One-qubit system whose compiled first-order circuit is e^{-iZt} e^{-iXt}.

    Steps apply left to right, so listing the X fragment first makes X act
    first on the state and Z the left operator factor: the leading error
    operator is then -(1/2)[Z, X].
    """
    fx = Fragment(OperatorSum.from_terms([PauliTerm("X")]))
    fz = Fragment(OperatorSum.from_terms([PauliTerm("Z")]))
    return PartitionedHamiltonian((fx, fz), 1)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def random_state(rng: np.random.Generator, n: int):
    raw = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    from trotterprof import StateVector

    return StateVector.normalized(raw)


def random_operator_sum(rng: np.random.Generator, n: int, terms: int) -> OperatorSum:
    letters = "IXYZ"
    picked = []
    for _ in range(terms):
        word = "".join(rng.choice(list(letters)) for _ in range(n))
        coeff = complex(rng.normal(), rng.normal())
        picked.append(PauliTerm(word, coeff))
    return OperatorSum.from_terms(picked, hermitian=False)


def random_hermitian_sum(rng: np.random.Generator, n: int, terms: int) -> OperatorSum:
    letters = "IXYZ"
    picked = []
    for _ in range(terms):
        word = "".join(rng.choice(list(letters)) for _ in range(n))
        picked.append(PauliTerm(word, float(rng.normal())))
    return OperatorSum.from_terms(picked, hermitian=True)


@pytest.fixture(scope="session")
def paper_state():
    return init_product_state([(1, 0), (1, 1j), (1, 1), (0, 1)])
