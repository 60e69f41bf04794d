"""Configuration documents: parsing, validation, presets, serialization.

Configs are JSON documents with sections for the system, its partition into
commuting fragments, the product formula, initial state, observable, time
grid, and per-method options.  A document either names a ``preset``
(``tfim-ruth3``, ``tfim-suzuki4``, ``xxz-ruth3``, ``xxz-suzuki4``, with
optional overrides of the option sections) or spells out the full system.
Parsing then re-serializing yields a semantically identical document.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from ._version import __version__
from .errors import ConfigError, FormulaError, HermiticityError, TrotterProfError
from .experiments import (
    ExperimentConfig,
    MPFOptions,
    ProfilingOptions,
    default_times,
    tfim_config,
    xxz_config,
)
from .formulas import (
    FORMULA_NAMES,
    Fragment,
    PartitionedHamiltonian,
    ProductFormula,
    builtin_formula,
)
from .pauli import OperatorSum, PauliTerm
from .profiling import BasisSpec
from .simulator import StateVector, init_product_state

PRESETS = ("tfim-ruth3", "tfim-suzuki4", "xxz-ruth3", "xxz-suzuki4")

_OPTION_SECTIONS = ("times", "profiling", "mpf", "noise", "output")
_SYSTEM_SECTIONS = ("system", "partition", "formula", "initial_state", "observable")


def preset_config(name: str) -> ExperimentConfig:
    """Materialize one of the built-in benchmark setups."""
    try:
        model, formula = name.split("-", 1)
    except ValueError:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}", "preset")
    if model == "tfim":
        builder = tfim_config
    elif model == "xxz":
        builder = xxz_config
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}", "preset")
    try:
        return builder(formula)
    except FormulaError as exc:
        raise ConfigError(str(exc), "preset") from exc


@dataclass(frozen=True)
class ConfigDocument:
    """A validated document: the experiment plus output destination."""

    experiment: ExperimentConfig
    output_path: str | None = None
    output_format: str = "csv"


def _expect(section: Any, kind: type, name: str) -> Any:
    if not isinstance(section, kind):
        raise ConfigError(
            f"{name} must be {kind.__name__}, got {type(section).__name__}", name
        )
    return section


def _real_number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(
            f"{name} must be a real number (Hermitian coefficients only)", name
        )
    return float(value)


def _parse_terms(raw: Any, n: int, name: str) -> list[PauliTerm]:
    items = _expect(raw, list, name)
    if not items:
        raise ConfigError(f"{name} must contain at least one term", name)
    terms = []
    for i, item in enumerate(items):
        entry = _expect(item, dict, f"{name}[{i}]")
        word = entry.get("pauli")
        if not isinstance(word, str) or len(word) != n:
            raise ConfigError(
                f"{name}[{i}].pauli must be a string of {n} letters", f"{name}[{i}].pauli"
            )
        coeff = _real_number(entry.get("coeff"), f"{name}[{i}].coeff")
        try:
            terms.append(PauliTerm(word.upper(), coeff))
        except ValueError as exc:
            raise ConfigError(str(exc), f"{name}[{i}].pauli") from exc
    return terms


def _parse_complex_pair(value: Any, name: str) -> complex:
    pair = _expect(value, list, name)
    if len(pair) != 2:
        raise ConfigError(f"{name} must be [re, im]", name)
    return complex(_real_number(pair[0], name), _real_number(pair[1], name))


def _parse_partition(
    raw: Any, terms: list[PauliTerm], n: int
) -> PartitionedHamiltonian:
    groups = _expect(raw, list, "partition")
    if not groups:
        raise ConfigError("partition must contain at least one fragment", "partition")
    seen: dict[int, int] = {}
    fragments = []
    for g, group in enumerate(groups):
        indices = _expect(group, list, f"partition[{g}]")
        picked = []
        for idx in indices:
            if not isinstance(idx, int) or isinstance(idx, bool):
                raise ConfigError(
                    f"partition[{g}] entries must be term indices", f"partition[{g}]"
                )
            if idx < 0 or idx >= len(terms):
                raise ConfigError(
                    f"partition[{g}] references term {idx}, but the Hamiltonian"
                    f" has terms 0..{len(terms) - 1}",
                    f"partition[{g}]",
                )
            if idx in seen:
                raise ConfigError(
                    f"term {idx} appears in fragments {seen[idx]} and {g}", "partition"
                )
            seen[idx] = g
            picked.append(terms[idx])
        if not picked:
            raise ConfigError(f"partition[{g}] is empty", f"partition[{g}]")
        try:
            fragments.append(Fragment(OperatorSum.from_terms(picked)))
        except (FormulaError, TrotterProfError) as exc:
            raise ConfigError(
                f"partition[{g}]: {exc}", f"partition[{g}]"
            ) from exc
    missing = [i for i in range(len(terms)) if i not in seen]
    if missing:
        raise ConfigError(
            f"partition does not cover Hamiltonian terms {missing}", "partition"
        )
    return PartitionedHamiltonian(tuple(fragments), n)


def _parse_formula(raw: Any, partition: PartitionedHamiltonian) -> tuple[ProductFormula, str | None]:
    if isinstance(raw, str):
        if raw not in FORMULA_NAMES:
            raise ConfigError(
                f"unknown formula {raw!r}; choose from {FORMULA_NAMES}", "formula"
            )
        try:
            return builtin_formula(raw, partition), raw
        except FormulaError as exc:
            raise ConfigError(str(exc), "formula") from exc
    entry = _expect(raw, dict, "formula")
    steps_raw = _expect(entry.get("steps"), list, "formula.steps")
    steps = []
    for i, pair in enumerate(steps_raw):
        item = _expect(pair, list, f"formula.steps[{i}]")
        if len(item) != 2 or not isinstance(item[0], int) or isinstance(item[0], bool):
            raise ConfigError(
                f"formula.steps[{i}] must be [fragment_index, coefficient]",
                f"formula.steps[{i}]",
            )
        steps.append((item[0], _real_number(item[1], f"formula.steps[{i}]")))
    alpha = entry.get("alpha")
    if not isinstance(alpha, int) or isinstance(alpha, bool):
        raise ConfigError("formula.alpha must be an integer", "formula.alpha")
    symmetric = entry.get("symmetric", False)
    if not isinstance(symmetric, bool):
        raise ConfigError("formula.symmetric must be a boolean", "formula.symmetric")
    try:
        formula = ProductFormula(tuple(steps), alpha, symmetric)
    except FormulaError as exc:
        raise ConfigError(f"formula: {exc}", "formula") from exc
    if formula.fragment_count > len(partition.fragments):
        raise ConfigError(
            "formula addresses more fragments than the partition provides", "formula"
        )
    return formula, None


def _parse_state(raw: Any, n: int) -> StateVector:
    entry = _expect(raw, dict, "initial_state")
    if "factors" in entry:
        factors_raw = _expect(entry["factors"], list, "initial_state.factors")
        if len(factors_raw) != n:
            raise ConfigError(
                f"initial_state.factors must list {n} qubit pairs",
                "initial_state.factors",
            )
        factors = []
        for i, pair in enumerate(factors_raw):
            item = _expect(pair, list, f"initial_state.factors[{i}]")
            if len(item) != 2:
                raise ConfigError(
                    f"initial_state.factors[{i}] must be [[re,im],[re,im]]",
                    f"initial_state.factors[{i}]",
                )
            factors.append(
                (
                    _parse_complex_pair(item[0], f"initial_state.factors[{i}][0]"),
                    _parse_complex_pair(item[1], f"initial_state.factors[{i}][1]"),
                )
            )
        try:
            return init_product_state(factors)
        except TrotterProfError as exc:
            raise ConfigError(str(exc), "initial_state.factors") from exc
    if "amplitudes" in entry:
        amps_raw = _expect(entry["amplitudes"], list, "initial_state.amplitudes")
        if len(amps_raw) != (1 << n):
            raise ConfigError(
                f"initial_state.amplitudes must list {1 << n} entries",
                "initial_state.amplitudes",
            )
        amps = [
            _parse_complex_pair(v, f"initial_state.amplitudes[{i}]")
            for i, v in enumerate(amps_raw)
        ]
        try:
            return StateVector.normalized(amps)
        except TrotterProfError as exc:
            raise ConfigError(str(exc), "initial_state.amplitudes") from exc
    raise ConfigError(
        "initial_state needs either 'factors' or 'amplitudes'", "initial_state"
    )


def _parse_times(raw: Any) -> tuple[float, ...]:
    if raw is None:
        return default_times()
    entry = _expect(raw, dict, "times")
    if "values" in entry:
        values = _expect(entry["values"], list, "times.values")
        times = tuple(_real_number(v, "times.values") for v in values)
    else:
        start = _real_number(entry.get("start", 0.1), "times.start")
        stop = _real_number(entry.get("stop", 1.0), "times.stop")
        points = entry.get("points", 20)
        if not isinstance(points, int) or isinstance(points, bool) or points < 1:
            raise ConfigError("times.points must be a positive integer", "times.points")
        scale = entry.get("scale", "log")
        if scale == "log":
            if start <= 0:
                raise ConfigError("log scale needs times.start > 0", "times.start")
            times = tuple(np.geomspace(start, stop, points))
        elif scale == "linear":
            times = tuple(np.linspace(start, stop, points))
        else:
            raise ConfigError("times.scale must be 'log' or 'linear'", "times.scale")
    if any(t <= 0 for t in times):
        raise ConfigError("times must be positive", "times")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("times must strictly increase", "times")
    return times


def _parse_profiling(raw: Any, alpha: int) -> ProfilingOptions:
    if raw is None:
        return ProfilingOptions()
    entry = _expect(raw, dict, "profiling")
    steps = entry.get("trotter_steps", 1)
    if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
        raise ConfigError(
            "profiling.trotter_steps must be a positive integer",
            "profiling.trotter_steps",
        )
    a_grid = entry.get("a_grid")
    grid: tuple[float, ...] | None = None
    if a_grid is not None:
        values = _expect(a_grid, list, "profiling.a_grid")
        grid = tuple(_real_number(v, "profiling.a_grid") for v in values)
        if len(set(grid)) != len(grid):
            raise ConfigError("duplicate a values in profiling.a_grid", "profiling.a_grid")
    basis: BasisSpec | None = None
    extra = entry.get("n_extra_orders")
    if extra is not None:
        if not isinstance(extra, int) or isinstance(extra, bool) or extra < 0:
            raise ConfigError(
                "profiling.n_extra_orders must be a non-negative integer",
                "profiling.n_extra_orders",
            )
        top = min(alpha + extra, 2 * alpha - 2)
        anti = entry.get("include_antisymmetric", True)
        if not isinstance(anti, bool):
            raise ConfigError(
                "profiling.include_antisymmetric must be a boolean",
                "profiling.include_antisymmetric",
            )
        basis = BasisSpec(tuple(range(alpha, top + 1)), anti)
    return ProfilingOptions(trotter_steps=steps, a_grid=grid, basis=basis)


def _parse_mpf(raw: Any, default_symmetric: bool) -> MPFOptions:
    if raw is None:
        return MPFOptions(step_counts=(1, 2), symmetric=default_symmetric)
    entry = _expect(raw, dict, "mpf")
    counts_raw = entry.get("step_counts", [1, 2])
    counts_list = _expect(counts_raw, list, "mpf.step_counts")
    counts = []
    for v in counts_list:
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(
                "mpf.step_counts must be positive integers", "mpf.step_counts"
            )
        counts.append(v)
    if len(set(counts)) != len(counts):
        raise ConfigError("mpf.step_counts must be distinct", "mpf.step_counts")
    symmetric = entry.get("symmetric")
    if symmetric is None:
        symmetric = default_symmetric
    if not isinstance(symmetric, bool):
        raise ConfigError("mpf.symmetric must be a boolean", "mpf.symmetric")
    return MPFOptions(step_counts=tuple(counts), symmetric=symmetric)


def _parse_noise(raw: Any) -> tuple[float, int]:
    if raw is None:
        return 0.0, 1234
    entry = _expect(raw, dict, "noise")
    sigma = _real_number(entry.get("sigma", 0.0), "noise.sigma")
    if sigma < 0:
        raise ConfigError("noise.sigma must be non-negative", "noise.sigma")
    seed = entry.get("seed", 1234)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("noise.seed must be an integer", "noise.seed")
    return sigma, seed


def _parse_output(raw: Any) -> tuple[str | None, str]:
    if raw is None:
        return None, "csv"
    entry = _expect(raw, dict, "output")
    path = entry.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path must be a string", "output.path")
    fmt = entry.get("format", "csv")
    if fmt != "csv":
        raise ConfigError("output.format must be 'csv'", "output.format")
    return path, fmt


def parse_document(text: str) -> ConfigDocument:
    """Parse and fully validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            "syntax",
        ) from exc
    doc = _expect(raw, dict, "document")

    preset = doc.get("preset")
    if preset is not None:
        if not isinstance(preset, str):
            raise ConfigError("preset must be a string", "preset")
        for section in _SYSTEM_SECTIONS:
            if section in doc:
                raise ConfigError(
                    f"preset documents may not also define {section!r}", section
                )
        cfg = preset_config(preset)
        if "times" in doc:
            cfg = replace(cfg, times=_parse_times(doc["times"]))
        if "profiling" in doc:
            cfg = replace(cfg, profiling=_parse_profiling(doc["profiling"], cfg.formula.alpha))
        if "mpf" in doc:
            cfg = replace(cfg, mpf=_parse_mpf(doc["mpf"], cfg.formula.symmetric))
        if "noise" in doc:
            sigma, seed = _parse_noise(doc["noise"])
            cfg = replace(cfg, noise_sigma=sigma, seed=seed)
        path, fmt = _parse_output(doc.get("output"))
        return ConfigDocument(cfg, path, fmt)

    system = _expect(doc.get("system"), dict, "system")
    n = system.get("num_qubits")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("system.num_qubits must be a positive integer", "system.num_qubits")
    ham_terms = _parse_terms(system.get("hamiltonian"), n, "system.hamiltonian")
    partition = _parse_partition(doc.get("partition"), ham_terms, n)
    formula, formula_name = _parse_formula(doc.get("formula"), partition)
    state = _parse_state(doc.get("initial_state"), n)
    try:
        observable = OperatorSum.from_terms(
            _parse_terms(doc.get("observable"), n, "observable"), hermitian=True
        )
    except HermiticityError as exc:
        raise ConfigError(str(exc), "observable") from exc
    times = _parse_times(doc.get("times"))
    profiling = _parse_profiling(doc.get("profiling"), formula.alpha)
    mpf = _parse_mpf(doc.get("mpf"), formula.symmetric)
    sigma, seed = _parse_noise(doc.get("noise"))
    path, fmt = _parse_output(doc.get("output"))

    cfg = ExperimentConfig(
        partition=partition,
        formula=formula,
        observable=observable,
        initial_state=state,
        times=times,
        profiling=profiling,
        mpf=mpf,
        noise_sigma=sigma,
        seed=seed,
        formula_name=formula_name,
    )
    return ConfigDocument(cfg, path, fmt)


def parse_config(text: str) -> ExperimentConfig:
    """Parse a document and return the fully validated experiment setup."""
    return parse_document(text).experiment


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def document_for(cfg: ExperimentConfig, output_path: str | None = None) -> dict:
    """Canonical document dictionary describing an experiment setup."""
    terms: list[dict] = []
    partition: list[list[int]] = []
    cursor = 0
    for fragment in cfg.partition.fragments:
        indices = []
        for term in fragment.terms:
            terms.append({"pauli": term.word, "coeff": float(term.coeff.real)})
            indices.append(cursor)
            cursor += 1
        partition.append(indices)
    if cfg.formula_name is not None:
        formula: Any = cfg.formula_name
    else:
        formula = {
            "steps": [[int(i), float(c)] for i, c in cfg.formula.steps],
            "alpha": cfg.formula.alpha,
            "symmetric": cfg.formula.symmetric,
        }
    doc: dict = {
        "system": {
            "num_qubits": cfg.partition.n,
            "hamiltonian": terms,
        },
        "partition": partition,
        "formula": formula,
        "initial_state": {
            "amplitudes": [_pair(z) for z in cfg.initial_state.amplitudes]
        },
        "observable": [
            {"pauli": t.word, "coeff": float(t.coeff.real)} for t in cfg.observable
        ],
        "times": {"values": [float(t) for t in cfg.times]},
        "profiling": {
            "trotter_steps": cfg.profiling.trotter_steps,
            "a_grid": (
                None
                if cfg.profiling.a_grid is None
                else [float(a) for a in cfg.profiling.a_grid]
            ),
        },
        "mpf": {
            "step_counts": list(cfg.mpf.step_counts),
            "symmetric": cfg.mpf.symmetric,
        },
        "noise": {"sigma": cfg.noise_sigma, "seed": cfg.seed},
    }
    if cfg.profiling.basis is not None:
        top = max(cfg.profiling.basis.orders) if cfg.profiling.basis.orders else cfg.formula.alpha
        doc["profiling"]["n_extra_orders"] = max(0, top - cfg.formula.alpha)
        doc["profiling"]["include_antisymmetric"] = cfg.profiling.basis.include_antisymmetric
    if output_path is not None:
        doc["output"] = {"path": output_path, "format": "csv"}
    return doc


def serialize_config(cfg: ExperimentConfig, output_path: str | None = None) -> str:
    """Canonical JSON text for an experiment (stable key order)."""
    return json.dumps(document_for(cfg, output_path), sort_keys=True, indent=2) + "\n"


def config_digest(cfg: ExperimentConfig) -> str:
    """SHA-256 of the canonical serialization, for output provenance lines."""
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


def base_metadata(cfg: ExperimentConfig) -> dict[str, str]:
    return {
        "tool": f"trotterprof {__version__}",
        "config-sha256": config_digest(cfg),
        "seed": str(cfg.seed),
    }
