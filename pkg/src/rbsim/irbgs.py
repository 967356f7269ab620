"""Interleaved benchmarking with synthesized Clifford elements.

Covers the controlled-phase rotation family CP(k), dense verification of
synthesis recipes, the interleaved estimators (plain ratio and L-th root)
and the three closed-form error bounds on the non-Clifford estimate.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .channels import (
    ComposedChannel,
    Depolarizing,
    DeltaDepolarizing,
    Ideal,
    NoiseChannel,
    NoiseModel,
    PauliChannel,
)
from .cliffords import CliffordElement, compose, inverse, random_clifford
from .engines import SequenceSpec, run_sequence_exact, survival_probability
from .fitting import DecayFit
from .paulis import PauliString
from .rb import RBConfig, fit_rb_data, run_standard_rb
from .seeding import generator_for, parallel_map

__all__ = [
    "cp_matrix",
    "p_matrix",
    "RecipeGate",
    "SynthesisRecipe",
    "VerificationReport",
    "verify_synthesis",
    "builtin_recipes",
    "load_recipes",
    "rotation_expansion_recipe",
    "rotation_chain_recipe",
    "irb_estimate",
    "irbgs_estimate",
    "error_bound",
    "IrbEstimate",
    "IRBGSConfig",
    "run_irbgs",
    "clifford_element_from_unitary",
]

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_P = np.array([[1, 0], [0, 1j]], dtype=complex)
_I = np.eye(2, dtype=complex)

_ONE_QUBIT = {"H": _H, "P": _P, "PDAG": _P.conj().T, "X": _X, "I": _I}

VERIFY_ATOL = 1e-12


def p_matrix(k: int) -> np.ndarray:
    """Single-qubit rotation P(k) = diag(1, exp(i 2 pi / 2^k)); P(2) is the phase gate."""
    if k < 1:
        raise ValueError("rotation index k must be >= 1")
    return np.diag([1.0, np.exp(2j * np.pi / 2 ** k)]).astype(complex)


def cp_matrix(k: int) -> np.ndarray:
    """Controlled-P(k): diag(1, 1, 1, exp(i 2 pi / 2^k)); Clifford only for k = 1."""
    if k < 1:
        raise ValueError("rotation index k must be >= 1")
    return np.diag([1.0, 1.0, 1.0, np.exp(2j * np.pi / 2 ** k)]).astype(complex)


@dataclass(frozen=True)
class RecipeGate:
    """One gate of a synthesis recipe on a two-qubit register."""

    gate: str
    qubits: tuple
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gate", self.gate.upper())
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.gate in ("CP", "CPDAG"):
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError("CP gates need two distinct qubits")
            if self.k is None or self.k < 1:
                raise ValueError("CP gates need a rotation index k >= 1")
        elif self.gate in _ONE_QUBIT:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.gate} acts on one qubit")
        else:
            raise ValueError(f"unknown recipe gate {self.gate!r}")

    @property
    def is_nonclifford(self) -> bool:
        return self.gate in ("CP", "CPDAG") and self.k != 1

    def matrix(self) -> np.ndarray:
        """Dense 4x4 matrix on the two-qubit register (qubit 0 leftmost)."""
        if self.gate in ("CP", "CPDAG"):
            m = cp_matrix(self.k)
            return m if self.gate == "CP" else m.conj().T
        q = self.qubits[0]
        g = _ONE_QUBIT[self.gate]
        return np.kron(g, _I) if q == 0 else np.kron(_I, g)

    def to_json(self) -> dict:
        out = {"gate": self.gate, "qubits": list(self.qubits)}
        if self.k is not None:
            out["k"] = self.k
        return out


def _target_matrix(spec) -> np.ndarray:
    """Accept a named generator target ('IxP', 'CNOT', ...) or a 4x4 literal
    of [re, im] pairs."""
    if isinstance(spec, str):
        name = spec.strip()
        builders = {
            "IxP": np.kron(_I, _P),
            "PxP": np.kron(_P, _P),
            "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                             dtype=complex),
            "IxH": np.kron(_I, _H),
            "HxH": np.kron(_H, _H),
            "IxPdag": np.kron(_I, _P.conj().T),
            "PdagxPdag": np.kron(_P.conj().T, _P.conj().T),
        }
        if name not in builders:
            raise ValueError(f"unknown target name {name!r}")
        return builders[name]
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (4, 4, 2):
        raise ValueError("matrix target must be a 4x4 grid of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True)
class SynthesisRecipe:
    """A target two-qubit Clifford and the gate list synthesizing it.

    Gates are listed in circuit order (first entry applied first).
    """

    name: str
    target: np.ndarray = field(repr=False)
    gates: tuple
    target_name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if np.asarray(self.target).shape != (4, 4):
            raise ValueError("target must be a 4x4 unitary")

    @property
    def nonclifford_count(self) -> int:
        """L: number of CP/CP† instances (counting k = 1, which is Clifford,
        as an instance too, matching the construction's bookkeeping)."""
        return sum(1 for g in self.gates if g.gate in ("CP", "CPDAG"))

    @property
    def rotation_index(self) -> int | None:
        ks = {g.k for g in self.gates if g.gate in ("CP", "CPDAG")}
        return ks.pop() if len(ks) == 1 else None

    def product(self) -> np.ndarray:
        """Dense product of the gate matrices, rightmost factor applied first."""
        out = np.eye(4, dtype=complex)
        for g in self.gates:
            out = g.matrix() @ out
        return out

    def to_json(self) -> dict:
        out = {"name": self.name, "gates": [g.to_json() for g in self.gates]}
        if self.target_name is not None:
            out["target"] = self.target_name
        else:
            t = np.asarray(self.target)
            out["target"] = [[[float(v.real), float(v.imag)] for v in row] for row in t]
        return out

    @classmethod
    def from_json(cls, entry: dict) -> "SynthesisRecipe":
        gates = tuple(
            RecipeGate(g["gate"], tuple(g["qubits"]), g.get("k")) for g in entry["gates"]
        )
        target_spec = entry["target"]
        return cls(
            name=str(entry.get("name", "recipe")),
            target=_target_matrix(target_spec),
            gates=gates,
            target_name=target_spec if isinstance(target_spec, str) else None,
        )


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    max_deviation: float
    global_phase: complex

    def __bool__(self) -> bool:
        return self.passed


def verify_synthesis(recipe: SynthesisRecipe, atol: float = VERIFY_ATOL) -> VerificationReport:
    """Check the recipe's gate product against its target modulo one global phase."""
    product = recipe.product()
    target = np.asarray(recipe.target, dtype=complex)
    idx = np.unravel_index(int(np.argmax(np.abs(product))), product.shape)
    if abs(product[idx]) < 1e-14:
        return VerificationReport(False, float("inf"), 1.0 + 0j)
    phase = target[idx] / product[idx]
    if abs(abs(phase) - 1.0) > 1e-12:
        phase = phase / abs(phase) if abs(phase) > 0 else 1.0 + 0j
    deviation = float(np.max(np.abs(phase * product - target)))
    return VerificationReport(deviation <= atol, deviation, complex(phase))


# ---------------------------------------------------------------------------
# Built-in recipes: the 7-row synthesis of the symmetric generator set
# ---------------------------------------------------------------------------


def _cp(i, j, k=2):
    return RecipeGate("CP", (i, j), k)


def _cpdag(i, j, k=2):
    return RecipeGate("CPDAG", (i, j), k)


def _g(name, q):
    return RecipeGate(name, (q,))


def builtin_recipes(i: int = 0, j: int = 1) -> list:
    """Synthesis of the symmetric two-qubit generator set, two CP gates each."""
    return [
        SynthesisRecipe(
            "phase-on-j", np.kron(_I, _P),
            ( _cp(i, j), _g("X", i), _cp(i, j), _g("X", i) ),
            target_name="IxP",
        ),
        SynthesisRecipe(
            "phase-on-both", np.kron(_P, _P),
            ( _g("X", i), _g("X", j), _cpdag(i, j), _g("X", i), _g("X", j), _cp(i, j) ),
            target_name="PxP",
        ),
        SynthesisRecipe(
            "cnot", _target_matrix("CNOT"),
            ( _g("H", j), _cpdag(i, j), _g("X", j), _cp(i, j),
              _g("PDAG", i), _g("X", j), _g("H", j) ),
            target_name="CNOT",
        ),
        SynthesisRecipe(
            # trailing local factor is X_j H_j: the CP pair contributes I⊗X
            "hadamard-on-j", np.kron(_I, _H),
            ( _g("H", j), _g("X", j), _cp(i, j), _g("X", j), _cp(i, j), _g("PDAG", i) ),
            target_name="IxH",
        ),
        SynthesisRecipe(
            "hadamard-on-both", np.kron(_H, _H),
            ( _g("H", i), _g("H", j), _g("X", j), _cp(i, j), _g("X", j), _cp(i, j),
              _g("PDAG", i) ),
            target_name="HxH",
        ),
        SynthesisRecipe(
            "inverse-phase-on-j", np.kron(_I, _P.conj().T),
            ( _cpdag(i, j), _g("X", i), _cpdag(i, j), _g("X", i) ),
            target_name="IxPdag",
        ),
        SynthesisRecipe(
            "inverse-phase-on-both", np.kron(_P.conj().T, _P.conj().T),
            ( _g("X", i), _g("X", j), _cp(i, j), _g("X", i), _g("X", j), _cpdag(i, j) ),
            target_name="PdagxPdag",
        ),
    ]


def rotation_expansion_recipe(k: int) -> SynthesisRecipe:
    """I ⊗ P(k) from two CP(k) gates: (X⊗I) CP(k) (X⊗I) CP(k).

    Conjugating one CP(k) by X on the control moves its phase to the other
    control branch, so the pair applies P(k) on the target unconditionally.
    """
    if k < 1:
        raise ValueError("rotation index k must be >= 1")
    return SynthesisRecipe(
        name=f"rotation-pair-k{k}",
        target=np.kron(_I, p_matrix(k)),
        gates=( _cp(0, 1, k), _g("X", 0), _cp(0, 1, k), _g("X", 0) ),
    )


def rotation_chain_recipe(k: int) -> SynthesisRecipe:
    """I ⊗ P(2) from 2^(k-1) CP(k) gates, by repeated squaring of P(k)."""
    if k < 2:
        raise ValueError("the chain construction needs k >= 2")
    pair = ( _cp(0, 1, k), _g("X", 0), _cp(0, 1, k), _g("X", 0) )
    return SynthesisRecipe(
        name=f"rotation-chain-k{k}",
        target=np.kron(_I, _P),
        gates=pair * (2 ** (k - 2)),
    )


def load_recipes(path=None) -> list:
    """Load recipes from a JSON file; defaults to the bundled 7-recipe set."""
    if path is None:
        text = resources.files("rbsim").joinpath(
            "data", "clifford_generator_recipes.json").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    entries = json.loads(text)
    if not isinstance(entries, list):
        raise ValueError("recipe file must hold a JSON list")
    return [SynthesisRecipe.from_json(e) for e in entries]


# ---------------------------------------------------------------------------
# Estimators and error bounds
# ---------------------------------------------------------------------------


def irb_estimate(p: float, p_bar_c: float, d: int) -> float:
    """Interleaved estimate r_C = (d-1)(1 - p_bar_c/p)/d for a fixed Clifford."""
    if p <= 0:
        raise ValueError("baseline depolarizing parameter must be positive")
    ratio = p_bar_c / p
    if ratio > 1.0:
        warnings.warn(f"interleaved ratio {ratio} exceeds 1; estimate is negative",
                      stacklevel=2)
    return (d - 1) * (1.0 - ratio) / d


def irbgs_estimate(p: float, p_bar_c: float, d: int, nonclifford_count: int) -> float:
    """Per-non-Clifford estimate r_N = (d-1)/d (1 - (p_bar_c/p)^(1/L)).

    L = 2 reproduces the square-root special case exactly.
    """
    if nonclifford_count < 1:
        raise ValueError("need at least one non-Clifford instance")
    if p <= 0:
        raise ValueError("baseline depolarizing parameter must be positive")
    ratio = p_bar_c / p
    if ratio <= 0:
        raise ValueError("interleaved/baseline ratio must be positive")
    return (d - 1) / d * (1.0 - ratio ** (1.0 / nonclifford_count))


def error_bound(noise_class: str, p: float, d: int, delta: float | None = None) -> float:
    """Upper bound on |r_N - r_N^est| for the stated noise class of the
    non-Clifford gate: 'depolarizing', 'delta' or 'pauli'."""
    if p <= 0 or p > 1:
        raise ValueError("depolarizing parameter must lie in (0, 1]")
    if d < 2:
        raise ValueError("dimension must be >= 2")
    e_prime = 2 * (d * d - 1) * (1 - p) / (d * d) + 4 * math.sqrt(1 - p) * math.sqrt(d * d - 1)
    if noise_class == "depolarizing":
        inner = e_prime
    elif noise_class == "delta":
        if delta is None or not 0 <= delta <= 1:
            raise ValueError("delta class needs a delta in [0, 1]")
        inner = e_prime + 2 * delta
    elif noise_class == "pauli":
        inner = 6 * (d * d - 1) * (1 - p) / (d * d) + 4 * math.sqrt(1 - p) * math.sqrt(d * d - 1)
    else:
        raise ValueError(f"unknown noise class {noise_class!r}")
    return math.sqrt((d - 1) / d * inner / p)


def _noise_class_of(ch: NoiseChannel):
    if isinstance(ch, (Depolarizing, Ideal)):
        return "depolarizing", None
    if isinstance(ch, PauliChannel):
        return "pauli", None
    if isinstance(ch, DeltaDepolarizing):
        return "delta", ch.delta
    raise ValueError(f"no error bound for channel {type(ch).__name__}")


# ---------------------------------------------------------------------------
# The interleaved protocol
# ---------------------------------------------------------------------------


def clifford_element_from_unitary(u: np.ndarray, n: int) -> CliffordElement:
    """Tableau of a dense Clifford unitary; raises if ``u`` is not Clifford."""
    d = 2 ** n
    if u.shape != (d, d):
        raise ValueError("unitary dimension mismatch")
    x = np.zeros((2 * n, n), dtype=np.uint8)
    z = np.zeros((2 * n, n), dtype=np.uint8)
    ph = np.zeros(2 * n, dtype=np.uint8)
    for row in range(2 * n):
        if row < n:
            gen = PauliString.single(n, row, "X")
        else:
            gen = PauliString.single(n, row - n, "Z")
        img = u @ gen.to_matrix() @ u.conj().T
        for idx in range(4 ** n):
            xb = np.array([(idx >> q) & 1 for q in range(n)], dtype=np.uint8)
            zb = np.array([(idx >> (n + q)) & 1 for q in range(n)], dtype=np.uint8)
            cand = PauliString(xb, zb, 0).to_matrix()
            if np.allclose(img, cand, atol=1e-9):
                x[row], z[row], ph[row] = xb, zb, 0
                break
            if np.allclose(img, -cand, atol=1e-9):
                x[row], z[row], ph[row] = xb, zb, 2
                break
        else:
            raise ValueError("unitary does not map Paulis to Paulis; not a Clifford")
    elem = CliffordElement(n, x, z, ph)
    if not elem.is_valid():
        raise ValueError("recovered tableau is not symplectically valid")
    return elem


@dataclass(frozen=True)
class IrbEstimate:
    """Interleaved-run outputs and the applicable error bound."""

    p: float
    p_bar_c: float
    d: int
    nonclifford_count: int
    r_c_est: float
    r_n_est: float
    bound: float
    noise_class: str
    baseline_fit: DecayFit | None = None
    interleaved_fit: DecayFit | None = None
    baseline_data: object = None      # RBData of the plain run
    interleaved_data: object = None   # RBData of the interleaved run


@dataclass(frozen=True)
class IRBGSConfig:
    """Two exact-mode runs: baseline RB and the interleaved variant."""

    lengths: tuple
    k_m: int = 30
    seed: int = 0
    noise: NoiseModel = field(default_factory=NoiseModel)
    noise_n: NoiseChannel = field(default_factory=Ideal)
    recipe: SynthesisRecipe = None
    recipe_clifford_noise: NoiseChannel = field(default_factory=Ideal)
    cpdag_shares_noise: bool = True
    noise_n_dagger: NoiseChannel | None = None
    n: int = 2
    fit_strategy: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(m) for m in self.lengths))
        if self.n != 2:
            raise ValueError("the synthesis construction targets two qubits")
        if self.recipe is None:
            raise ValueError("an interleaved run needs a synthesis recipe")
        if not self.lengths or any(m < 1 for m in self.lengths):
            raise ValueError("lengths must be non-empty with m >= 1")
        if not self.cpdag_shares_noise and self.noise_n_dagger is None:
            raise ValueError("cpdag_shares_noise=False needs a noise_n_dagger channel")

    def dagger_channel(self) -> NoiseChannel:
        return self.noise_n if self.cpdag_shares_noise else self.noise_n_dagger


def run_irbgs(config: IRBGSConfig, threads: int = 1) -> IrbEstimate:
    """Baseline + interleaved exact-mode runs, fits, estimate and bound.

    The fixed element is the recipe's ideal Clifford product; its channel is
    the recipe's non-Clifford noise applied once per CP instance (single
    qubit recipe gates are noiseless by default).
    """
    report = verify_synthesis(config.recipe)
    if not report.passed:
        raise ValueError(
            f"recipe {config.recipe.name!r} failed verification "
            f"(max deviation {report.max_deviation:.3g}); refusing to run"
        )
    d = 2 ** config.n
    n_cp = config.recipe.nonclifford_count
    fixed_element = clifford_element_from_unitary(
        np.asarray(config.recipe.target, dtype=complex), config.n
    )

    base_cfg = RBConfig(
        n=config.n, lengths=config.lengths, k_m=config.k_m, exact=True,
        noise=config.noise, seed=config.seed, fit_strategy=config.fit_strategy,
    )
    baseline = run_standard_rb(base_cfg, threads=threads)
    baseline_fit, _ = fit_rb_data(baseline, d, coefficient_bounds=base_cfg.fit_bounds)

    gate_channel = config.noise.gate
    # net channel of the synthesized fixed element: one Λ_N per CP instance
    # (CP† shares it unless configured otherwise), plus the (default ideal)
    # lumped noise of its single-qubit Cliffords
    cp_count = sum(1 for g in config.recipe.gates if g.gate == "CP")
    cpdag_count = sum(1 for g in config.recipe.gates if g.gate == "CPDAG")
    fixed_channel = ComposedChannel(
        [config.noise_n] * cp_count
        + [config.dagger_channel()] * cpdag_count
        + [config.recipe_clifford_noise]
    )

    def one_sequence(task):
        index, m = task
        rng = generator_for(config.seed ^ 0x1B9, index)
        elements, channels = [], []
        for _ in range(m):
            elements.append(random_clifford(config.n, rng))
            channels.append(gate_channel)
            elements.append(fixed_element)
            channels.append(fixed_channel)
        product = elements[0]
        for e in elements[1:]:
            product = compose(product, e)
        elements.append(inverse(product))
        channels.append(gate_channel)
        spec = SequenceSpec(n=config.n, elements=elements,
                            noise=channels, spam=config.noise.spam)
        return survival_probability(run_sequence_exact(spec), config.noise.spam)

    tasks = [(im * config.k_m + j, m)
             for im, m in enumerate(config.lengths) for j in range(config.k_m)]
    values = parallel_map(one_sequence, tasks, threads)

    per_sequence, means, errs = [], [], []
    for im, m in enumerate(config.lengths):
        vals = np.array(values[im * config.k_m:(im + 1) * config.k_m])
        per_sequence.append(vals)
        means.append(float(np.mean(vals)))
        errs.append(float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0)
    from .rb import RBData

    interleaved_data = RBData(
        lengths=list(config.lengths), p_m=np.array(means), stderr=np.array(errs),
        per_sequence=per_sequence, k_m=config.k_m, shots=0, exact=True,
    )
    interleaved_fit, _ = fit_rb_data(interleaved_data, d,
                                     coefficient_bounds=base_cfg.fit_bounds)

    p = baseline_fit.p
    p_bar_c = interleaved_fit.p
    noise_class, delta = _noise_class_of(config.noise_n)
    return IrbEstimate(
        p=p,
        p_bar_c=p_bar_c,
        d=d,
        nonclifford_count=n_cp,
        r_c_est=irb_estimate(p, p_bar_c, d),
        r_n_est=irbgs_estimate(p, p_bar_c, d, n_cp),
        bound=error_bound(noise_class, p, d, delta),
        noise_class=noise_class,
        baseline_fit=baseline_fit,
        interleaved_fit=interleaved_fit,
        baseline_data=baseline,
        interleaved_data=interleaved_data,
    )
