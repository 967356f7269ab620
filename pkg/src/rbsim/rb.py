"""Standard Clifford randomized benchmarking (with inverse step) and the
generator-sequence variant; produces per-length average survival data."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import NoiseModel
from .cliffords import (
    CliffordElement,
    GeneratorGate,
    compose,
    inverse,
    random_clifford,
)
from .engines import CompiledSequence, SequenceSpec, run_sequence_exact, survival_probability
from .fitting import DecayFit, fit_decay, r_from_p
from .seeding import generator_for, parallel_map

__all__ = [
    "RBConfig",
    "RBData",
    "sample_rb_sequence",
    "sample_generator_sequence",
    "run_standard_rb",
    "fit_rb_data",
    "driver_fit_bounds",
    "PHYSICAL_COEFFICIENT_BOUNDS",
]

# survival probabilities and fidelity bounds live on this scale; the decay
# fit in the drivers is constrained to it to keep the estimate identifiable
PHYSICAL_COEFFICIENT_BOUNDS = ((0.0, 1.0), (0.0, 1.0))


def driver_fit_bounds(d: int, strategy: str, spam_trivial: bool):
    """Coefficient bounds the protocol drivers hand to the decay fit.

    ``auto`` pins A0 to its known no-SPAM value 1/d when the SPAM model is
    trivial (a three-parameter exponential is not identifiable on a shallow
    decay arc), else boxes both coefficients to [0, 1]; ``box`` always
    boxes; ``free`` leaves the fit unconstrained.
    """
    if strategy == "free":
        return None
    if strategy == "box" or not spam_trivial:
        return PHYSICAL_COEFFICIENT_BOUNDS
    if strategy == "auto":
        return ((1.0 / d, 1.0 / d), (0.0, 1.0))
    raise ValueError(f"unknown fit strategy {strategy!r}")


@dataclass(frozen=True)
class RBConfig:
    """Configuration shared by the benchmarking drivers.

    ``k_m`` is the number of random sequences per length, ``shots`` the
    repetitions per sequence in sampled mode.  ``mode`` selects full-Clifford
    elements or blocks of ``generator_block`` uniformly random generator
    gates per fitted element.
    """

    n: int
    lengths: tuple
    k_m: int = 100
    shots: int = 100
    exact: bool = False
    noise: NoiseModel = field(default_factory=NoiseModel)
    mode: str = "clifford"
    generator_block: int = 10
    seed: int = 0
    fit_strategy: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(m) for m in self.lengths))
        if not self.lengths or any(m < 1 for m in self.lengths):
            raise ValueError("lengths must be a non-empty list of m >= 1")
        if self.k_m < 1:
            raise ValueError("k_m must be >= 1")
        if not self.exact and self.shots < 1:
            raise ValueError("shots must be >= 1 in sampled mode")
        if self.mode not in ("clifford", "generator"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "generator" and self.generator_block < 1:
            raise ValueError("generator mode requires a block length b >= 1")
        if self.fit_strategy not in ("auto", "box", "free"):
            raise ValueError(f"unknown fit strategy {self.fit_strategy!r}")
        self.noise.validate()

    @property
    def fit_bounds(self):
        return driver_fit_bounds(2 ** self.n, self.fit_strategy,
                                 self.noise.spam.is_trivial)


@dataclass
class RBData:
    """Per-length averaged survival probabilities."""

    lengths: list
    p_m: np.ndarray
    stderr: np.ndarray
    per_sequence: list  # one array of per-sequence survivals per length
    k_m: int
    shots: int
    exact: bool

    def points(self):
        return list(zip(self.lengths, self.p_m))


def sample_rb_sequence(n: int, m: int, rng: np.random.Generator):
    """m uniformly random Clifford elements plus the exact inverse of their product."""
    if m < 1:
        raise ValueError("sequence length must be >= 1")
    elements = [random_clifford(n, rng) for _ in range(m)]
    product = elements[0]
    for e in elements[1:]:
        product = compose(product, e)
    return elements, inverse(product)


def generator_gate_set(n: int) -> list:
    """The inversion-closed generating set {H_i, P_i, P†_i, CNOT_ij}."""
    gates = []
    for q in range(n):
        gates += [GeneratorGate("H", (q,)), GeneratorGate("P", (q,)), GeneratorGate("PDAG", (q,))]
    for c in range(n):
        for t in range(n):
            if c != t:
                gates.append(GeneratorGate("CNOT", (c, t)))
    return gates


def sample_generator_sequence(n: int, b: int, m: int, rng: np.random.Generator) -> list:
    """m*b gates drawn uniformly from the generator set (m blocks of b)."""
    if b < 1:
        raise ValueError("mixing block length b must be >= 1")
    gates = generator_gate_set(n)
    picks = rng.integers(0, len(gates), size=m * b)
    return [gates[int(i)] for i in picks]


def _sequence_elements(config: RBConfig, m: int, rng: np.random.Generator) -> list:
    if config.mode == "clifford":
        return [random_clifford(config.n, rng) for _ in range(m)]
    gates = sample_generator_sequence(config.n, config.generator_block, m, rng)
    return [CliffordElement.from_gates(config.n, [g]) for g in gates]


def _survival_exact(config: RBConfig, elements: list) -> float:
    product = elements[0]
    for e in elements[1:]:
        product = compose(product, e)
    seq = SequenceSpec(
        n=config.n,
        elements=elements + [inverse(product)],
        noise=config.noise.gate,
        spam=config.noise.spam,
    )
    return survival_probability(run_sequence_exact(seq), config.noise.spam)


def _survival_sampled_dense_fallback(config: RBConfig, elements: list,
                                     rng: np.random.Generator) -> float:
    """Binomial sampling from the exact probability (non-Pauli noise)."""
    p = _survival_exact(config, elements)
    return float(rng.binomial(config.shots, min(max(p, 0.0), 1.0))) / config.shots


def run_standard_rb(config: RBConfig, threads: int = 1) -> RBData:
    """Run the full protocol and average survival over k_m sequences per length.

    Exact mode computes each sequence's survival analytically (no shot
    noise); sampled mode draws Bernoulli samples through the trajectory
    engine when the noise is Pauli-diagonal, else it binomial-samples the
    exact probability.  The inverse element carries one noise application.
    """
    pauli_ok = (
        config.noise.gate.is_pauli_diagonal
        and config.noise.spam.prep.is_pauli_diagonal
        and config.noise.spam.meas.is_pauli_diagonal
    )

    def one_sequence(task):
        index, m = task
        rng = generator_for(config.seed, index)
        elements = _sequence_elements(config, m, rng)
        if config.exact:
            return _survival_exact(config, elements)
        if pauli_ok:
            spec = SequenceSpec(n=config.n, elements=elements,
                                noise=config.noise.gate, spam=config.noise.spam)
            compiled = CompiledSequence(spec)
            compiled.append_inverse(config.noise.gate)
            return float(np.mean(compiled.survival_samples(config.shots, rng)))
        return _survival_sampled_dense_fallback(config, elements, rng)

    tasks = [(im * config.k_m + j, m)
             for im, m in enumerate(config.lengths) for j in range(config.k_m)]
    values = parallel_map(one_sequence, tasks, threads)

    per_sequence, means, errs = [], [], []
    for im, m in enumerate(config.lengths):
        vals = np.array(values[im * config.k_m:(im + 1) * config.k_m])
        per_sequence.append(vals)
        means.append(float(np.mean(vals)))
        errs.append(float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0)
    return RBData(
        lengths=list(config.lengths),
        p_m=np.array(means),
        stderr=np.array(errs),
        per_sequence=per_sequence,
        k_m=config.k_m,
        shots=0 if config.exact else config.shots,
        exact=config.exact,
    )


def fit_rb_data(data: RBData, d: int, weighted: bool = True, coefficient_bounds="box"):
    """Fit the decay curve and return (DecayFit, r).

    ``coefficient_bounds`` may be explicit bounds, None for a free fit, or
    "box" for the [0, 1] physical box.
    """
    weights = None
    if weighted and np.all(data.stderr > 0):
        weights = 1.0 / np.asarray(data.stderr) ** 2
    if isinstance(coefficient_bounds, str):
        coefficient_bounds = PHYSICAL_COEFFICIENT_BOUNDS
    fit = fit_decay(data.points(), weights=weights,
                    coefficient_bounds=coefficient_bounds)
    return fit, r_from_p(fit.p, d)
