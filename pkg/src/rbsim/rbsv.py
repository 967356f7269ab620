"""Inverse-free randomized benchmarking via stabilizer verification.

For each random sequence the driver estimates the acceptance probability of
a single-copy stabilizer measurement, exponentiates it to the chosen copy
count R, converts it to a fidelity lower bound, averages the bounds per
length and fits the usual decay curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import measurement_success_probability
from .cliffords import CliffordElement, compose, stabilizer_group
from .engines import CompiledSequence, SequenceSpec, run_sequence_exact
from .fitting import DecayFit, fit_decay, r_from_p
from .rb import RBConfig, _sequence_elements
from .seeding import generator_for, parallel_map

__all__ = [
    "FailureSignatureError",
    "AcceptanceRecord",
    "RBSVResult",
    "RPolicy",
    "RBSVConfig",
    "fidelity_lower_bound",
    "optimal_copies",
    "drift",
    "run_rbsv_sequence",
    "run_rbsv",
    "DEFAULT_COPY_CAP",
]

DEFAULT_COPY_CAP = 1.0e4


class FailureSignatureError(RuntimeError):
    """Acceptance hit zero: the device is too noisy for verification to proceed."""


def fidelity_lower_bound(p_acc: float, r_copies: float) -> float:
    """Lower bound 1 - 1/(p_acc^R * R) on the average sequence fidelity.

    May be negative (vacuous but valid) for small acceptance.
    """
    if r_copies <= 0:
        raise ValueError("copy count must be positive")
    if p_acc < 0 or p_acc > 1:
        raise ValueError("acceptance probability outside [0, 1]")
    if p_acc == 0.0:
        raise FailureSignatureError(
            "acceptance probability is zero; too noisy to verify"
        )
    return 1.0 - 1.0 / (p_acc ** r_copies * r_copies)


def optimal_copies(p_acc: float, cap: float = DEFAULT_COPY_CAP):
    """Copy count R = 1/ln(1/p_acc) maximizing the fidelity lower bound.

    Returns ``(R, saturated)``; perfect acceptance has no finite optimum and
    returns the cap with ``saturated=True``.
    """
    if p_acc <= 0.0:
        raise ValueError("acceptance probability must be positive")
    if p_acc >= 1.0:
        return float(cap), True
    r = 1.0 / math.log(1.0 / p_acc)
    if r >= cap:
        return float(cap), True
    return r, False


def drift(p_acc: float, r_copies: float, true_fidelity: float) -> float:
    """|bound(R) - F|: the gap minimized at R = 1/ln(1/p_acc)."""
    return abs(fidelity_lower_bound(p_acc, r_copies) - true_fidelity)


@dataclass(frozen=True)
class RPolicy:
    """How to pick the copy count per sequence: per-sequence optimum (capped)
    or a fixed value."""

    kind: str = "optimal"
    fixed: float = 100.0
    cap: float = DEFAULT_COPY_CAP

    def __post_init__(self):
        if self.kind not in ("optimal", "fixed"):
            raise ValueError(f"unknown R policy {self.kind!r}")
        if self.kind == "fixed" and self.fixed <= 0:
            raise ValueError("fixed R must be positive")
        if self.cap <= 0:
            raise ValueError("R cap must be positive")

    def choose(self, p_acc: float):
        if self.kind == "fixed":
            return float(self.fixed), False
        return optimal_copies(p_acc, self.cap)


@dataclass(frozen=True)
class AcceptanceRecord:
    """Acceptance estimate for one sequence at one length."""

    j: int
    m: int
    n_reps: int
    n_acc: int | None  # None in exact mode
    p_acc: float

    def __post_init__(self):
        if self.n_acc is not None and not 0 <= self.n_acc <= self.n_reps:
            raise ValueError("accept count outside [0, N_m]")
        if not 0.0 <= self.p_acc <= 1.0:
            raise ValueError("acceptance probability outside [0, 1]")


@dataclass
class RBSVResult:
    """Per-length averaged fidelity lower bounds plus the decay fit."""

    lengths: list
    f_bar: np.ndarray           # averaged lower bound per length
    stderr: np.ndarray
    per_sequence_bounds: list   # one array per length
    per_sequence_p_acc: list    # one array per length
    mean_p_acc: np.ndarray
    mean_copies: np.ndarray
    n_saturated: np.ndarray     # sequences at the copy cap, per length
    k_m: int
    n_m: int
    exact: bool
    fit: DecayFit | None = None
    r_rbsv: float | None = None
    degenerate: bool = False

    def points(self):
        return list(zip(self.lengths, self.f_bar))


@dataclass(frozen=True)
class RBSVConfig(RBConfig):
    """RB configuration extended with the verification knobs."""

    n_m: int = 100
    r_policy: RPolicy = field(default_factory=RPolicy)
    include_identity_stabilizer: bool = True

    def __post_init__(self):
        super().__post_init__()
        if self.n_m < 1:
            raise ValueError("N_m must be >= 1")
        if self.n_m < 2 ** self.n:
            import warnings

            warnings.warn(
                f"N_m={self.n_m} is below the stabilizer-group size 2^{self.n}; "
                "the acceptance estimate may converge poorly",
                stacklevel=2,
            )


def exact_acceptance_probability(spec: SequenceSpec, product: CliffordElement,
                                 include_identity: bool = True) -> float:
    """Group-averaged single-copy success probability on the exact state.

    This is the infinite-N_m limit of the sampled estimator.
    """
    rho = run_sequence_exact(spec)
    group = stabilizer_group(product)
    if not include_identity:
        group = [s for s in group if s.weight > 0]
    probs = [measurement_success_probability(rho, s, spec.spam) for s in group]
    return float(np.mean(probs))


def run_rbsv_sequence(spec: SequenceSpec, n_reps: int, rng: np.random.Generator,
                      exact: bool = False, include_identity: bool = True,
                      j: int = 0) -> AcceptanceRecord:
    """Estimate one sequence's acceptance probability.

    Sampled mode draws a fresh uniform stabilizer of the ideal output state
    per repetition and one accept/reject trajectory sample; exact mode
    returns the group-averaged success probability without sampling.
    """
    if n_reps < 1:
        raise ValueError("N_m must be >= 1")
    m = spec.m
    if exact:
        product = CliffordElement.identity(spec.n)
        for e in spec.elements:
            product = compose(product, e)
        p = exact_acceptance_probability(spec, product, include_identity)
        return AcceptanceRecord(j=j, m=m, n_reps=n_reps, n_acc=None, p_acc=p)
    compiled = CompiledSequence(spec)
    accepts = compiled.acceptance_samples(n_reps, rng, include_identity=include_identity)
    n_acc = int(np.count_nonzero(accepts))
    return AcceptanceRecord(j=j, m=m, n_reps=n_reps, n_acc=n_acc, p_acc=n_acc / n_reps)


def run_rbsv(config: RBSVConfig, threads: int = 1) -> RBSVResult:
    """Full verification-based benchmarking run: sample sequences, estimate
    acceptance per sequence, convert to fidelity lower bounds, average and fit."""
    d = 2 ** config.n

    def one_sequence(task):
        index, m = task
        rng = generator_for(config.seed, index)
        elements = _sequence_elements(config, m, rng)
        spec = SequenceSpec(n=config.n, elements=elements,
                            noise=config.noise.gate, spam=config.noise.spam)
        record = run_rbsv_sequence(
            spec, config.n_m, rng,
            exact=config.exact,
            include_identity=config.include_identity_stabilizer,
            j=index,
        )
        if record.p_acc == 0.0:
            raise FailureSignatureError(
                f"sequence {index} (m={m}) accepted 0/{record.n_reps} repetitions; "
                "the noise is too strong for verification to proceed"
            )
        copies, saturated = config.r_policy.choose(record.p_acc)
        bound = fidelity_lower_bound(record.p_acc, copies)
        return record, copies, saturated, bound

    tasks = [(im * config.k_m + j, m)
             for im, m in enumerate(config.lengths) for j in range(config.k_m)]
    results = parallel_map(one_sequence, tasks, threads)

    f_bar, stderr, per_seq, per_seq_p, mean_p, mean_r, n_sat = [], [], [], [], [], [], []
    for im, m in enumerate(config.lengths):
        chunk = results[im * config.k_m:(im + 1) * config.k_m]
        bounds = np.array([c[3] for c in chunk])
        p_accs = np.array([c[0].p_acc for c in chunk])
        per_seq.append(bounds)
        per_seq_p.append(p_accs)
        f_bar.append(float(np.mean(bounds)))
        stderr.append(float(np.std(bounds, ddof=1) / np.sqrt(bounds.size))
                      if bounds.size > 1 else 0.0)
        mean_p.append(float(np.mean(p_accs)))
        mean_r.append(float(np.mean([c[1] for c in chunk])))
        n_sat.append(int(sum(1 for c in chunk if c[2])))

    result = RBSVResult(
        lengths=list(config.lengths),
        f_bar=np.array(f_bar),
        stderr=np.array(stderr),
        per_sequence_bounds=per_seq,
        per_sequence_p_acc=per_seq_p,
        mean_p_acc=np.array(mean_p),
        mean_copies=np.array(mean_r),
        n_saturated=np.array(n_sat),
        k_m=config.k_m,
        n_m=config.n_m,
        exact=config.exact,
    )

    weights = None
    if np.all(result.stderr > 0):
        weights = 1.0 / result.stderr ** 2
    fit = fit_decay(result.points(), weights=weights,
                    coefficient_bounds=config.fit_bounds)
    result.fit = fit
    result.degenerate = fit.degenerate or fit.at_boundary
    result.r_rbsv = r_from_p(fit.p, d)
    return result
