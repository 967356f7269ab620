"""Execution backends for noisy Clifford sequences.

Two paths with matched semantics:

* an exact density-matrix engine (small registers, no shot noise), and
* a stochastic Pauli-fault trajectory engine on the tableau representation
  (Pauli-diagonal noise only, cheap enough for large shot counts).

The trajectory engine additionally exposes a vectorized per-sequence batch
used by the protocol drivers; it propagates packed Pauli indices through
precomputed conjugation tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .paulis import PauliString, pauli_multiply
from .cliffords import (
    CliffordElement,
    MAX_DENSE_QUBITS,
    clifford_to_matrix,
    conjugate_pauli,
)
from .channels import (
    NoiseChannel,
    Ideal,
    SpamModel,
    UnsupportedChannelError,
    apply_channel,
    fault_distribution,
    sample_pauli_fault,
    zero_state,
)

__all__ = [
    "SequenceSpec",
    "TrajectoryOutcome",
    "run_sequence_exact",
    "run_sequence_trajectory",
    "survival_probability",
    "CompiledSequence",
]

MAX_TABLE_QUBITS = 8

_PARITY_256 = np.array([bin(v).count("1") & 1 for v in range(256)], dtype=np.uint8)


def _normalize_element(n: int, entry) -> CliffordElement:
    if isinstance(entry, CliffordElement):
        if entry.n != n:
            raise ValueError("element register size mismatch")
        return entry
    return CliffordElement.from_gates(n, entry)


@dataclass
class SequenceSpec:
    """A noisy Clifford sequence: elements plus one channel per element.

    ``noise`` may be a single channel (applied after every element) or a
    list with one channel per element.  ``elements`` entries may be
    CliffordElements or GeneratorGate lists.
    """

    n: int
    elements: list
    noise: NoiseChannel | list = field(default_factory=Ideal)
    spam: SpamModel = field(default_factory=SpamModel)

    def __post_init__(self):
        self.elements = [_normalize_element(self.n, e) for e in self.elements]
        if isinstance(self.noise, (list, tuple)):
            if len(self.noise) != len(self.elements):
                raise ValueError("need one noise channel per element")
            self.noise = list(self.noise)

    @property
    def m(self) -> int:
        return len(self.elements)

    def channel_for(self, i: int) -> NoiseChannel:
        return self.noise[i] if isinstance(self.noise, list) else self.noise


@dataclass(frozen=True)
class TrajectoryOutcome:
    """One stabilizer-measurement sample from the trajectory engine."""

    accept: bool
    measured_stabilizer: PauliString
    fault_record: PauliString


# ---------------------------------------------------------------------------
# Exact engine
# ---------------------------------------------------------------------------


def run_sequence_exact(spec: SequenceSpec) -> np.ndarray:
    """Exact output state (Λ_m ∘ C_m) ... (Λ_1 ∘ C_1) Λ_prep(|0..0><0..0|)."""
    if spec.n > MAX_DENSE_QUBITS:
        raise ValueError(
            f"exact engine limited to n <= {MAX_DENSE_QUBITS}; use the trajectory engine"
        )
    rho = apply_channel(spec.spam.prep, zero_state(spec.n))
    for i, element in enumerate(spec.elements):
        u = clifford_to_matrix(element)
        rho = u @ rho @ u.conj().T
        rho = apply_channel(spec.channel_for(i), rho)
    return rho


def survival_probability(rho: np.ndarray, spam: SpamModel | None = None) -> float:
    """Return-to-start observable Tr(Λ_m(rho) |0..0><0..0|)."""
    spam = spam or SpamModel()
    out = apply_channel(spam.meas, rho)
    return float(np.real(out[0, 0]))


# ---------------------------------------------------------------------------
# Trajectory engine: single-sample reference implementation
# ---------------------------------------------------------------------------


def _sample_measurement_flip(s: PauliString, p_meas: float, rng: np.random.Generator) -> bool:
    """Parity of outcome flips from per-qubit X/Y/Z errors before measurement."""
    flip = False
    for q in range(s.n):
        sx, sz = int(s.x[q]), int(s.z[q])
        if not (sx or sz):
            continue
        if rng.random() >= p_meas:
            continue
        code = int(rng.integers(1, 4))  # 1=X, 2=Z, 3=Y
        ex, ez = code & 1, code >> 1
        if (ex & sz) ^ (ez & sx):
            flip = not flip
    return flip


def run_sequence_trajectory(spec: SequenceSpec, s: PauliString,
                            rng: np.random.Generator) -> TrajectoryOutcome:
    """One Bernoulli sample of the stabilizer measurement of ``s``.

    Propagates sampled Pauli faults through the tableau; the success
    probability matches the exact engine for Pauli-diagonal noise.
    """
    if s.n != spec.n:
        raise ValueError("stabilizer register size mismatch")
    if not s.is_hermitian:
        raise ValueError("measured stabilizer must be Hermitian")
    fault = sample_pauli_fault(spec.spam.prep, spec.n, rng)
    for i, element in enumerate(spec.elements):
        fault = conjugate_pauli(element, fault)
        fault = pauli_multiply(sample_pauli_fault(spec.channel_for(i), spec.n, rng), fault)
    fault = pauli_multiply(sample_pauli_fault(spec.spam.meas, spec.n, rng), fault)
    accept = fault.commutes_with(s)
    if spec.spam.meas_flip:
        if _sample_measurement_flip(s, spec.spam.meas_flip, rng):
            accept = not accept
    return TrajectoryOutcome(accept=accept, measured_stabilizer=s, fault_record=fault)


# ---------------------------------------------------------------------------
# Vectorized batch path on packed Pauli indices
# ---------------------------------------------------------------------------


def _pack_rows(element: CliffordElement) -> np.ndarray:
    """Packed index of each image row: bit q = x_q, bit n+q = z_q."""
    n = element.n
    weights_x = (1 << np.arange(n)).astype(np.int64)
    weights_z = (1 << (n + np.arange(n))).astype(np.int64)
    return element.x_bits.astype(np.int64) @ weights_x + element.z_bits.astype(np.int64) @ weights_z


def _conjugation_table(element: CliffordElement) -> np.ndarray:
    """Unsigned conjugation map on all 4^n packed Pauli indices."""
    n = element.n
    rows = _pack_rows(element)
    table = np.zeros(4 ** n, dtype=np.int64)
    for b in range(2 * n):
        step = 1 << b
        table[step:2 * step] = table[:step] ^ rows[b]
    return table


def _anticommutation(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Symplectic parity between packed index arrays (1 = anticommute)."""
    mask = (1 << n) - 1
    t = ((a & mask) & (b >> n)) ^ ((a >> n) & (b & mask))
    out = np.zeros(t.shape, dtype=np.uint8)
    while True:
        out ^= _PARITY_256[t & 0xFF]
        t = t >> 8
        if not np.any(t):
            return out


class CompiledSequence:
    """Per-sequence precomputation for vectorized trajectory batches.

    Holds one unsigned conjugation table per element, the packed stabilizer
    group of the ideal product, and the fault CDF per element.
    """

    def __init__(self, spec: SequenceSpec):
        n = spec.n
        if n > MAX_TABLE_QUBITS:
            raise ValueError(f"batch trajectories limited to n <= {MAX_TABLE_QUBITS}")
        self.n = n
        self.spec = spec
        self.tables = [_conjugation_table(e) for e in spec.elements]
        # ideal product as a GF(2) matrix on packed rows
        rows = _pack_rows(CliffordElement.identity(n))
        for t in self.tables:
            rows = t[rows]
        self.product_rows = rows
        # packed stabilizer group of product|0..0>: all XOR combinations of z-rows
        group = np.zeros(2 ** n, dtype=np.int64)
        for i in range(n):
            step = 1 << i
            group[step:2 * step] = group[:step] ^ rows[n + i]
        self.stabilizer_indices = group
        self._fault_cdfs = [
            np.cumsum(fault_distribution(spec.channel_for(i), n))
            for i in range(spec.m)
        ]
        self._prep_cdf = self._cdf_or_none(spec.spam.prep)
        self._meas_cdf = self._cdf_or_none(spec.spam.meas)

    def _cdf_or_none(self, ch: NoiseChannel):
        if isinstance(ch, Ideal):
            return None
        return np.cumsum(fault_distribution(ch, self.n))

    def _sample_faults(self, cdf: np.ndarray, reps: int, rng: np.random.Generator) -> np.ndarray:
        return np.searchsorted(cdf, rng.random(reps), side="right").astype(np.int64)

    def propagate_faults(self, reps: int, rng: np.random.Generator) -> np.ndarray:
        """Cumulative packed fault after the full noisy sequence, per repetition."""
        f = np.zeros(reps, dtype=np.int64)
        if self._prep_cdf is not None:
            f ^= self._sample_faults(self._prep_cdf, reps, rng)
        for table, cdf in zip(self.tables, self._fault_cdfs):
            f = table[f]
            f ^= self._sample_faults(cdf, reps, rng)
        if self._meas_cdf is not None:
            f ^= self._sample_faults(self._meas_cdf, reps, rng)
        return f

    def _measurement_flips(self, s_idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Vectorized per-qubit X/Y/Z flip parity for per-repetition stabilizers."""
        p = self.spec.spam.meas_flip
        reps = s_idx.size
        flips = np.zeros(reps, dtype=np.uint8)
        events = rng.random((reps, self.n)) < p
        codes = rng.integers(1, 4, size=(reps, self.n))  # 1=X, 2=Z, 3=Y
        for q in range(self.n):
            sx = (s_idx >> q) & 1
            sz = (s_idx >> (self.n + q)) & 1
            touched = (sx | sz).astype(bool)
            ex = codes[:, q] & 1
            ez = codes[:, q] >> 1
            anti = ((ex & sz) ^ (ez & sx)).astype(bool)
            flips ^= (events[:, q] & touched & anti).astype(np.uint8)
        return flips

    def acceptance_samples(self, reps: int, rng: np.random.Generator,
                           include_identity: bool = True) -> np.ndarray:
        """Accept/reject samples, one fresh uniform stabilizer per repetition."""
        f = self.propagate_faults(reps, rng)
        group = self.stabilizer_indices
        if include_identity:
            picks = rng.integers(0, group.size, size=reps)
        else:
            picks = rng.integers(1, group.size, size=reps)
        s_idx = group[picks]
        accept = _anticommutation(f, s_idx, self.n) == 0
        if self.spec.spam.meas_flip:
            accept ^= self._measurement_flips(s_idx, rng).astype(bool)
        return accept

    def append_inverse(self, channel: NoiseChannel):
        """Append the (unsigned) inverse of the current product as one more
        noisy element, turning the ideal circuit into the identity."""
        n = self.n
        shifts = np.arange(2 * n, dtype=np.int64)
        m_bits = ((self.product_rows[:, None] >> shifts) & 1).astype(np.uint8)
        # symplectic inverse: swap x/z blocks of the transpose
        swap = np.concatenate([np.arange(n, 2 * n), np.arange(n)])
        minv = m_bits.T[np.ix_(swap, swap)]
        inv = CliffordElement(n, minv[:, :n], minv[:, n:], np.zeros(2 * n, dtype=np.uint8))
        table = _conjugation_table(inv)
        self.tables.append(table)
        self._fault_cdfs.append(np.cumsum(fault_distribution(channel, n)))
        self.product_rows = table[self.product_rows]
        group = np.zeros(2 ** n, dtype=np.int64)
        for i in range(n):
            step = 1 << i
            group[step:2 * step] = group[:step] ^ self.product_rows[n + i]
        self.stabilizer_indices = group

    def survival_samples(self, reps: int, rng: np.random.Generator) -> np.ndarray:
        """Return-to-|0..0> samples (the plain-RB observable)."""
        f = self.propagate_faults(reps, rng)
        fx = f & ((1 << self.n) - 1)
        if self.spec.spam.meas_flip:
            # measuring Z on every qubit: X or Y errors flip that qubit's outcome
            events = rng.random((reps, self.n)) < self.spec.spam.meas_flip
            codes = rng.integers(1, 4, size=(reps, self.n))
            for q in range(self.n):
                fx ^= (events[:, q] & ((codes[:, q] & 1) == 1)).astype(np.int64) << q
        return fx == 0
