"""Noise channels, SPAM models and density-matrix helpers.

Channels act on dense density matrices (the exact engine's representation)
and, when Pauli-diagonal, expose fault sampling for the trajectory engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .paulis import PauliString

__all__ = [
    "NoiseChannel",
    "Ideal",
    "Depolarizing",
    "PauliChannel",
    "DeltaDepolarizing",
    "ComposedChannel",
    "SpamModel",
    "NoiseModel",
    "UnsupportedChannelError",
    "zero_state",
    "maximally_mixed_state",
    "check_density_matrix",
    "apply_channel",
    "channel_superoperator",
    "choi_matrix",
    "check_cptp",
    "average_fidelity",
    "depolarizing_parameter",
    "sample_pauli_fault",
    "measurement_success_probability",
    "channel_from_spec",
    "rotation_unitary",
]

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGENVALUE_ATOL = 1e-10


class UnsupportedChannelError(ValueError):
    """Raised when a channel cannot be used on the requested execution path."""


# ---------------------------------------------------------------------------
# Density-matrix helpers (plain complex ndarrays)
# ---------------------------------------------------------------------------


def zero_state(n: int) -> np.ndarray:
    """|0...0><0...0| on n qubits."""
    d = 2 ** n
    rho = np.zeros((d, d), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def maximally_mixed_state(n: int) -> np.ndarray:
    d = 2 ** n
    return np.eye(d, dtype=complex) / d


def check_density_matrix(rho: np.ndarray, *, herm_atol=HERMITICITY_ATOL,
                         trace_atol=TRACE_ATOL, eig_atol=EIGENVALUE_ATOL):
    """Raise if ``rho`` is not Hermitian, unit-trace and positive within tolerance."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_atol:
        raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -eig_atol:
        raise ValueError("density matrix has a negative eigenvalue")


def rotation_unitary(n: int, qubit: int = 0, axis: str = "X", angle: float = 1e-2) -> np.ndarray:
    """exp(-i*angle/2 * P_qubit) on the full register; the default perturbation."""
    p = PauliString.single(n, qubit, axis).to_matrix()
    d = 2 ** n
    return np.cos(angle / 2) * np.eye(d, dtype=complex) - 1j * np.sin(angle / 2) * p


# ---------------------------------------------------------------------------
# Channel variants
# ---------------------------------------------------------------------------


class NoiseChannel:
    """Base class; concrete channels implement ``apply``."""

    def apply(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_pauli_diagonal(self) -> bool:
        return False

    def validate(self):
        """Raise on invalid parameters."""


@dataclass(frozen=True)
class Ideal(NoiseChannel):
    def apply(self, rho: np.ndarray) -> np.ndarray:
        return rho

    @property
    def is_pauli_diagonal(self) -> bool:
        return True


@dataclass(frozen=True)
class Depolarizing(NoiseChannel):
    """rho -> (1 - epsilon) rho + epsilon * I/d."""

    epsilon: float

    def validate(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"depolarizing strength {self.epsilon} outside [0, 1]")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        self.validate()
        d = rho.shape[0]
        return (1.0 - self.epsilon) * rho + self.epsilon * np.trace(rho) * np.eye(d) / d

    @property
    def is_pauli_diagonal(self) -> bool:
        return True

    def fault_probabilities(self, n: int) -> np.ndarray:
        """Probabilities over the 4^n Pauli faults (identity first).

        Uses I/d = uniform Pauli twirl: identity keeps 1 - eps*(d^2-1)/d^2,
        every non-identity Pauli gets eps/d^2.
        """
        self.validate()
        dsq = 4 ** n
        probs = np.full(dsq, self.epsilon / dsq)
        probs[0] = 1.0 - self.epsilon * (dsq - 1) / dsq
        return probs


@dataclass(frozen=True)
class PauliChannel(NoiseChannel):
    """rho -> sum_P prob[P] P rho P with Hermitian, phase-free Pauli keys."""

    probabilities: tuple  # tuple of (PauliString, float)

    def __init__(self, probabilities):
        if isinstance(probabilities, dict):
            probabilities = tuple(probabilities.items())
        items = []
        for key, prob in probabilities:
            if isinstance(key, str):
                key = PauliString.from_label(key)
            items.append((key, float(prob)))
        object.__setattr__(self, "probabilities", tuple(items))

    def validate(self):
        total = 0.0
        n = None
        for key, prob in self.probabilities:
            if key.phase != 0:
                raise ValueError(f"Pauli key {key.label()} must carry phase +1")
            if prob < 0:
                raise ValueError(f"negative probability {prob}")
            n = key.n if n is None else n
            if key.n != n:
                raise ValueError("Pauli keys act on different register sizes")
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"Pauli probabilities sum to {total}, not 1")

    @property
    def n(self) -> int:
        return self.probabilities[0][0].n

    def apply(self, rho: np.ndarray) -> np.ndarray:
        self.validate()
        out = np.zeros_like(rho, dtype=complex)
        for key, prob in self.probabilities:
            if prob == 0.0:
                continue
            p = key.to_matrix()
            out += prob * (p @ rho @ p.conj().T)
        return out

    @property
    def is_pauli_diagonal(self) -> bool:
        return True


@dataclass(frozen=True)
class DeltaDepolarizing(NoiseChannel):
    """rho -> (1-delta) (p' rho + (1-p') I/d) + delta U rho U†.

    The perturbation is fixed to a unitary conjugation (one constructive
    choice of the residual term); ``perturbation`` defaults to a small
    single-qubit rotation when built through :func:`channel_from_spec`.
    """

    delta: float
    p_prime: float
    perturbation: np.ndarray = field(default=None, repr=False)

    def validate(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta {self.delta} outside [0, 1]")
        if not 0.0 <= self.p_prime <= 1.0:
            raise ValueError(f"p' {self.p_prime} outside [0, 1]")
        if self.perturbation is None:
            raise ValueError("perturbation unitary is required")
        u = self.perturbation
        if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
            raise ValueError("perturbation is not unitary")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        self.validate()
        d = rho.shape[0]
        if self.perturbation.shape[0] != d:
            raise ValueError("perturbation dimension does not match state")
        dep = self.p_prime * rho + (1 - self.p_prime) * np.trace(rho) * np.eye(d) / d
        u = self.perturbation
        return (1 - self.delta) * dep + self.delta * (u @ rho @ u.conj().T)

    @property
    def is_pauli_diagonal(self) -> bool:
        return False


@dataclass(frozen=True)
class ComposedChannel(NoiseChannel):
    """Sequential composition: the first listed channel acts first."""

    channels: tuple

    def __init__(self, channels):
        object.__setattr__(self, "channels", tuple(channels))

    def validate(self):
        for ch in self.channels:
            ch.validate()

    def apply(self, rho: np.ndarray) -> np.ndarray:
        for ch in self.channels:
            rho = ch.apply(rho)
        return rho

    @property
    def is_pauli_diagonal(self) -> bool:
        return all(ch.is_pauli_diagonal for ch in self.channels)


@dataclass(frozen=True)
class SpamModel:
    """State-preparation and measurement noise bundle.

    ``prep`` acts once on the initial state, ``meas`` once before any
    measurement, and ``meas_flip`` is the per-qubit depolarizing probability
    applied to the qubits touched non-trivially by a measured stabilizer.
    """

    prep: NoiseChannel = Ideal()
    meas: NoiseChannel = Ideal()
    meas_flip: float = 0.0

    def validate(self):
        self.prep.validate()
        self.meas.validate()
        if not 0.0 <= self.meas_flip <= 1.0:
            raise ValueError(f"meas_flip {self.meas_flip} outside [0, 1]")

    @property
    def is_trivial(self) -> bool:
        return (
            isinstance(self.prep, Ideal)
            and isinstance(self.meas, Ideal)
            and self.meas_flip == 0.0
        )


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate channel plus SPAM; the unit handed to the protocol drivers."""

    gate: NoiseChannel = Ideal()
    spam: SpamModel = SpamModel()

    def validate(self):
        self.gate.validate()
        self.spam.validate()


# ---------------------------------------------------------------------------
# Channel analysis: superoperators, Choi matrices, average fidelity
# ---------------------------------------------------------------------------


def channel_superoperator(ch: NoiseChannel, n: int) -> np.ndarray:
    """d^2 x d^2 matrix S with vec(ch(rho)) = S vec(rho) (column stacking)."""
    d = 2 ** n
    s = np.empty((d * d, d * d), dtype=complex)
    for j in range(d):
        for i in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            s[:, j * d + i] = ch.apply(unit).reshape(-1, order="F")
    return s


def choi_matrix(ch: NoiseChannel, n: int) -> np.ndarray:
    """Unnormalized Choi matrix sum_ij ch(|i><j|) ⊗ |i><j|."""
    d = 2 ** n
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            choi += np.kron(ch.apply(unit), unit)
    return choi


def check_cptp(ch: NoiseChannel, n: int, *, eig_atol=1e-10, tp_atol=1e-12):
    """Raise unless the channel is completely positive and trace preserving."""
    d = 2 ** n
    choi = choi_matrix(ch, n) / d
    if np.min(np.linalg.eigvalsh((choi + choi.conj().T) / 2)) < -eig_atol:
        raise ValueError("channel is not completely positive")
    # trace preservation: Tr ch(E_ij) = delta_ij
    tp = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            tp[i, j] = np.trace(ch.apply(unit))
    if np.max(np.abs(tp - np.eye(d))) > tp_atol:
        raise ValueError("channel is not trace preserving")


def average_fidelity(ch: NoiseChannel, n: int) -> float:
    """Average fidelity of the channel with the identity over pure states."""
    d = 2 ** n
    choi = choi_matrix(ch, n)
    omega = np.zeros(d * d, dtype=complex)
    for i in range(d):
        omega[i * d + i] = 1.0
    omega /= np.sqrt(d)
    f_ent = float(np.real(omega.conj() @ choi @ omega)) / d
    return (d * f_ent + 1.0) / (d + 1.0)


def depolarizing_parameter(ch: NoiseChannel, n: int) -> float:
    """Retention p of the depolarizing channel with the same average fidelity."""
    d = 2 ** n
    f_avg = average_fidelity(ch, n)
    return (d * f_avg - 1.0) / (d - 1.0)


# ---------------------------------------------------------------------------
# Trajectory support
# ---------------------------------------------------------------------------


def _pauli_from_index(idx: int, n: int) -> PauliString:
    """Index packing: bit q of low n bits = x on qubit q, high n bits = z."""
    x = [(idx >> q) & 1 for q in range(n)]
    z = [(idx >> (n + q)) & 1 for q in range(n)]
    return PauliString(np.array(x, dtype=np.uint8), np.array(z, dtype=np.uint8), 0)


def fault_distribution(ch: NoiseChannel, n: int) -> np.ndarray:
    """Probabilities over all 4^n Pauli fault indices for a diagonal channel."""
    if isinstance(ch, Ideal):
        probs = np.zeros(4 ** n)
        probs[0] = 1.0
        return probs
    if isinstance(ch, Depolarizing):
        return ch.fault_probabilities(n)
    if isinstance(ch, PauliChannel):
        ch.validate()
        if ch.n != n:
            raise ValueError("channel register size mismatch")
        probs = np.zeros(4 ** n)
        for key, prob in ch.probabilities:
            idx = 0
            for q in range(n):
                idx |= int(key.x[q]) << q
                idx |= int(key.z[q]) << (n + q)
            probs[idx] += prob
        return probs
    if isinstance(ch, ComposedChannel):
        # XOR convolution of the component fault distributions
        probs = np.zeros(4 ** n)
        probs[0] = 1.0
        idx = np.arange(4 ** n)
        for comp in ch.channels:
            q = fault_distribution(comp, n)
            new = np.zeros_like(probs)
            for a in np.nonzero(probs)[0]:
                new[int(a) ^ idx] += probs[int(a)] * q
            probs = new
        return probs
    raise UnsupportedChannelError(
        f"{type(ch).__name__} is not Pauli-diagonal; trajectory sampling unsupported"
    )


def sample_pauli_fault(ch: NoiseChannel, n: int, rng: np.random.Generator) -> PauliString:
    """Draw one Pauli fault with the channel's exact probabilities."""
    probs = fault_distribution(ch, n)
    idx = int(rng.choice(probs.size, p=probs))
    return _pauli_from_index(idx, n)


# ---------------------------------------------------------------------------
# Stabilizer measurement with measurement noise
# ---------------------------------------------------------------------------


def _single_qubit_depolarizing_on(rho: np.ndarray, n: int, qubit: int, p: float) -> np.ndarray:
    """Apply X/Y/Z each with probability p/3 on one qubit of the register."""
    if p == 0.0:
        return rho
    out = (1.0 - p) * rho
    for letter in "XYZ":
        m = PauliString.single(n, qubit, letter).to_matrix()
        out += (p / 3.0) * (m @ rho @ m)
    return out


def measurement_success_probability(rho: np.ndarray, s: PauliString,
                                    spam: SpamModel | None = None) -> float:
    """Probability that measuring stabilizer ``s`` returns +1.

    The measurement channel acts first, then independent single-qubit
    depolarizing flips on each qubit touched by ``s``, then the projection
    onto the +1 eigenspace of ``s``.
    """
    if not s.is_hermitian:
        raise ValueError(f"stabilizer {s.label()} is not Hermitian")
    d = rho.shape[0]
    if 2 ** s.n != d:
        raise ValueError("state and stabilizer dimensions differ")
    spam = spam or SpamModel()
    out = spam.meas.apply(rho)
    if spam.meas_flip:
        for q in range(s.n):
            if s.x[q] or s.z[q]:
                out = _single_qubit_depolarizing_on(out, s.n, q, spam.meas_flip)
    proj = (np.eye(d, dtype=complex) + s.to_matrix()) / 2
    return float(np.real(np.trace(proj @ out)))


# ---------------------------------------------------------------------------
# Config-file channel specs
# ---------------------------------------------------------------------------


def channel_from_spec(spec: dict | None, n: int) -> NoiseChannel:
    """Build a channel from its JSON config form.

    Kinds: ``ideal``, ``depolarizing`` {epsilon}, ``pauli`` {probabilities:
    {"XI": 0.01, ...}}, ``delta_depolarizing`` {delta, p_prime, qubit?,
    axis?, angle?}.
    """
    if spec is None:
        return Ideal()
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"channel spec must be an object with a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "ideal":
        return Ideal()
    if kind == "depolarizing":
        ch = Depolarizing(float(spec["epsilon"]))
        ch.validate()
        return ch
    if kind == "pauli":
        table = spec["probabilities"]
        probs = {}
        for label, prob in table.items():
            key = PauliString.from_label(label)
            if key.n != n:
                raise ValueError(f"Pauli key {label!r} does not act on {n} qubits")
            probs[key] = float(prob)
        ch = PauliChannel(probs)
        ch.validate()
        return ch
    if kind == "delta_depolarizing":
        u = rotation_unitary(
            n,
            qubit=int(spec.get("qubit", 0)),
            axis=str(spec.get("axis", "X")),
            angle=float(spec.get("angle", 1e-2)),
        )
        ch = DeltaDepolarizing(float(spec["delta"]), float(spec["p_prime"]), u)
        ch.validate()
        return ch
    raise ValueError(f"unknown channel kind {kind!r}")


def apply_channel(ch: NoiseChannel, rho: np.ndarray) -> np.ndarray:
    """CPTP action of a channel on a density matrix."""
    d = rho.shape[0]
    if rho.shape != (d, d):
        raise ValueError("state must be a square matrix")
    out = ch.apply(rho)
    if out.shape != rho.shape:
        raise ValueError("channel changed the state dimension")
    return out
