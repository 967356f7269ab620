"""Shared fixtures and independent dense-matrix oracles.

The oracles here are built from first principles (literal 2x2 matrices,
kron chains and basis permutations) so they never share code with the
tableau implementation they check.
"""

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S2 = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG2 = S2.conj().T

LETTERS = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}


def kron_chain(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_matrix(label: str, phase: complex = 1.0) -> np.ndarray:
    """Dense matrix of a Pauli label like 'XZ' (leftmost letter on qubit 0)."""
    return phase * kron_chain([LETTERS[c] for c in label])


def one_qubit_unitary(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return kron_chain([gate if q == qubit else I2 for q in range(n)])


def cnot_unitary(control: int, target: int, n: int) -> np.ndarray:
    """Basis-permutation construction (qubit 0 is the most significant bit)."""
    d = 2 ** n
    u = np.zeros((d, d), dtype=complex)
    for b in range(d):
        bits = [(b >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        out = 0
        for q in range(n):
            out = (out << 1) | bits[q]
        u[out, b] = 1.0
    return u


def gate_unitary(name: str, qubits, n: int) -> np.ndarray:
    name = name.upper()
    if name == "CNOT":
        return cnot_unitary(qubits[0], qubits[1], n)
    table = {"H": H2, "P": S2, "PDAG": SDG2, "X": X2}
    return one_qubit_unitary(table[name], qubits[0], n)


def circuit_unitary(gates, n: int) -> np.ndarray:
    """Dense unitary of a gate list applied in circuit order."""
    u = np.eye(2 ** n, dtype=complex)
    for g in gates:
        u = gate_unitary(g.name, g.qubits, n) @ u
    return u


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    idx = np.unravel_index(int(np.argmax(np.abs(a))), a.shape)
    if abs(a[idx]) < 1e-14:
        return bool(np.allclose(a, b, atol=atol))
    phase = b[idx] / a[idx]
    return abs(abs(phase) - 1.0) < 1e-9 and bool(np.allclose(phase * a, b, atol=atol))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
