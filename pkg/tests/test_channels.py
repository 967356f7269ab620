import numpy as np
import pytest

from rbsim.channels import (
    ComposedChannel,
    DeltaDepolarizing,
    Depolarizing,
    Ideal,
    NoiseModel,
    PauliChannel,
    SpamModel,
    UnsupportedChannelError,
    apply_channel,
    channel_from_spec,
    check_cptp,
    check_density_matrix,
    choi_matrix,
    depolarizing_parameter,
    fault_distribution,
    maximally_mixed_state,
    measurement_success_probability,
    rotation_unitary,
    sample_pauli_fault,
    zero_state,
)
from rbsim.cliffords import clifford_to_matrix, random_clifford, stabilizer_group
from rbsim.paulis import PauliString

from conftest import pauli_matrix


def random_state(n, rng):
    d = 2 ** n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestApplyChannel:
    def test_zero_strength_is_identity(self, rng):
        rho = random_state(2, rng)
        assert np.allclose(apply_channel(Depolarizing(0.0), rho), rho)

    def test_full_strength_gives_maximally_mixed(self, rng):
        rho = random_state(2, rng)
        assert np.allclose(apply_channel(Depolarizing(1.0), rho),
                           maximally_mixed_state(2), atol=1e-12)

    def test_pauli_channel_hand_oracle(self):
        # {I: 0.9, X: 0.1} on |0><0| -> 0.9|0><0| + 0.1|1><1|
        ch = PauliChannel({"I": 0.9, "X": 0.1})
        out = apply_channel(ch, zero_state(1))
        assert np.allclose(out, np.diag([0.9, 0.1]), atol=1e-12)

    def test_output_is_valid_density_matrix(self, rng):
        for ch in (Depolarizing(0.2), PauliChannel({"XI": 0.25, "II": 0.75}),
                   DeltaDepolarizing(0.1, 0.95, rotation_unitary(2, 0, "Y", 0.3))):
            out = apply_channel(ch, random_state(2, rng))
            check_density_matrix(out)

    def test_invalid_parameters_raise(self, rng):
        with pytest.raises(ValueError):
            apply_channel(Depolarizing(1.5), random_state(1, rng))
        with pytest.raises(ValueError):
            PauliChannel({"I": 0.5, "X": 0.4}).validate()


class TestCPTP:
    @pytest.mark.parametrize("n,ch", [
        (1, Ideal()),
        (1, Depolarizing(0.3)),
        (2, Depolarizing(0.01)),
        (2, PauliChannel({"II": 0.9, "ZZ": 0.06, "XI": 0.04})),
        (1, DeltaDepolarizing(0.2, 0.9, rotation_unitary(1, 0, "X", 0.4))),
        (3, Depolarizing(0.05)),
    ])
    def test_every_variant_is_cptp(self, n, ch):
        check_cptp(ch, n)


class TestDepolarizingParameter:
    def test_depolarizing_gives_one_minus_eps(self):
        for n in (1, 2):
            for eps in (0.0, 0.01, 0.5):
                assert abs(depolarizing_parameter(Depolarizing(eps), n) - (1 - eps)) < 1e-12

    def test_ideal_gives_one(self):
        assert abs(depolarizing_parameter(Ideal(), 2) - 1.0) < 1e-12

    def test_pauli_channel_value_and_monte_carlo_twirl(self):
        ch = PauliChannel({"II": 0.95, "ZZ": 0.05})
        p = depolarizing_parameter(ch, 2)
        # identity weight 0.95: F_e = 0.95, F_avg = (4*.95+1)/5, p = (4F-1)/3
        assert abs(p - (4 * 0.96 - 1) / 3) < 1e-12
        # Monte Carlo Clifford twirl of the channel agrees within 3 sigma
        rng = np.random.default_rng(5150)
        n_samples = 4000
        d = 4
        base = choi_matrix(ch, 2)
        target = choi_matrix(Depolarizing(1 - p), 2)
        mean = np.zeros_like(base)
        sq = np.zeros(base.shape, dtype=float)
        for _ in range(n_samples):
            u = clifford_to_matrix(random_clifford(2, rng)).conj().T
            w = np.kron(u, u.conj())
            sample = w @ base @ w.conj().T
            mean += sample
            sq += np.abs(sample) ** 2
        mean /= n_samples
        var = np.maximum(sq / n_samples - np.abs(mean) ** 2, 0.0)
        dist_sq = float(np.sum(np.abs(mean - target) ** 2))
        assert dist_sq <= 9.0 * float(np.sum(var)) / n_samples

    def test_composition_multiplies_parameters(self):
        p = depolarizing_parameter(ComposedChannel([Depolarizing(0.03), Depolarizing(0.07)]), 2)
        assert abs(p - 0.97 * 0.93) < 1e-12


class TestFaultSampling:
    def test_zero_strength_always_identity(self, rng):
        for _ in range(50):
            assert sample_pauli_fault(Depolarizing(0.0), 2, rng).is_identity

    def test_depolarizing_single_qubit_rates(self):
        rng = np.random.default_rng(42)
        eps = 0.2
        counts = {"I": 0, "X": 0, "Y": 0, "Z": 0}
        n_draw = 100_000
        dist = fault_distribution(Depolarizing(eps), 1)
        assert abs(dist[0] - (1 - eps * 3 / 4)) < 1e-12
        for _ in range(n_draw):
            f = sample_pauli_fault(Depolarizing(eps), 1, rng)
            counts[f.label()[1:]] += 1
        p_x = eps / 4
        sigma = np.sqrt(p_x * (1 - p_x) / n_draw)
        assert abs(counts["X"] / n_draw - p_x) < 3 * sigma

    def test_fifty_fifty_channel(self):
        rng = np.random.default_rng(3)
        ch = PauliChannel({"I": 0.5, "X": 0.5})
        hits = sum(sample_pauli_fault(ch, 1, rng).weight for _ in range(10_000))
        assert abs(hits / 10_000 - 0.5) < 3 * np.sqrt(0.25 / 10_000)

    def test_trajectory_matches_channel_in_expectation(self, rng):
        # sampled faults reproduce apply_channel on average
        ch = PauliChannel({"II": 0.8, "XZ": 0.15, "YY": 0.05})
        rho = zero_state(2)
        avg = np.zeros((4, 4), dtype=complex)
        n_draw = 20_000
        for _ in range(n_draw):
            f = sample_pauli_fault(ch, 2, rng).to_matrix()
            avg += f @ rho @ f.conj().T
        avg /= n_draw
        exact = apply_channel(ch, rho)
        assert np.max(np.abs(avg - exact)) < 3 * np.sqrt(0.2 / n_draw) + 0.01

    def test_non_pauli_channel_rejected(self, rng):
        ch = DeltaDepolarizing(0.1, 0.9, rotation_unitary(1, 0, "X", 0.5))
        with pytest.raises(UnsupportedChannelError):
            sample_pauli_fault(ch, 1, rng)


class TestMeasurementSuccess:
    def test_stabilizer_of_state_always_succeeds(self, rng):
        c = random_clifford(2, rng)
        u = clifford_to_matrix(c)
        rho = u @ zero_state(2) @ u.conj().T
        for s in stabilizer_group(c):
            assert abs(measurement_success_probability(rho, s) - 1.0) < 1e-10

    def test_maximally_mixed_gives_half(self):
        rho = maximally_mixed_state(2)
        s = PauliString.from_label("ZI")
        assert abs(measurement_success_probability(rho, s) - 0.5) < 1e-12

    def test_identity_stabilizer_always_succeeds(self, rng):
        spam = SpamModel(meas=Depolarizing(0.3), meas_flip=0.2)
        rho = random_state(2, rng)
        s = PauliString.identity(2)
        assert abs(measurement_success_probability(rho, s, spam) - 1.0) < 1e-12

    def test_non_hermitian_stabilizer_rejected(self):
        with pytest.raises(ValueError):
            measurement_success_probability(zero_state(1), PauliString.from_label("+iX"))

    def test_measurement_flip_hand_value(self):
        # measuring Z on |0><0| with one-qubit flips: X or Y (2 of 3 choices)
        # flip the outcome, so success = 1 - 2*p/3
        p = 0.3
        spam = SpamModel(meas_flip=p)
        s = PauliString.from_label("Z")
        got = measurement_success_probability(zero_state(1), s, spam)
        assert abs(got - (1 - 2 * p / 3)) < 1e-12


class TestConfigSpecs:
    def test_channel_from_spec_variants(self):
        assert isinstance(channel_from_spec(None, 2), Ideal)
        assert isinstance(channel_from_spec({"kind": "ideal"}, 2), Ideal)
        ch = channel_from_spec({"kind": "depolarizing", "epsilon": 0.01}, 2)
        assert isinstance(ch, Depolarizing) and ch.epsilon == 0.01
        pc = channel_from_spec(
            {"kind": "pauli", "probabilities": {"XI": 0.1, "ZZ": 0.1, "II": 0.8}}, 2)
        assert isinstance(pc, PauliChannel)
        dd = channel_from_spec(
            {"kind": "delta_depolarizing", "delta": 0.05, "p_prime": 0.99, "angle": 0.2}, 1)
        assert isinstance(dd, DeltaDepolarizing)

    def test_bad_specs_raise(self):
        with pytest.raises(ValueError):
            channel_from_spec({"kind": "nope"}, 1)
        with pytest.raises(ValueError):
            channel_from_spec({"kind": "pauli", "probabilities": {"X": 1.0}}, 2)
        with pytest.raises(ValueError):
            channel_from_spec({"kind": "depolarizing", "epsilon": 2.0}, 1)

    def test_spam_and_noise_model_validation(self):
        NoiseModel(gate=Depolarizing(0.1), spam=SpamModel(meas_flip=0.2)).validate()
        with pytest.raises(ValueError):
            SpamModel(meas_flip=1.5).validate()


def test_superoperator_matches_direct_action(rng):
    from rbsim.channels import channel_superoperator

    ch = PauliChannel({"II": 0.85, "XZ": 0.1, "YI": 0.05})
    s = channel_superoperator(ch, 2)
    rho = random_state(2, rng)
    direct = apply_channel(ch, rho)
    via_superop = (s @ rho.reshape(-1, order="F")).reshape(4, 4, order="F")
    assert np.allclose(direct, via_superop, atol=1e-12)
