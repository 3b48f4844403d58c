import numpy as np
import pytest

from dissipvqe.circuit import initial_state
from dissipvqe.hamiltonian import (
    PauliFileError,
    PauliSum,
    RandomHamiltonianSpec,
    all_pauli_strings,
    effective_hamiltonian,
    expectation,
    hf_dissipators,
    load_pauli_file,
    locality_profile,
    pauli_decompose,
    pauli_matrix,
    pauli_weight,
    random_hamiltonian,
    warmup_hamiltonian,
)
from dissipvqe.lindblad import ChannelSpec, apply_channel, decay_to_zero_channel
from dissipvqe.linalg import basis_state


def random_density(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class TestPauliSum:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 3):
            m = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
            m = m + m.conj().T
            back = pauli_decompose(m).to_dense()
            assert np.abs(back - m).max() < 1e-12

    def test_rejects_duplicates_and_bad_strings(self):
        with pytest.raises(ValueError):
            PauliSum(n=2, terms=((0.5, "IZ"), (0.25, "IZ")))
        with pytest.raises(ValueError):
            PauliSum(n=2, terms=((0.5, "IQ"),))
        with pytest.raises(ValueError):
            PauliSum(n=2, terms=((0.5, "IZZ"),))

    def test_pauli_weight(self):
        assert pauli_weight("IIII") == 0
        assert pauli_weight("XIZY") == 3

    def test_string_enumeration(self):
        strings = list(all_pauli_strings(2))
        assert len(strings) == 16 and len(set(strings)) == 16


class TestWarmupHamiltonian:
    def test_single_qubit_terms(self):
        h = warmup_hamiltonian(1)
        assert sorted(h.terms) == [(-0.5, "Z"), (0.5, "I")]

    def test_projector_spectrum(self):
        mat = warmup_hamiltonian(3).to_dense()
        evals = np.sort(np.linalg.eigvalsh(mat))
        assert abs(evals[0]) < 1e-12
        assert np.abs(evals[1:] - 1.0).max() < 1e-12

    def test_extreme_expectations(self):
        h = warmup_hamiltonian(2)
        assert abs(expectation(h, basis_state("00"))) < 1e-12
        assert abs(expectation(h, basis_state("11")) - 1.0) < 1e-12

    def test_term_count(self):
        assert len(warmup_hamiltonian(4).terms) == 16


class TestExpectation:
    def test_identity(self):
        rho = random_density(np.random.default_rng(1), 4)
        h = PauliSum(n=2, terms=((1.0, "II"),))
        assert abs(expectation(h, rho) - 1.0) < 1e-12

    def test_warmup_on_tilted_state(self):
        rho = initial_state(1)
        val = expectation(warmup_hamiltonian(1), rho)
        assert abs(val - (1 - np.cos(np.pi / 8) ** 2)) < 1e-12

    def test_matches_dense_trace(self):
        rng = np.random.default_rng(2)
        rho = random_density(rng, 8)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = m + m.conj().T
        ps = pauli_decompose(m)
        assert abs(expectation(ps, rho) - np.trace(m @ rho).real) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(warmup_hamiltonian(2), basis_state("0"))


class TestRandomHamiltonian:
    def test_extreme_eigenvalues(self):
        for seed in range(5):
            rh = random_hamiltonian(RandomHamiltonianSpec(n=3, seed=seed))
            evals = np.sort(np.linalg.eigvalsh(rh.matrix))
            assert abs(evals[0] + 1.1) < 1e-9
            assert abs(evals[-1] - 1.1) < 1e-9
            assert np.all(np.abs(evals[1:-1]) < 1.0)

    def test_hermitian_and_orthonormal(self):
        rh = random_hamiltonian(RandomHamiltonianSpec(n=3, seed=7))
        assert np.abs(rh.matrix - rh.matrix.conj().T).max() < 1e-10

    def test_ground_state_record(self):
        rh = random_hamiltonian(RandomHamiltonianSpec(n=3, seed=11))
        out = rh.matrix @ rh.ground_state
        assert np.abs(out - (-1.1) * rh.ground_state).max() < 1e-9
        anchor_index = int(rh.ground_anchor, 2)
        overlap = abs(rh.ground_state[anchor_index]) ** 2
        assert overlap >= 0.9

    def test_anchor_assignment_varies(self):
        anchors = {
            random_hamiltonian(RandomHamiltonianSpec(n=2, seed=s)).ground_anchor
            for s in range(20)
        }
        assert anchors == {"00", "11"}

    def test_interior_spectrum_uniform(self):
        # KS test against uniform(-1, 1) over 200 seeds at n = 4
        samples = []
        for seed in range(200):
            rh = random_hamiltonian(RandomHamiltonianSpec(n=4, seed=seed))
            evals = np.sort(rh.eigenvalues)
            samples.extend(evals[1:-1])
        samples = np.sort(np.asarray(samples))
        cdf = (samples + 1.0) / 2.0
        ks = np.abs(cdf - (np.arange(1, len(samples) + 1) - 0.5) / len(samples)).max()
        # 1% critical value of the one-sample KS statistic
        assert ks < 1.63 / np.sqrt(len(samples))

    def test_needs_two_qubits(self):
        with pytest.raises(ValueError):
            RandomHamiltonianSpec(n=1)


class TestLocalityProfile:
    def test_parseval(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = m + m.conj().T
        prof = locality_profile(m)
        coeffs = pauli_decompose(m)
        total = sum(c * c for c, _ in coeffs.terms)
        assert abs(prof.total - total) < 1e-10
        assert abs(sum(prof.weights.values()) - prof.total) < 1e-10

    def test_effective_hamiltonian_dt_zero(self):
        h = warmup_hamiltonian(3)
        ch = decay_to_zero_channel(3, 0.0)
        out, prof = effective_hamiltonian(h, ch)
        assert np.abs(out - h.to_dense()).max() < 1e-12
        base = locality_profile(h.to_dense())
        for k in set(base.weights) | set(prof.weights):
            assert abs(prof.mass(k) - base.mass(k)) < 1e-12

    def test_localization_at_large_dt(self):
        h = warmup_hamiltonian(4)
        _, prof = effective_hamiltonian(h, decay_to_zero_channel(4, 10.0))
        assert prof.fraction_at_most(1) > 0.99

    def test_high_weight_mass_decays_monotonically(self):
        h = warmup_hamiltonian(4)
        rel = {k: [] for k in range(2, 5)}
        for dt in (0.0, 0.5, 1.0, 2.0):
            _, prof = effective_hamiltonian(h, decay_to_zero_channel(4, dt))
            for k in rel:
                rel[k].append(prof.relative_mass(k))
        for k, series in rel.items():
            assert all(a > b - 1e-12 for a, b in zip(series, series[1:])), (k, series)

    def test_effective_hamiltonian_hermitian(self):
        rng = np.random.default_rng(4)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = m + m.conj().T
        from dissipvqe.lindblad import DissipatorSpec, LiouvillianSpec

        liou = LiouvillianSpec(
            n=3,
            dissipators=tuple(
                DissipatorSpec(site=q, alpha=rng.uniform(0, np.pi), phi=rng.uniform(0, 6.28))
                for q in range(3)
            ),
        )
        out, _ = effective_hamiltonian(m, ChannelSpec(liou, 1.7))
        assert np.abs(out - out.conj().T).max() < 1e-10


class TestHfDissipators:
    def test_all_zero_bits(self):
        liou = hf_dissipators("00")
        out = apply_channel(ChannelSpec(liou, 60.0), random_density(np.random.default_rng(5), 4))
        assert abs(out[0, 0].real - 1.0) < 1e-9

    def test_mixed_bits_steady_state(self):
        liou = hf_dissipators("1100")
        gen = liou.full_superoperator()
        target = basis_state("1100")
        from dissipvqe.linalg import vectorize

        assert np.abs(gen @ vectorize(target)).max() < 1e-12

    def test_channel_maps_to_hf_state(self):
        rng = np.random.default_rng(6)
        liou = hf_dissipators("101")
        out = apply_channel(ChannelSpec(liou, 50.0), random_density(rng, 8))
        idx = int("101", 2)
        assert out[idx, idx].real >= 1 - 1e-9

    def test_rejects_bad_bits(self):
        with pytest.raises(ValueError):
            hf_dissipators("10a")


class TestLoadPauliFile(object):
    def _write(self, tmp_path, text):
        p = tmp_path / "ham.txt"
        p.write_text(text, encoding="utf-8")
        return str(p)

    def test_parses_simple_line(self, tmp_path):
        ps = load_pauli_file(self._write(tmp_path, "0.5 IZ\n"))
        assert ps.n == 2 and ps.terms == ((0.5, "IZ"),)

    def test_merges_duplicates(self, tmp_path):
        ps = load_pauli_file(self._write(tmp_path, "0.5 IZ\n0.25 IZ\n"))
        assert ps.terms == ((0.75, "IZ"),)

    def test_metadata_header(self, tmp_path):
        text = "# n=2\n# basis=STO-3G\n1.0 XX\n"
        ps = load_pauli_file(self._write(tmp_path, text))
        assert ps.metadata_dict()["basis"] == "STO-3G"

    def test_malformed_line_reports_number(self, tmp_path):
        with pytest.raises(PauliFileError, match=":2:"):
            load_pauli_file(self._write(tmp_path, "0.5 IZ\nnot a line at all\n"))

    def test_inconsistent_length(self, tmp_path):
        with pytest.raises(PauliFileError):
            load_pauli_file(self._write(tmp_path, "0.5 IZ\n0.5 IZZ\n"))

    def test_non_real_coefficient(self, tmp_path):
        with pytest.raises(PauliFileError):
            load_pauli_file(self._write(tmp_path, "0.5j IZ\n"))

    def test_header_mismatch(self, tmp_path):
        with pytest.raises(PauliFileError):
            load_pauli_file(self._write(tmp_path, "# n=3\n0.5 IZ\n"))


class TestH2Fixture:
    def test_fixture_ground_energy_matches_header(self):
        from dissipvqe.cli import default_fixture_path

        ps = load_pauli_file(default_fixture_path())
        meta = ps.metadata_dict()
        e0 = np.linalg.eigvalsh(ps.to_dense())[0]
        assert abs(e0 - float(meta["reference_ground_energy_hartree"])) < 1e-8

    def test_fixture_hf_bits(self):
        from dissipvqe.cli import default_fixture_path

        ps = load_pauli_file(default_fixture_path())
        meta = ps.metadata_dict()
        assert meta["hf_bits"] == "1100"
        h = ps.to_dense()
        diag = np.diag(h).real
        assert int(np.argmin(diag)) == int(meta["hf_bits"], 2)
