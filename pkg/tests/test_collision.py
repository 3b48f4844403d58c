import numpy as np
import pytest

from dissipvqe.collision import (
    CollisionConfig,
    channel_error,
    collision_channel,
    collision_step,
    exact_superoperator,
    resource_report,
    step_superoperator,
    step_unitary,
)
from dissipvqe.lindblad import (
    ChannelSpec,
    DissipatorSpec,
    LiouvillianSpec,
    apply_channel,
    jump_operator,
    uniform_dissipators,
)
from dissipvqe.linalg import basis_state, devectorize, vectorize


def random_density(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


class TestStepUnitary:
    def test_tau_zero_is_identity(self):
        v = step_unitary(jump_operator(1.1, 0.4), 0.0)
        assert np.abs(v - np.eye(4)).max() < 1e-12

    def test_unitarity_random_directions(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            d = jump_operator(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            v = step_unitary(d, rng.uniform(0, 2))
            assert np.abs(v @ v.conj().T - np.eye(4)).max() < 1e-12

    def test_generator_hermitian(self):
        d = jump_operator(0.7, 1.9)
        sp = np.array([[0, 0], [1, 0]], dtype=complex)
        gen = np.kron(d, sp) + np.kron(d.conj().T, sp.conj().T)
        assert np.abs(gen - gen.conj().T).max() < 1e-14


class TestCollisionStep:
    def test_tau_zero_leaves_state(self):
        cfg = CollisionConfig(uniform_dissipators(2, np.pi), dt=0.0, steps=3)
        rho = random_density(np.random.default_rng(1), 4)
        assert np.abs(collision_step(rho, cfg) - rho).max() < 1e-12

    def test_single_step_population(self):
        # one collision with the decay jump: |1> population becomes cos^2(sqrt(tau))
        tau = 0.17
        cfg = CollisionConfig(uniform_dissipators(1, np.pi), dt=tau, steps=1)
        out = collision_step(basis_state("1"), cfg)
        assert abs(out[1, 1].real - np.cos(np.sqrt(tau)) ** 2) < 1e-12

    def test_trace_preserved(self):
        rng = np.random.default_rng(2)
        cfg = CollisionConfig(uniform_dissipators(3, 1.2), dt=0.9, steps=4)
        out = collision_step(random_density(rng, 8), cfg)
        assert abs(np.trace(out) - 1.0) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() >= -1e-9

    def test_steps_on_distinct_sites_commute(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng, 4)
        d0 = DissipatorSpec(site=0, alpha=1.0, phi=0.3)
        d1 = DissipatorSpec(site=1, alpha=2.0, phi=2.1)
        ab = collision_step(
            collision_step(rho, CollisionConfig(LiouvillianSpec(2, (d0,)), 0.5, 1)),
            CollisionConfig(LiouvillianSpec(2, (d1,)), 0.5, 1),
        )
        ba = collision_step(
            collision_step(rho, CollisionConfig(LiouvillianSpec(2, (d1,)), 0.5, 1)),
            CollisionConfig(LiouvillianSpec(2, (d0,)), 0.5, 1),
        )
        assert np.abs(ab - ba).max() < 1e-12

    def test_step_superoperator_matches_step(self):
        rng = np.random.default_rng(4)
        cfg = CollisionConfig(uniform_dissipators(2, 0.8, phi=0.5), dt=0.6, steps=2)
        rho = random_density(rng, 4)
        s = step_superoperator(cfg)
        via_super = devectorize(s @ vectorize(rho), 4)
        assert np.abs(via_super - collision_step(rho, cfg)).max() < 1e-12


class TestChannelError:
    def test_dt_zero_error_vanishes(self):
        cfg = CollisionConfig(uniform_dissipators(1, np.pi), dt=0.0, steps=4)
        eps, kind = channel_error(cfg)
        assert kind == "exact"
        assert eps < 1e-12

    def test_error_ladder_decreases(self):
        liou = uniform_dissipators(1, np.pi)
        eps = []
        for m in (1, 16, 1024):
            eps.append(channel_error(CollisionConfig(liou, dt=1.0, steps=m))[0])
        assert eps[2] < eps[1] < eps[0]

    def test_first_order_convergence(self):
        liou = uniform_dissipators(1, np.pi)
        ms = [8, 16, 32, 64, 128, 256, 512]
        eps = [channel_error(CollisionConfig(liou, dt=1.0, steps=m))[0] for m in ms]
        assert all(a > b for a, b in zip(eps, eps[1:]))
        slope = np.polyfit(np.log([1 / m for m in ms]), np.log(eps), 1)[0]
        assert abs(slope - 1.0) <= 0.15

    def test_lower_bound_kind_for_two_qubits(self):
        cfg = CollisionConfig(uniform_dissipators(2, np.pi), dt=1.0, steps=32)
        eps, kind = channel_error(cfg)
        assert kind == "lower_bound"
        assert eps > 0

    def test_rejects_large_systems(self):
        with pytest.raises(ValueError):
            channel_error(CollisionConfig(uniform_dissipators(4, np.pi), dt=1.0, steps=2))


class TestCollisionChannel:
    def test_state_error_small_at_many_steps(self):
        rng = np.random.default_rng(5)
        cfg = CollisionConfig(uniform_dissipators(3, np.pi), dt=1.0, steps=256)
        res = collision_channel(random_density(rng, 8), cfg)
        assert res.state_error < 1e-2
        assert res.epsilon_kind == "lower_bound"

    def test_output_matches_exact_channel_in_limit(self):
        rng = np.random.default_rng(6)
        liou = uniform_dissipators(1, np.pi)
        rho = random_density(rng, 2)
        cfg = CollisionConfig(liou, dt=0.5, steps=4096)
        res = collision_channel(rho, cfg)
        exact = apply_channel(ChannelSpec(liou, 0.5), rho)
        assert np.abs(res.rho - exact).max() < 1e-3

    def test_long_time_fixed_point(self):
        cfg = CollisionConfig(uniform_dissipators(1, np.pi), dt=20.0, steps=2000)
        res = collision_channel(basis_state("1"), cfg)
        assert res.rho[0, 0].real >= 1 - 1e-6

    def test_exact_kind_single_qubit(self):
        cfg = CollisionConfig(uniform_dissipators(1, 1.3, phi=0.7), dt=1.0, steps=64)
        res = collision_channel(basis_state("0"), cfg)
        assert res.epsilon_kind == "exact"
        # the certified epsilon upper-bounds this particular state error
        assert res.state_error <= res.epsilon + 1e-12


class TestExactSuperoperator:
    def test_matches_channel_application(self):
        rng = np.random.default_rng(7)
        cfg = CollisionConfig(uniform_dissipators(2, 2.2, phi=1.0), dt=0.7, steps=8)
        rho = random_density(rng, 4)
        via_super = devectorize(exact_superoperator(cfg) @ vectorize(rho), 4)
        direct = apply_channel(ChannelSpec(cfg.liouvillian, 0.7), rho)
        assert np.abs(via_super - direct).max() < 1e-11


class TestResourceReport:
    def test_counts(self):
        cfg = CollisionConfig(uniform_dissipators(4, np.pi), dt=1.0, steps=10)
        rep = resource_report(cfg)
        assert rep.ancillas == 4
        assert rep.resets == 40
        assert rep.two_qubit_interactions == 40

    def test_single_site_single_step(self):
        cfg = CollisionConfig(uniform_dissipators(1, np.pi), dt=0.1, steps=1)
        rep = resource_report(cfg)
        assert rep.two_qubit_interactions == 1

    def test_linear_in_sites(self):
        counts = []
        for n in range(1, 7):
            cfg = CollisionConfig(uniform_dissipators(n, np.pi), dt=1.0, steps=7)
            counts.append(resource_report(cfg).two_qubit_interactions)
        diffs = set(np.diff(counts).tolist())
        assert diffs == {7}

    def test_validation(self):
        with pytest.raises(ValueError):
            CollisionConfig(uniform_dissipators(1, np.pi), dt=-1.0, steps=2)
        with pytest.raises(ValueError):
            CollisionConfig(uniform_dissipators(1, np.pi), dt=1.0, steps=0)
