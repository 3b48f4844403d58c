"""Cost evaluation, exact gradients and gradient descent for the non-unitary
ansatz: channel(U(theta) rho U(theta)^dag) measured against a Hamiltonian.

Costs are evaluated in the Heisenberg picture: the channel is parameter-free
in theta, so its pullback of the Hamiltonian is computed once per model and
every circuit evaluation reduces to Tr(H' U rho U^dag).  Gradients in theta
use the two-point parameter-shift rule (exact for Pauli rotations); the
gradient in the mixing parameter sigma is the analytic sigmoid derivative
times the branch-cost difference.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .circuit import (
    AnsatzSpec,
    ProductXAnsatz,
    as_params,
    cz_chain_diag,
    kron_all,
    layer_rotations,
    rotation,
)
from .hamiltonian import PauliSum
from .lindblad import (
    ChannelSpec,
    ConvexChannelSpec,
    adjoint_channel_on_observable,
    sigmoid,
)
from .linalg import basis_state
from .circuit import initial_state


class TrainingDivergedError(RuntimeError):
    """Cost became non-finite or left the spectral range of the Hamiltonian."""


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Ansatz + Hamiltonian + optional dissipative layer + initial state.

    ``channel`` may be ``None`` (fully unitary), a :class:`ChannelSpec` or a
    :class:`ConvexChannelSpec`.  When ``rho_in`` is omitted the layered ansatz
    starts from the tilted product state and the product ansatz from
    ``|0...0>``.
    """

    ansatz: object
    hamiltonian: object
    channel: object = None
    rho_in: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.ansatz.n

    def initial_density(self) -> np.ndarray:
        if self.rho_in is not None:
            return self.rho_in
        if isinstance(self.ansatz, ProductXAnsatz):
            return basis_state("0" * self.n)
        return initial_state(self.n)

    def without_channel(self) -> "ModelSpec":
        return ModelSpec(
            ansatz=self.ansatz,
            hamiltonian=self.hamiltonian,
            channel=None,
            rho_in=self.rho_in,
        )


def _dense_hamiltonian(ham) -> np.ndarray:
    if isinstance(ham, PauliSum):
        return ham.to_dense()
    return np.asarray(ham, dtype=complex)


class CostEngine:
    """Caches the channel pullbacks and per-layer products of one model."""

    def __init__(self, model: ModelSpec):
        self.model = model
        self.n = model.n
        self.rho_in = model.initial_density()
        h = _dense_hamiltonian(model.hamiltonian)
        if h.shape != self.rho_in.shape:
            raise ValueError("Hamiltonian and state dimensions differ")
        channel = model.channel
        if channel is None:
            self.branch_obs = [h]
            self._fixed_weights = np.array([1.0])
            self._sigmoid = False
        elif isinstance(channel, ChannelSpec):
            self.branch_obs = [adjoint_channel_on_observable(channel, h)]
            self._fixed_weights = np.array([1.0])
            self._sigmoid = False
        elif isinstance(channel, ConvexChannelSpec):
            self.branch_obs = [
                adjoint_channel_on_observable(b, h) for b in channel.branches
            ]
            self._sigmoid = channel.sigma is not None
            self._fixed_weights = (
                None if self._sigmoid else np.array(channel.resolved_weights())
            )
        else:
            raise TypeError(f"unsupported channel type {type(channel)!r}")
        self._is_layered = isinstance(model.ansatz, AnsatzSpec)
        if self._is_layered:
            self._w_diag = cz_chain_diag(self.n)

    @property
    def num_params(self) -> int:
        return self.model.ansatz.num_params

    def weights(self, sigma: float | None) -> np.ndarray:
        if not self._sigmoid:
            if sigma is not None:
                raise ValueError("model channel has no sigma parameter")
            return self._fixed_weights
        s = sigmoid(self.model.channel.sigma if sigma is None else sigma)
        return np.array([s, 1.0 - s])

    # -- circuit products ---------------------------------------------------

    def _layer_matrices(self, theta: np.ndarray) -> list[np.ndarray]:
        spec = self.model.ansatz
        w = self._w_diag
        return [
            w[:, None] * layer_rotations(spec, theta, l) for l in range(spec.depth)
        ]

    def _unitary(self, theta: np.ndarray) -> np.ndarray:
        if self._is_layered:
            u = np.eye(2**self.n, dtype=complex)
            for m in self._layer_matrices(theta):
                u = m @ u
            return u
        return kron_all([rotation("x", t) for t in theta])

    def evolved_state(self, theta) -> np.ndarray:
        theta = as_params(theta, self.num_params)
        u = self._unitary(theta)
        return u @ self.rho_in @ u.conj().T

    # -- costs and gradients ------------------------------------------------

    def branch_costs(self, theta) -> np.ndarray:
        rho = self.evolved_state(theta)
        return np.array([np.vdot(obs, rho).real for obs in self.branch_obs])

    def cost(self, theta, sigma: float | None = None) -> float:
        return float(self.weights(sigma) @ self.branch_costs(theta))

    def _mixed_observable(self, sigma: float | None) -> np.ndarray:
        w = self.weights(sigma)
        if len(self.branch_obs) == 1:
            return self.branch_obs[0]
        out = w[0] * self.branch_obs[0]
        for wj, obs in zip(w[1:], self.branch_obs[1:]):
            out = out + wj * obs
        return out

    def grad_theta(self, theta, sigma: float | None = None) -> np.ndarray:
        """Exact gradient via (C(theta_k + pi/2) - C(theta_k - pi/2)) / 2."""
        theta = as_params(theta, self.num_params)
        obs = self._mixed_observable(sigma)
        if self._is_layered:
            return self._grad_theta_layered(theta, obs)
        return self._grad_theta_product(theta, obs)

    def _grad_theta_layered(self, theta: np.ndarray, obs: np.ndarray) -> np.ndarray:
        spec = self.model.ansatz
        n, depth = spec.n, spec.depth
        mats = self._layer_matrices(theta)
        prefix = [self.rho_in]  # prefix[l] = (M_l ... M_1) rho (.)^dag
        for m in mats:
            prefix.append(m @ prefix[-1] @ m.conj().T)
        suffix_obs = [obs]  # suffix_obs[j] = pullback of obs through top j layers
        for m in reversed(mats):
            suffix_obs.append(m.conj().T @ suffix_obs[-1] @ m)
        grad = np.empty(depth * n)
        w = self._w_diag
        for layer in range(depth):
            rho_below = prefix[layer]
            obs_above = suffix_obs[depth - 1 - layer]
            base = [
                rotation(spec.axes[layer][i], theta[layer * n + i]) for i in range(n)
            ]
            for i in range(n):
                vals = []
                for shift in (0.5 * np.pi, -0.5 * np.pi):
                    gates = list(base)
                    gates[i] = rotation(
                        spec.axes[layer][i], theta[layer * n + i] + shift
                    )
                    m = w[:, None] * kron_all(gates)
                    vals.append(np.vdot(obs_above, m @ rho_below @ m.conj().T).real)
                grad[layer * n + i] = 0.5 * (vals[0] - vals[1])
        return grad

    def _grad_theta_product(self, theta: np.ndarray, obs: np.ndarray) -> np.ndarray:
        base = [rotation("x", t) for t in theta]
        grad = np.empty(theta.size)
        for i in range(theta.size):
            vals = []
            for shift in (0.5 * np.pi, -0.5 * np.pi):
                gates = list(base)
                gates[i] = rotation("x", theta[i] + shift)
                u = kron_all(gates)
                vals.append(np.vdot(obs, u @ self.rho_in @ u.conj().T).real)
            grad[i] = 0.5 * (vals[0] - vals[1])
        return grad

    def grad_sigma(self, theta, sigma: float) -> float:
        """Analytic derivative s'(sigma) (C_1 - C_2) of the two-branch mixture."""
        if not self._sigmoid or len(self.branch_obs) != 2:
            raise ValueError("model channel has no sigma parameter")
        c1, c2 = self.branch_costs(theta)
        s = sigmoid(sigma)
        return float(s * (1.0 - s) * (c1 - c2))


def cost(model: ModelSpec, theta, sigma: float | None = None) -> float:
    """Expectation of the Hamiltonian on channel(U(theta) rho_in U^dag)."""
    return CostEngine(model).cost(theta, sigma)


def grad_theta(model: ModelSpec, theta, sigma: float | None = None) -> np.ndarray:
    """Parameter-shift gradient of :func:`cost` in theta."""
    return CostEngine(model).grad_theta(theta, sigma)


def grad_sigma(model: ModelSpec, theta, sigma: float) -> float:
    """Analytic derivative of :func:`cost` in the mixing parameter."""
    return CostEngine(model).grad_sigma(theta, sigma)


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings.

    ``hybrid_switch`` drops the channel (and freezes sigma) from that
    iteration on; ``None`` keeps the channel for the whole run.
    ``eta_after_switch`` optionally changes the learning rate for the
    unitary refinement phase (defaults to ``eta``).  Initial parameters
    default to theta ~ U[0, 2pi] and sigma ~ U[-5, 5] drawn from ``seed``;
    explicit ``theta_init`` / ``sigma_init`` override the draw.
    """

    eta: float
    iterations: int
    hybrid_switch: int | None = None
    seed: int = 0
    theta_init: tuple | None = None
    sigma_init: float | None = None
    eta_after_switch: float | None = None

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.hybrid_switch is not None and not (
            0 <= self.hybrid_switch <= self.iterations
        ):
            raise ValueError("hybrid_switch must lie in [0, iterations]")
        if self.eta_after_switch is not None and self.eta_after_switch < 0:
            raise ValueError("eta_after_switch must be >= 0")


@dataclass(frozen=True)
class TrainTrace:
    """Recorded descent: cost per iteration (length T + 1) and final parameters."""

    costs: np.ndarray
    theta: np.ndarray
    sigma: float | None
    seed: int
    eta: float
    hybrid_switch: int | None
    wall_time: float


def gradient_descent(model: ModelSpec, config: TrainConfig) -> TrainTrace:
    """Plain gradient descent on theta (and sigma for sigmoid mixtures)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    num_params = model.ansatz.num_params
    if config.theta_init is not None:
        theta = as_params(np.asarray(config.theta_init, dtype=float), num_params)
    else:
        theta = rng.uniform(0.0, 2.0 * np.pi, size=num_params)

    trains_sigma = isinstance(model.channel, ConvexChannelSpec) and (
        model.channel.sigma is not None
    )
    sigma: float | None = None
    if trains_sigma:
        sigma = (
            float(config.sigma_init)
            if config.sigma_init is not None
            else float(rng.uniform(-5.0, 5.0))
        )

    h = _dense_hamiltonian(model.hamiltonian)
    bound = 10.0 * np.linalg.norm(h, 2)

    engine = CostEngine(model)
    unitary_engine: CostEngine | None = None
    switch = config.hybrid_switch

    def active_engine(t: int) -> tuple[CostEngine, bool]:
        nonlocal unitary_engine
        if switch is not None and t >= switch:
            if unitary_engine is None:
                unitary_engine = CostEngine(model.without_channel())
            return unitary_engine, False
        return engine, trains_sigma

    def checked_cost(eng: CostEngine, with_sigma: bool) -> float:
        c = eng.cost(theta, sigma if with_sigma else None)
        if not np.isfinite(c) or abs(c) > bound:
            raise TrainingDivergedError(
                f"cost {c} outside 10x spectral bound {bound:.3g} "
                f"(seed={config.seed}, eta={config.eta})"
            )
        return c

    def rate(t: int) -> float:
        if switch is not None and t >= switch and config.eta_after_switch is not None:
            return config.eta_after_switch
        return config.eta

    eng, with_sigma = active_engine(0)
    costs = [checked_cost(eng, with_sigma)]
    for t in range(config.iterations):
        eng, with_sigma = active_engine(t)
        g_theta = eng.grad_theta(theta, sigma if with_sigma else None)
        g_sigma = eng.grad_sigma(theta, sigma) if with_sigma else 0.0
        theta = theta - rate(t) * g_theta
        if with_sigma:
            sigma = sigma - rate(t) * g_sigma
        eng, with_sigma = active_engine(t + 1)
        costs.append(checked_cost(eng, with_sigma))
    return TrainTrace(
        costs=np.array(costs),
        theta=theta,
        sigma=sigma,
        seed=config.seed,
        eta=config.eta,
        hybrid_switch=switch,
        wall_time=time.perf_counter() - t0,
    )
