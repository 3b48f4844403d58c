"""Engineered single-qubit dissipation channels.

Each dissipator is a rank-1 jump operator ``d = |psi_-><psi_+|`` built from a
direction ``(alpha, phi)`` on the Bloch sphere.  The resulting generators act
on disjoint qubits, commute, have a unique steady state ``|psi_-><psi_-|``
and share the spectral gap ``gamma / 2``, so the channel ``exp(L dt)``
factorizes exactly into per-site 4x4 superoperators.  Channels are stored and
applied as these factors; the full ``4^n x 4^n`` matrix is only ever built by
tests and by the dense fallback used when a Hamiltonian term is present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    I2,
    KET_0,
    KET_1,
    apply_local_super,
    dag,
    devectorize,
    eig_general,
    embed_operator,
    matrix_exponential,
    vectorize,
)


def jump_operator(alpha: float, phi: float) -> np.ndarray:
    """Rank-1 jump operator |psi_-(alpha, phi)><psi_+(alpha, phi)|."""
    psi_plus = np.cos(alpha / 2) * KET_0 + np.exp(1j * phi) * np.sin(alpha / 2) * KET_1
    psi_minus = np.sin(alpha / 2) * KET_0 - np.exp(1j * phi) * np.cos(alpha / 2) * KET_1
    return np.outer(psi_minus, psi_plus.conj())


def steady_state_ket(alpha: float, phi: float) -> np.ndarray:
    """The dark state |psi_-(alpha, phi)> the dissipator relaxes into."""
    return np.sin(alpha / 2) * KET_0 - np.exp(1j * phi) * np.cos(alpha / 2) * KET_1


@dataclass(frozen=True)
class DissipatorSpec:
    """Single-qubit dissipator: site, direction (alpha, phi) and rate gamma."""

    site: int
    alpha: float
    phi: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")

    def jump(self) -> np.ndarray:
        return jump_operator(self.alpha, self.phi)


def gkls_superoperator(jumps, hamiltonian: np.ndarray | None = None) -> np.ndarray:
    """Column-stacking matrix of rho -> -i[h, rho] + sum gamma_i D[L_i] rho.

    ``jumps`` is an iterable of ``(gamma, L)`` pairs acting on the same space
    as ``hamiltonian``.
    """
    first = hamiltonian
    jumps = [(float(g), np.asarray(L, dtype=complex)) for g, L in jumps]
    if first is None:
        if not jumps:
            raise ValueError("need at least a Hamiltonian or one jump operator")
        first = jumps[0][1]
    d = first.shape[0]
    eye = np.eye(d, dtype=complex)
    out = np.zeros((d * d, d * d), dtype=complex)
    if hamiltonian is not None:
        h = np.asarray(hamiltonian, dtype=complex)
        out += -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for gamma, L in jumps:
        p = dag(L) @ L
        out += gamma * (
            np.kron(L.conj(), L) - 0.5 * np.kron(eye, p) - 0.5 * np.kron(p.T, eye)
        )
    return out


def dissipator_superoperator(spec: DissipatorSpec) -> np.ndarray:
    """4x4 generator of one dissipator in the column-stacking convention."""
    return gkls_superoperator([(spec.gamma, spec.jump())])


@dataclass(frozen=True)
class LiouvillianSpec:
    """Sum of single-qubit dissipators on distinct sites of an n-qubit system.

    ``hamiltonian_part`` is an optional dense n-qubit Hamiltonian; when it is
    present the commuting-factor fast path no longer applies and channels fall
    back to exponentiating the full superoperator.
    """

    n: int
    dissipators: tuple
    hamiltonian_part: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        sites = [d.site for d in self.dissipators]
        if len(set(sites)) != len(sites):
            raise ValueError("at most one dissipator per site")
        for s in sites:
            if not 0 <= s < self.n:
                raise ValueError(f"site {s} out of range for {self.n} qubits")
        if self.hamiltonian_part is not None:
            h = np.asarray(self.hamiltonian_part, dtype=complex)
            if h.shape != (2**self.n, 2**self.n):
                raise ValueError("hamiltonian_part must act on the full system")
            object.__setattr__(self, "hamiltonian_part", h)

    def full_superoperator(self) -> np.ndarray:
        """Dense 4^n x 4^n generator (test oracle and Hamiltonian fallback)."""
        jumps = [
            (d.gamma, embed_operator(d.jump(), [d.site], self.n))
            for d in self.dissipators
        ]
        return gkls_superoperator(jumps, self.hamiltonian_part)


@dataclass(frozen=True)
class ChannelSpec:
    """Fixed-time channel exp(L dt) of a Liouvillian."""

    liouvillian: LiouvillianSpec
    dt: float

    def __post_init__(self):
        if self.dt < 0:
            raise ValueError("dt must be >= 0")

    @property
    def n(self) -> int:
        return self.liouvillian.n


def channel_site_factor_pairs(spec: ChannelSpec) -> list[tuple[int, np.ndarray]]:
    """(site, 4x4 factor) pairs of exp(L_q dt), dissipator sites only."""
    if spec.liouvillian.hamiltonian_part is not None:
        raise ValueError(
            "commuting per-site factors require a purely dissipative Liouvillian"
        )
    return [
        (d.site, matrix_exponential(dissipator_superoperator(d) * spec.dt))
        for d in spec.liouvillian.dissipators
    ]


def channel_superoperators(spec: ChannelSpec) -> list[np.ndarray]:
    """Per-site 4x4 factors of exp(L dt); identity for dissipator-free sites."""
    factors = [np.eye(4, dtype=complex) for _ in range(spec.n)]
    for site, f in channel_site_factor_pairs(spec):
        factors[site] = f
    return factors


def apply_factor_pairs(
    vec: np.ndarray, pairs, n: int, adjoint: bool = False
) -> np.ndarray:
    """Apply (site, factor) superoperator pairs to a column-stacked operator."""
    for site, f in pairs:
        vec = apply_local_super(vec, dag(f) if adjoint else f, [site], n)
    return vec


def _dense_channel_matrix(spec: ChannelSpec) -> np.ndarray:
    return matrix_exponential(spec.liouvillian.full_superoperator() * spec.dt)


def apply_channel(spec: ChannelSpec, rho: np.ndarray) -> np.ndarray:
    """Apply exp(L dt) to a density matrix."""
    n = spec.n
    if rho.shape != (2**n, 2**n):
        raise ValueError("state size does not match channel")
    if spec.liouvillian.hamiltonian_part is not None:
        return devectorize(_dense_channel_matrix(spec) @ vectorize(rho), 2**n)
    vec = apply_factor_pairs(vectorize(rho), channel_site_factor_pairs(spec), n)
    return devectorize(vec, 2**n)


def adjoint_channel_on_observable(spec: ChannelSpec, obs: np.ndarray) -> np.ndarray:
    """Heisenberg picture: pull an observable back through the channel.

    In the column-stacking convention the adjoint channel matrix is the
    conjugate transpose of the channel matrix, so
    ``Tr(H exp(L dt)[rho]) = Tr(adjoint(H) rho)`` for every state.
    """
    n = spec.n
    if obs.shape != (2**n, 2**n):
        raise ValueError("observable size does not match channel")
    if spec.liouvillian.hamiltonian_part is not None:
        return devectorize(dag(_dense_channel_matrix(spec)) @ vectorize(obs), 2**n)
    vec = apply_factor_pairs(
        vectorize(obs), channel_site_factor_pairs(spec), n, adjoint=True
    )
    return devectorize(vec, 2**n)


def sigmoid(x: float) -> float:
    """Logistic function s(x) = 1 / (1 + exp(-x))."""
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class ConvexChannelSpec:
    """Convex combination of channels: explicit weights or a two-branch sigmoid.

    With ``sigma`` set (exactly two branches) the weights are
    ``(s(sigma), 1 - s(sigma))``; otherwise ``weights`` must be nonnegative
    and sum to one.
    """

    branches: tuple
    weights: tuple | None = None
    sigma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ValueError("need at least one branch")
        ns = {b.n for b in self.branches}
        if len(ns) != 1:
            raise ValueError("branches act on different system sizes")
        if (self.weights is None) == (self.sigma is None):
            raise ValueError("give exactly one of weights or sigma")
        if self.sigma is not None and len(self.branches) != 2:
            raise ValueError("sigmoid parametrization needs exactly two branches")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.branches):
                raise ValueError("one weight per branch")
            if min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
                raise ValueError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.branches[0].n

    def resolved_weights(self, sigma: float | None = None) -> tuple:
        """Branch weights, optionally overriding the stored sigma."""
        if self.weights is not None:
            if sigma is not None:
                raise ValueError("channel has fixed weights, not a sigma parameter")
            return self.weights
        s = sigmoid(self.sigma if sigma is None else sigma)
        return (s, 1.0 - s)


def apply_convex_channel(
    spec: ConvexChannelSpec, rho: np.ndarray, sigma: float | None = None
) -> np.ndarray:
    """Exact (deterministic) convex mixture of the branch outputs."""
    w = spec.resolved_weights(sigma)
    out = np.zeros_like(rho, dtype=complex)
    for wj, branch in zip(w, spec.branches):
        out += wj * apply_channel(branch, rho)
    return out


def adjoint_convex_channel_on_observable(
    spec: ConvexChannelSpec, obs: np.ndarray, sigma: float | None = None
) -> np.ndarray:
    """Heisenberg-picture pullback through a convex mixture of channels."""
    w = spec.resolved_weights(sigma)
    out = np.zeros_like(obs, dtype=complex)
    for wj, branch in zip(w, spec.branches):
        out += wj * adjoint_channel_on_observable(branch, obs)
    return out


@dataclass(frozen=True)
class SpectralAnalysis:
    """Dual-basis expansion data of a single-qubit dissipator generator.

    Eigenvalues are sorted by descending real part; ``right[:, i]`` and
    ``left[:, i]`` are vectorized eigenmatrices normalized so that
    ``left^dag right = I``, hence
    ``exp(L dt) = sum_i exp(lambda_i dt) right_i left_i^dag``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    gap: float
    steady_state: np.ndarray
    mixing_time: float

    def channel_matrix(self, dt: float) -> np.ndarray:
        """Reconstruct exp(L dt) from the spectral expansion."""
        phases = np.exp(self.eigenvalues * dt)
        return (self.right * phases) @ dag(self.left)


def spectral_analysis(spec: DissipatorSpec) -> SpectralAnalysis:
    """Eigen-decompose one dissipator's 4x4 generator."""
    gen = dissipator_superoperator(spec)
    w, right, left = eig_general(gen)
    if abs(w[0]) > 1e-10 * max(spec.gamma, 1.0):
        raise ValueError(f"leading eigenvalue {w[0]} is not 0; no steady state")
    gap = float(abs(w[1].real))
    rho_ss = devectorize(right[:, 0], 2)
    rho_ss = rho_ss / np.trace(rho_ss)
    rho_ss = 0.5 * (rho_ss + dag(rho_ss))
    return SpectralAnalysis(
        eigenvalues=w,
        right=right,
        left=left,
        gap=gap,
        steady_state=rho_ss,
        mixing_time=1.0 / gap,
    )


def recommended_dt(q: float, mixing_time: float) -> float:
    """Interaction-time budget log(Q) * mixing time, floored at one mixing time.

    The logarithmic scaling is asymptotic; for Q <= 2 generators the floor
    keeps the budget from degenerating to zero.
    """
    if q < 1:
        raise ValueError("need at least one generator")
    return max(np.log(q), 1.0) * mixing_time


def uniform_dissipators(n: int, alpha: float, phi: float = 0.0, gamma: float = 1.0):
    """One identical dissipator on every site."""
    return LiouvillianSpec(
        n=n,
        dissipators=tuple(
            DissipatorSpec(site=q, alpha=alpha, phi=phi, gamma=gamma) for q in range(n)
        ),
    )


def decay_to_zero_channel(n: int, dt: float, gamma: float = 1.0) -> ChannelSpec:
    """All-site decay toward |0...0> (alpha = pi), the warm-up configuration."""
    return ChannelSpec(uniform_dissipators(n, alpha=np.pi, gamma=gamma), dt=dt)


def decay_to_one_channel(n: int, dt: float, gamma: float = 1.0) -> ChannelSpec:
    """All-site decay toward |1...1> (alpha = 0)."""
    return ChannelSpec(uniform_dissipators(n, alpha=0.0, gamma=gamma), dt=dt)
