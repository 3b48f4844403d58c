"""Monte-Carlo estimation of gradient variances across qubit counts, circuit
depths and interaction times.

Each sample draws fresh rotation axes, a fresh Hamiltonian (for the random
source), angles uniform on [0, 2pi] and a mixing parameter uniform on
[-5, 5], then evaluates one exact gradient component.  Samples are seeded as
``base_seed XOR sample_index`` so results are independent of evaluation order
and worker count; the interaction-time grid reuses the same draws (common
random numbers), which the implementation exploits by preparing the shifted
states once per sample and sweeping the channel pullback over the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import ProductXAnsatz, build_ansatz, circuit_unitary, initial_state
from .hamiltonian import PauliSum, RandomHamiltonianSpec, random_hamiltonian, warmup_hamiltonian
from .lindblad import (
    ChannelSpec,
    DissipatorSpec,
    apply_factor_pairs,
    channel_site_factor_pairs,
    decay_to_one_channel,
    decay_to_zero_channel,
    dissipator_superoperator,
    sigmoid,
)
from .linalg import eig_general
from .linalg import basis_state, vectorize

_SOURCES = ("random", "warmup", "file")
_TARGETS = ("theta", "sigma")


@dataclass(frozen=True)
class VarianceExperiment:
    """Grid specification for a gradient-variance scan.

    ``source`` selects the problem family: ``"random"`` draws a fresh
    random-spectrum Hamiltonian per sample and uses the layered ansatz with
    the two-branch sigmoid channel (decay toward |0...0> and |1...1>);
    ``"warmup"`` uses the product-x ansatz with all-site decay toward
    |0...0>; ``"file"`` is like ``"random"`` but with the fixed Hamiltonian
    passed in ``hamiltonian``.  ``include_unitary`` adds a channel-off point
    reported at dt = 0.
    """

    n_values: tuple
    depth_values: tuple
    dt_values: tuple
    samples: int = 1000
    target: str = "theta"
    source: str = "random"
    base_seed: int = 0
    include_unitary: bool = True
    hamiltonian: PauliSum | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "depth_values", tuple(int(v) for v in self.depth_values))
        dts = tuple(float(v) for v in self.dt_values)
        object.__setattr__(self, "dt_values", dts)
        if self.samples < 2:
            raise ValueError("need at least 2 samples")
        if any(b <= a for a, b in zip(dts, dts[1:])):
            raise ValueError("dt grid must be strictly increasing")
        if any(v <= 0 for v in dts):
            raise ValueError("dt grid entries must be positive (dt=0 is the unitary row)")
        if self.target not in _TARGETS:
            raise ValueError(f"target must be one of {_TARGETS}")
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}")
        if (self.source == "file") != (self.hamiltonian is not None):
            raise ValueError("pass a Hamiltonian exactly when source='file'")
        if self.target == "sigma" and self.source == "warmup":
            raise ValueError("the warm-up channel has no sigma parameter")


@dataclass(frozen=True)
class VariancePoint:
    """One grid point: sample variance of the gradient and its jackknife SE."""

    n: int
    depth: int
    dt: float
    target: str
    estimate: float
    std_error: float
    samples: int


def default_dt_grid() -> tuple:
    """The reference scan grid 0.1, 0.2, ..., 3.0."""
    return tuple(np.round(np.arange(1, 31) * 0.1, 10))


def jackknife_variance_se(x: np.ndarray) -> float:
    """Leave-one-out standard error of the (N-1)-normalized sample variance."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        return float("nan")
    s1 = x.sum()
    s2 = (x * x).sum()
    loo_s1 = s1 - x
    loo_s2 = s2 - x * x
    loo_var = (loo_s2 - loo_s1**2 / (n - 1)) / (n - 2)
    return float(np.sqrt((n - 1) / n * ((loo_var - loo_var.mean()) ** 2).sum()))


@dataclass(frozen=True)
class GradientSampleConfig:
    """Configuration of a single gradient draw at one grid point."""

    n: int
    depth: int
    dt: float
    target: str = "theta"
    source: str = "random"
    hamiltonian: PauliSum | None = None


class _SampleDraw:
    """Everything one seed determines, with the shifted states prepared."""

    def __init__(self, seed: int, cfg: GradientSampleConfig):
        rng = np.random.default_rng(seed)
        n = cfg.n
        self.cfg = cfg
        if cfg.source == "warmup":
            ansatz = ProductXAnsatz(n)
            ham = warmup_hamiltonian(n).to_dense()
            rho_in = basis_state("0" * n)
        else:
            ansatz = build_ansatz(n, cfg.depth, rng)
            if cfg.source == "random":
                ham = random_hamiltonian(RandomHamiltonianSpec(n=n), rng).matrix
            else:
                ham = cfg.hamiltonian.to_dense()
            rho_in = initial_state(n)
        theta = rng.uniform(0.0, 2.0 * np.pi, size=ansatz.num_params)
        self.sigma = float(rng.uniform(-5.0, 5.0)) if cfg.source != "warmup" else None
        self.vec_ham = vectorize(ham)

        if cfg.target == "theta":
            states = []
            for shift in (0.5 * np.pi, -0.5 * np.pi):
                t = theta.copy()
                t[0] += shift
                states.append(_evolved_vec(ansatz, t, rho_in))
            # <<tau|E(rho+)-E(rho-)>>/2 = <<E^dag tau|delta>>
            self.delta_vec = 0.5 * (states[0] - states[1])
            self.state_vec = None
        else:
            self.state_vec = _evolved_vec(ansatz, theta, rho_in)
            self.delta_vec = None

    def gradient(self, dt: float, pullback) -> float:
        """Gradient for one interaction time; ``pullback(vec, dt, branch)``."""
        cfg = self.cfg
        if cfg.target == "theta":
            if dt == 0.0:
                return float(np.vdot(self.vec_ham, self.delta_vec).real)
            if cfg.source == "warmup":
                h1 = pullback(self.vec_ham, dt, 0)
                return float(np.vdot(h1, self.delta_vec).real)
            s = sigmoid(self.sigma)
            h1 = pullback(self.vec_ham, dt, 0)
            h2 = pullback(self.vec_ham, dt, 1)
            return float(
                s * np.vdot(h1, self.delta_vec).real
                + (1.0 - s) * np.vdot(h2, self.delta_vec).real
            )
        # sigma target: s'(sigma) (C1 - C2)
        if dt == 0.0:
            return 0.0
        h1 = pullback(self.vec_ham, dt, 0)
        h2 = pullback(self.vec_ham, dt, 1)
        c1 = np.vdot(h1, self.state_vec).real
        c2 = np.vdot(h2, self.state_vec).real
        s = sigmoid(self.sigma)
        return float(s * (1.0 - s) * (c1 - c2))


def _evolved_vec(ansatz, theta, rho_in) -> np.ndarray:
    if isinstance(ansatz, ProductXAnsatz):
        from .circuit import product_x_unitary

        u = product_x_unitary(theta)
    else:
        u = circuit_unitary(ansatz, theta)
    return vectorize(u @ rho_in @ u.conj().T)


def _branch_channels(cfg: GradientSampleConfig, dt: float) -> list[ChannelSpec]:
    if cfg.source == "warmup":
        return [decay_to_zero_channel(cfg.n, dt)]
    return [decay_to_zero_channel(cfg.n, dt), decay_to_one_channel(cfg.n, dt)]


def _make_pullback(cfg: GradientSampleConfig):
    """Adjoint-channel application with the 4x4 factors cached per (dt, branch)."""
    cache: dict[tuple[float, int], list] = {}

    def pullback(vec: np.ndarray, dt: float, branch: int) -> np.ndarray:
        key = (dt, branch)
        if key not in cache:
            channel = _branch_channels(cfg, dt)[branch]
            cache[key] = channel_site_factor_pairs(channel)
        return apply_factor_pairs(vec, cache[key], cfg.n, adjoint=True)

    return pullback


def sample_gradient(seed: int, cfg: GradientSampleConfig) -> float:
    """One gradient draw; deterministic in ``seed``."""
    draw = _SampleDraw(seed, cfg)
    return draw.gradient(cfg.dt, _make_pullback(cfg))


def _interleave_indices(n: int) -> np.ndarray:
    """Map column-stacked vec indices to a site-major base-4 layout.

    Entry ``j`` of the interleaved vector (digits ``s_q = r_q + 2 c_q``, site
    0 most significant) comes from vec index ``r + 2^n c``.  Dot products are
    invariant under this common relabeling, so gradient sweeps can stay in
    the interleaved layout throughout.
    """
    j = np.arange(4**n)
    r = np.zeros_like(j)
    c = np.zeros_like(j)
    for q in range(n):
        s = (j >> (2 * (n - 1 - q))) & 3
        r += (s & 1) << (n - 1 - q)
        c += (s >> 1) << (n - 1 - q)
    return r + (c << n)


def _apply_uniform_factor_block(block: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    """Apply the same 4x4 superoperator to every site of an interleaved block.

    ``block`` has shape (4^n, batch) in the site-major layout of
    :func:`_interleave_indices`.  Site pairs are contracted with
    ``kron(f, f)`` as plain 2-D gemms, rotating each pair to the front; the
    output therefore comes back with its site axes *permuted*.  That is fine
    for the permutation-invariant consumers here (elementwise products and
    decay-rate bucket sums), as long as every block of one computation goes
    through this same transform.
    """
    pairs, leftover = divmod(n, 2)
    arr = block
    if pairs:
        f2 = np.kron(f, f)
        arr = f2 @ arr.reshape(16, -1)
        for p in range(1, pairs):
            arr = arr.reshape(16**p, 16, -1).transpose(1, 0, 2).reshape(16, -1)
            arr = f2 @ arr
    if leftover:
        arr = arr.reshape(4 ** (n - 1), 4, -1).transpose(1, 0, 2).reshape(4, -1)
        arr = f @ arr
    return arr.reshape(block.shape)


_CHUNK = 64


def run_experiment(exp: VarianceExperiment, progress=None) -> list[VariancePoint]:
    """Evaluate the full grid; deterministic given ``base_seed``.

    Draws are chunked and the channel sweep runs on interleaved state blocks,
    which is algebraically identical to calling :func:`sample_gradient` per
    point (the draws share seeds ``base_seed XOR index`` across the dt grid).
    """
    points: list[VariancePoint] = []
    for n in exp.n_values:
        for depth in exp.depth_values:
            cfg = GradientSampleConfig(
                n=n,
                depth=depth,
                dt=0.0,
                target=exp.target,
                source=exp.source,
                hamiltonian=exp.hamiltonian,
            )
            dts = list(exp.dt_values)
            if exp.include_unitary and exp.target == "theta":
                dts = [0.0] + dts
            grads = np.empty((len(dts), exp.samples))
            if exp.source == "warmup":
                _run_warmup_block(exp, cfg, dts, grads, progress)
            else:
                _run_branched_block(exp, cfg, dts, grads, progress)
            for k, dt in enumerate(dts):
                x = grads[k]
                points.append(
                    VariancePoint(
                        n=n,
                        depth=depth,
                        dt=dt,
                        target=exp.target,
                        estimate=float(x.var(ddof=1)),
                        std_error=jackknife_variance_se(x),
                        samples=exp.samples,
                    )
                )
    return points


def _run_warmup_block(exp, cfg, dts, grads, progress) -> None:
    """Single-branch warm-up sweep: one fixed Hamiltonian, pulled back per dt."""
    n = cfg.n
    pullback = _make_pullback(cfg)
    vec_ham = _SampleDraw(exp.base_seed, cfg).vec_ham
    pulled = [vec_ham if dt == 0.0 else pullback(vec_ham, dt, 0) for dt in dts]
    for i in range(exp.samples):
        draw = _SampleDraw(exp.base_seed ^ i, cfg)
        for k in range(len(dts)):
            grads[k, i] = np.vdot(pulled[k], draw.delta_vec).real
        if progress is not None and (i + 1) % 200 == 0:
            progress(n, cfg.depth, i + 1, exp.samples)


class _UniformChannelSweep:
    """dt sweep of a uniform all-site channel via its single-site eigenbasis.

    With ``F(dt) = R exp(diag(lambda) dt) L^dag`` per site (L the dual left
    basis), a bilinear form ``<H, (x)F(dt) X>`` equals
    ``sum_k c_k exp(lambda_k dt)`` where the bucket coefficients ``c_k`` group
    the elementwise products of the transformed vectors by total decay rate.
    The transforms are dt-independent, so one pass per block covers the grid.
    """

    def __init__(self, n: int, dissipator: DissipatorSpec):
        gen = dissipator_superoperator(dissipator)
        w, right, left = eig_general(gen)
        # Integer decay in units of gamma/2; exact for this dissipator family.
        units = np.rint(-2.0 * w.real / max(dissipator.gamma, 1e-300)).astype(int)
        self.gamma = dissipator.gamma
        self.right_dag = right.conj().T
        self.left_dag = left.conj().T
        j = np.arange(4**n)
        total = np.zeros_like(j)
        for q in range(n):
            total += units[(j >> (2 * (n - 1 - q))) & 3]
        order = np.argsort(total, kind="stable")
        self.order = order
        counts = np.bincount(total, minlength=2 * n + 1)
        self.offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
        self.n_buckets = 2 * n + 1
        self.n = n

    def bucket_coefficients(
        self, ham_block: np.ndarray, state_block: np.ndarray
    ) -> np.ndarray:
        """c_k per sample for interleaved (4^n, batch) blocks."""
        h = _apply_uniform_factor_block(ham_block, self.right_dag, self.n)
        x = _apply_uniform_factor_block(state_block, self.left_dag, self.n)
        w = (h.conj() * x)[self.order]
        return np.add.reduceat(w, self.offsets, axis=0)

    def decay_matrix(self, dts) -> np.ndarray:
        """exp(-k gamma dt / 2) for every (dt, bucket k)."""
        k = np.arange(self.n_buckets)
        return np.exp(-0.5 * self.gamma * np.outer(np.asarray(dts), k))


def _run_branched_block(exp, cfg, dts, grads, progress) -> None:
    """Two-branch sweep on interleaved sample blocks."""
    n = cfg.n
    perm = _interleave_indices(n)
    sweeps = [
        _UniformChannelSweep(n, ch.liouvillian.dissipators[0])
        for ch in _branch_channels(cfg, 1.0)
    ]
    pos_dts = np.array([dt for dt in dts if dt > 0.0])
    decay = [sw.decay_matrix(pos_dts) for sw in sweeps]
    pos_rows = [k for k, dt in enumerate(dts) if dt > 0.0]
    done = 0
    for start in range(0, exp.samples, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, exp.samples))
        draws = [_SampleDraw(exp.base_seed ^ int(i), cfg) for i in idx]
        hams = np.stack([d.vec_ham[perm] for d in draws], axis=1)
        sig = np.array([sigmoid(d.sigma) for d in draws])
        if exp.target == "theta":
            states = np.stack([d.delta_vec[perm] for d in draws], axis=1)
        else:
            states = np.stack([d.state_vec[perm] for d in draws], axis=1)
        # branch values for the whole dt grid: (n_dts, batch) per branch
        vals = [
            (decay[b] @ sweeps[b].bucket_coefficients(hams, states)).real
            for b in (0, 1)
        ]
        if exp.target == "theta":
            swept = sig * vals[0] + (1.0 - sig) * vals[1]
        else:
            swept = sig * (1.0 - sig) * (vals[0] - vals[1])
        for row, k in enumerate(pos_rows):
            grads[k, idx] = swept[row]
        if 0.0 in dts:
            k0 = dts.index(0.0)
            grads[k0, idx] = np.einsum("vb,vb->b", hams.conj(), states).real
        done += len(draws)
        if progress is not None:
            progress(n, cfg.depth, done, exp.samples)


def best_dt_points(points: list[VariancePoint]) -> list[VariancePoint]:
    """Per (n, depth): the grid point with the largest variance (dt > 0 only)."""
    best: dict[tuple[int, int], VariancePoint] = {}
    for p in points:
        if p.dt == 0.0:
            continue
        key = (p.n, p.depth)
        if key not in best or p.estimate > best[key].estimate:
            best[key] = p
    return [best[k] for k in sorted(best)]


def unitary_points(points: list[VariancePoint]) -> dict[tuple[int, int], VariancePoint]:
    """The dt = 0 (channel-off) rows keyed by (n, depth)."""
    return {(p.n, p.depth): p for p in points if p.dt == 0.0}
