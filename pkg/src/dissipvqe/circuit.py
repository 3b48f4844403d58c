"""Layered hardware-efficient ansatz and the single-qubit product ansatz.

The layered circuit is ``U = (W U_D) ... (W U_1)`` acting on the state from
the right of the product, i.e. layer 1 is applied first: rotations on every
qubit, then the entangler ``W`` (a chain of CZ gates on adjacent pairs, no
periodic boundary).  All parametrized gates are Pauli rotations
``R_d(t) = exp(-i t sigma_d / 2)``, so the two-point parameter-shift rule is
exact for every parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import I2, KET_0, PAULI_X, PAULI_Y, PAULI_Z, kron_all, num_qubits

_AXES = ("x", "y", "z")
_AXIS_MATS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


@dataclass(frozen=True)
class AnsatzSpec:
    """Layered ansatz: ``depth`` layers of per-qubit rotations around ``axes``.

    ``axes`` has shape (depth, n); parameters are ordered layer-major then
    qubit, so parameter ``l*n + i`` drives the rotation of qubit ``i`` in
    layer ``l``.
    """

    n: int
    depth: int
    axes: tuple

    def __post_init__(self):
        axes = tuple(tuple(row) for row in self.axes)
        object.__setattr__(self, "axes", axes)
        if len(axes) != self.depth or any(len(row) != self.n for row in axes):
            raise ValueError(f"axes shape must be {self.depth}x{self.n}")
        for row in axes:
            for a in row:
                if a not in _AXES:
                    raise ValueError(f"unknown rotation axis {a!r}")

    @property
    def num_params(self) -> int:
        return self.depth * self.n


@dataclass(frozen=True)
class ProductXAnsatz:
    """Product of independent x-rotations, one angle per qubit."""

    n: int

    @property
    def num_params(self) -> int:
        return self.n


def as_params(theta, expected: int) -> np.ndarray:
    """Validate and coerce a parameter vector of the expected length."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != expected:
        raise ValueError(f"expected {expected} parameters, got {theta.size}")
    return theta


def build_ansatz(n: int, depth: int, rng: np.random.Generator) -> AnsatzSpec:
    """Sample rotation axes i.i.d. uniform over {x, y, z}."""
    if n < 1 or depth < 1:
        raise ValueError("need n >= 1 and depth >= 1")
    axes = rng.choice(_AXES, size=(depth, n))
    return AnsatzSpec(n=n, depth=depth, axes=tuple(tuple(r) for r in axes))


def rotation(axis: str, angle: float) -> np.ndarray:
    """Single-qubit Pauli rotation exp(-i angle sigma_axis / 2)."""
    s = _AXIS_MATS[axis]
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * s


def cz_chain_diag(n: int) -> np.ndarray:
    """Diagonal of W = prod_{i<n-1} CZ_{i,i+1} over the computational basis."""
    if n == 1:
        return np.ones(2, dtype=complex)
    bits = ((np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(int)
    signs = (bits[:, :-1] * bits[:, 1:]).sum(axis=1)
    return np.where(signs % 2 == 0, 1.0, -1.0).astype(complex)


def layer_rotations(spec: AnsatzSpec, theta: np.ndarray, layer: int) -> np.ndarray:
    """Kronecker product of the rotation gates of one layer."""
    n = spec.n
    gates = [rotation(spec.axes[layer][i], theta[layer * n + i]) for i in range(n)]
    return kron_all(gates)


def circuit_unitary(spec: AnsatzSpec, theta) -> np.ndarray:
    """Dense unitary of the full layered circuit."""
    theta = as_params(theta, spec.num_params)
    w = cz_chain_diag(spec.n)
    u = np.eye(2**spec.n, dtype=complex)
    for layer in range(spec.depth):
        u = w[:, None] * (layer_rotations(spec, theta, layer) @ u)
    return u


def product_x_unitary(theta) -> np.ndarray:
    """Dense unitary of the per-qubit x-rotation product."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    return kron_all([rotation("x", t) for t in theta])


def initial_state(n: int) -> np.ndarray:
    """Tilted product state (R_y(pi/4)|0>)^(x)n, avoiding preferred axes."""
    if n < 1:
        raise ValueError("need n >= 1")
    ket = np.cos(np.pi / 8) * KET_0 + np.sin(np.pi / 8) * np.array([0, 1], dtype=complex)
    rho1 = np.outer(ket, ket.conj())
    return kron_all([rho1] * n)


def apply_ansatz(spec: AnsatzSpec, theta, rho: np.ndarray) -> np.ndarray:
    """Conjugate a density matrix by the layered circuit."""
    if num_qubits(rho) != spec.n:
        raise ValueError("state size does not match ansatz")
    u = circuit_unitary(spec, theta)
    return u @ rho @ u.conj().T


def apply_product_x_ansatz(theta, rho: np.ndarray) -> np.ndarray:
    """Conjugate a density matrix by per-qubit x-rotations."""
    n = num_qubits(rho)
    theta = as_params(theta, n)
    u = product_x_unitary(theta)
    return u @ rho @ u.conj().T
