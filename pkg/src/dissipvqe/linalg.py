"""Dense complex linear algebra and Liouville-space primitives.

Conventions used throughout the package:

* Qubit 0 is the *first* (leftmost, most significant) tensor factor, so the
  computational basis state ``|b0 b1 ... b_{n-1}>`` has index
  ``sum_i b_i 2^(n-1-i)``.
* Operators are plain complex ``numpy`` arrays; density matrices are
  Hermitian, unit-trace, PSD arrays validated by :func:`assert_density_matrix`.
* Vectorization is column-stacking: ``vec(A)[i + d*j] = A[i, j]``.  In this
  convention ``vec(A X B) = kron(B.T, A) @ vec(X)`` and the Liouville inner
  product ``<<tau|rho>> = Tr(tau^dag rho) = vec(tau)^dag vec(rho)``.  The
  Heisenberg-picture (adjoint) matrix of a channel is the conjugate transpose
  of its Schroedinger-picture matrix.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

# Tolerance hierarchy: pure linear algebra / channel & state invariants /
# eigendecompositions.
TOL_LINALG = 1e-12
TOL_CHANNEL = 1e-10
TOL_EIG = 1e-9

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)


class NearDefectiveMatrixWarning(UserWarning):
    """Eigenvector basis is badly conditioned; spectral results are suspect."""


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(a, b)


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def num_qubits(a: np.ndarray) -> int:
    """Qubit count of a square operator whose dimension is a power of two."""
    d = a.shape[0]
    n = d.bit_length() - 1
    if a.shape != (d, d) or d != 2**n:
        raise ValueError(f"not a qubit operator, shape {a.shape}")
    return n


def vectorize(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    return np.asarray(a).reshape(-1, order="F")


def devectorize(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v)
    if dim is None:
        dim = round(np.sqrt(v.size))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a square matrix")
    return v.reshape((dim, dim), order="F")


def overlap(tau: np.ndarray, rho: np.ndarray) -> complex:
    """Liouville inner product <<tau|rho>> = Tr(tau^dag rho)."""
    return complex(np.vdot(tau, rho))


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square complex matrix.

    Hermitian (and anti-Hermitian) inputs take a diagonalization fast path;
    everything else goes through scaling-and-squaring.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix_exponential needs a square matrix, got {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.conj().T).max() <= 1e-14 * scale:
        w, v = np.linalg.eigh(a)
        return (v * np.exp(w)) @ v.conj().T
    if np.abs(a + a.conj().T).max() <= 1e-14 * scale:
        w, v = np.linalg.eigh(1j * a)  # a = -i * hermitian
        return (v * np.exp(-1j * w)) @ v.conj().T
    return scipy.linalg.expm(a)


def eig_general(a: np.ndarray, cond_warn: float = 1e10):
    """Eigenvalues with biorthonormal right/left eigenvector bases.

    Returns ``(w, right, left)`` sorted by descending real part of ``w``, with
    columns satisfying ``a @ right[:, i] = w[i] right[:, i]``,
    ``left[:, i]^dag @ a = w[i] left[:, i]^dag`` and
    ``left[:, i]^dag @ right[:, j] = delta_ij``.  Degenerate clusters are
    biorthonormalized so the dual-basis reconstruction
    ``sum_i w_i r_i l_i^dag`` recovers ``a``.

    A :class:`NearDefectiveMatrixWarning` is emitted when the right
    eigenvector basis has condition number above ``cond_warn``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"eig_general needs a square matrix, got {a.shape}")
    w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    order = np.argsort(-w.real, kind="stable")
    w, vl, vr = w[order], vl[:, order], vr[:, order]

    if np.linalg.cond(vr) > cond_warn:
        warnings.warn(
            "eigenvector basis condition number exceeds "
            f"{cond_warn:g}; matrix is close to defective",
            NearDefectiveMatrixWarning,
        )

    # Group (near-)degenerate eigenvalues and make left/right bases dual
    # within each group; across groups duality is automatic.
    scale = max(np.abs(w).max(), 1.0)
    groups: list[list[int]] = []
    for i in range(len(w)):
        if groups and abs(w[i] - w[groups[-1][0]]) <= 1e-8 * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    left = vl.astype(complex)
    for g in groups:
        m = left[:, g].conj().T @ vr[:, g]
        left[:, g] = left[:, g] @ np.linalg.inv(m).conj().T
    return w, vr, left


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace_norm needs a square matrix, got {a.shape}")
    return float(np.linalg.svd(a, compute_uv=False).sum())


def _check_sites(sites, n: int) -> tuple[int, ...]:
    sites = tuple(int(s) for s in sites)
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in {sites}")
    for s in sites:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range for {n} qubits")
    return sites


def embed_operator(op: np.ndarray, sites, n: int) -> np.ndarray:
    """Dense n-qubit embedding of an operator acting on ``sites``.

    ``sites`` gives the qubits the rows/columns of ``op`` refer to, in order
    (``sites[0]`` is the most significant bit of the operator's own index).
    """
    sites = _check_sites(sites, n)
    k = len(sites)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites")
    rest = [q for q in range(n) if q not in sites]
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex))
    t = full.reshape((2,) * (2 * n))
    # Current axis order: rows (sites..., rest...), cols (sites..., rest...).
    cur_order = list(sites) + rest
    perm = [cur_order.index(q) for q in range(n)]
    t = t.transpose(perm + [n + p for p in perm])
    return np.ascontiguousarray(t.reshape(2**n, 2**n))


def apply_local(rho: np.ndarray, op: np.ndarray, sites) -> np.ndarray:
    """Conjugate ``rho`` by ``op`` embedded on ``sites``: (I (x) op (x) I) rho (.)^dag."""
    n = num_qubits(rho)
    sites = _check_sites(sites, n)
    k = len(sites)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} sites")
    rest = [q for q in range(n) if q not in sites]
    t = rho.reshape((2,) * (2 * n))
    # Bring the site axes (rows then columns) to the front.
    src = list(sites) + [n + q for q in sites]
    t = np.moveaxis(t, src, range(2 * k))
    t = t.reshape(2**k, 2**k, -1)
    opt = op.reshape((2**k, 2**k))
    out = np.einsum("ab,bcx,dc->adx", opt, t, opt.conj())
    out = out.reshape((2,) * (2 * k) + tuple(2 for _ in range(2 * (n - k))))
    out = np.moveaxis(out, range(2 * k), src)
    return np.ascontiguousarray(out.reshape(2**n, 2**n))


def apply_local_super(vec: np.ndarray, superop: np.ndarray, sites, n: int) -> np.ndarray:
    """Apply a superoperator on ``sites`` to a column-stacked n-qubit operator.

    ``superop`` is ``4^k x 4^k`` in the column-stacking convention of the
    k-qubit subsystem selected by ``sites``.
    """
    sites = _check_sites(sites, n)
    k = len(sites)
    if superop.shape != (4**k, 4**k):
        raise ValueError(f"superoperator shape {superop.shape} does not match {k} sites")
    if vec.size != 4**n:
        raise ValueError(f"vector length {vec.size} is not 4^{n}")
    rho_t = vec.reshape((2,) * (2 * n), order="F")
    # Column-stacking puts row indices fastest, so after an F-order reshape
    # axis q is *row* qubit n-1-q and axis n+q is *column* qubit n-1-q.
    row_ax = [n - 1 - q for q in sites]
    col_ax = [2 * n - 1 - q for q in sites]
    t = np.moveaxis(rho_t, row_ax + col_ax, range(2 * k))
    # Subsystem row index R = sum_m b_{sites[m]} 2^(k-1-m): C-order flatten.
    t = t.reshape(2**k, 2**k, -1)
    t = np.transpose(t, (1, 0, 2)).reshape(4**k, -1)  # vec index = R + 2^k C
    t = superop @ t
    t = t.reshape(2**k, 2**k, -1)
    t = np.transpose(t, (1, 0, 2))
    t = t.reshape((2,) * (2 * k) + (2,) * (2 * (n - k)))
    t = np.moveaxis(t, range(2 * k), row_ax + col_ax)
    return t.reshape(-1, order="F")


def ptrace_last(rho: np.ndarray) -> np.ndarray:
    """Partial trace over the last qubit of an (m+1)-qubit operator."""
    d = rho.shape[0] // 2
    t = rho.reshape(d, 2, d, 2)
    return np.ascontiguousarray(np.trace(t, axis1=1, axis2=3))


def is_hermitian(a: np.ndarray, tol: float = TOL_CHANNEL) -> bool:
    return bool(np.abs(a - a.conj().T).max() <= tol)


def is_density_matrix(rho: np.ndarray, tol: float = TOL_CHANNEL) -> bool:
    """Hermitian, unit trace, PSD (eigenvalues >= -1e-9) within tolerance."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return bool(evals.min() >= -1e-9)


def assert_density_matrix(rho: np.ndarray, tol: float = TOL_CHANNEL) -> None:
    """Raise ``ValueError`` unless ``rho`` is a valid density matrix."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"not square: shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace {tr} != 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lam < -1e-9:
        raise ValueError(f"not PSD: min eigenvalue {lam:.3e}")


def basis_state(bits: str) -> np.ndarray:
    """Density matrix |b><b| for a computational basis bitstring."""
    idx = int(bits, 2)
    d = 2 ** len(bits)
    rho = np.zeros((d, d), dtype=complex)
    rho[idx, idx] = 1.0
    return rho
