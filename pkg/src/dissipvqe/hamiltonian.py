"""Pauli-sum Hamiltonians: warm-up projector, random spectra, file ingestion,
and locality profiling of channel-pulled-back observables.

Pauli strings are written with qubit 0 leftmost, e.g. ``ZIII`` acts with Z on
qubit 0 of four.  Coefficients are real, so every sum is Hermitian by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lindblad import (
    ChannelSpec,
    ConvexChannelSpec,
    DissipatorSpec,
    LiouvillianSpec,
    adjoint_channel_on_observable,
    adjoint_convex_channel_on_observable,
)
from .linalg import PAULIS, kron_all, num_qubits

_PAULI_CHARS = frozenset("IXYZ")


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of n-qubit Pauli strings."""

    n: int
    terms: tuple
    metadata: tuple = ()

    def __post_init__(self):
        terms = tuple((float(c), str(p)) for c, p in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "metadata", tuple(self.metadata))
        seen = set()
        for _, p in terms:
            if len(p) != self.n:
                raise ValueError(f"string {p!r} does not have length {self.n}")
            if not set(p) <= _PAULI_CHARS:
                raise ValueError(f"invalid Pauli string {p!r}")
            if p in seen:
                raise ValueError(f"duplicate Pauli string {p!r}")
            seen.add(p)

    def metadata_dict(self) -> dict:
        return dict(self.metadata)

    def to_dense(self) -> np.ndarray:
        """Dense matrix representation."""
        out = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for c, p in self.terms:
            out += c * pauli_matrix(p)
        return out


def pauli_matrix(string: str) -> np.ndarray:
    """Dense matrix of a Pauli string (qubit 0 leftmost)."""
    return kron_all([PAULIS[ch] for ch in string])


def pauli_weight(string: str) -> int:
    """Number of non-identity letters."""
    return sum(1 for ch in string if ch != "I")


def all_pauli_strings(n: int):
    """All 4^n Pauli strings in lexicographic order."""
    if n == 0:
        yield ""
        return
    for rest in all_pauli_strings(n - 1):
        for ch in "IXYZ":
            yield ch + rest


def pauli_decompose(mat: np.ndarray, drop_below: float = 0.0) -> PauliSum:
    """Exact Pauli expansion of a Hermitian matrix via trace inner products."""
    n = num_qubits(mat)
    terms = []
    for p in all_pauli_strings(n):
        c = np.trace(pauli_matrix(p) @ mat) / 2**n
        if abs(c.imag) > 1e-9:
            raise ValueError(f"matrix is not Hermitian: Im coefficient {c.imag:.2e}")
        if abs(c.real) > drop_below:
            terms.append((c.real, p))
    return PauliSum(n=n, terms=tuple(terms))


def warmup_hamiltonian(n: int) -> PauliSum:
    """Projector-complement Hamiltonian I - |0...0><0...0| as a Pauli sum.

    Expanding the rank-1 projector gives 2^n terms: every subset S of qubits
    contributes -(1/2^n) on the Z-string supported on S, plus (1 - 1/2^n) on
    the identity.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    coeff = 1.0 / 2**n
    terms = []
    for mask in range(2**n):
        string = "".join("Z" if (mask >> (n - 1 - i)) & 1 else "I" for i in range(n))
        if mask == 0:
            terms.append((1.0 - coeff, string))
        else:
            terms.append((-coeff, string))
    return PauliSum(n=n, terms=tuple(terms))


def expectation(ham, rho: np.ndarray) -> float:
    """Tr(H rho), clamped to its real part (imaginary residue <= 1e-10)."""
    mat = ham.to_dense() if isinstance(ham, PauliSum) else np.asarray(ham)
    if mat.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {mat.shape} vs {rho.shape}")
    val = np.trace(mat @ rho)
    if abs(val.imag) > 1e-8:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class RandomHamiltonianSpec:
    """Random Hermitian with pinned extreme eigenpairs near |0...0> and |1...1>."""

    n: int
    e_max: float = 1.1
    e_min: float = -1.1
    perturbation: float = 0.1
    seed: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")


@dataclass(frozen=True)
class RandomHamiltonian:
    """Generated matrix plus its ground-state record."""

    matrix: np.ndarray
    ground_energy: float
    ground_state: np.ndarray
    ground_anchor: str  # the basis state the ground eigenvector was seeded near
    eigenvalues: np.ndarray


def random_hamiltonian(
    spec: RandomHamiltonianSpec, rng: np.random.Generator | None = None
) -> RandomHamiltonian:
    """Draw one Hamiltonian.

    Construction: perturb |0...0> and |1...1> by 0.1 x Haar states, normalize,
    Gram-Schmidt the second against the first, assign them to the extreme
    eigenvalues by a fair coin, complete the basis with a Haar unitary on the
    orthogonal complement, and draw the interior eigenvalues uniform(-1, 1).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n, d = spec.n, 2**spec.n

    def haar_ket():
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        return v / np.linalg.norm(v)

    anchor0 = np.zeros(d, dtype=complex)
    anchor0[0] = 1.0
    anchor1 = np.zeros(d, dtype=complex)
    anchor1[-1] = 1.0

    psi1 = anchor0 + spec.perturbation * haar_ket()
    psi2 = anchor1 + spec.perturbation * haar_ket()
    psi1 = psi1 / np.linalg.norm(psi1)
    psi2 = psi2 - (psi1.conj() @ psi2) * psi1
    psi2 = psi2 / np.linalg.norm(psi2)

    if rng.integers(2) == 0:
        vec_min, vec_max = psi1, psi2
        ground_anchor = "0" * n
    else:
        vec_min, vec_max = psi2, psi1
        ground_anchor = "1" * n

    # Haar basis of the orthogonal complement: orthonormalize a Gaussian
    # block against the fixed pair, then QR with the usual phase fix.
    g = rng.normal(size=(d, d - 2)) + 1j * rng.normal(size=(d, d - 2))
    fixed = np.column_stack([vec_min, vec_max])
    g = g - fixed @ (fixed.conj().T @ g)
    q, r = np.linalg.qr(g)
    q = q * (r.diagonal() / np.abs(r.diagonal()))

    interior = rng.uniform(-1.0, 1.0, size=d - 2)
    vecs = np.column_stack([vec_min, vec_max, q])
    vals = np.concatenate([[spec.e_min, spec.e_max], interior])
    mat = (vecs * vals) @ vecs.conj().T
    mat = 0.5 * (mat + mat.conj().T)
    return RandomHamiltonian(
        matrix=mat,
        ground_energy=spec.e_min,
        ground_state=vec_min,
        ground_anchor=ground_anchor,
        eigenvalues=np.sort(vals),
    )


@dataclass(frozen=True)
class LocalityProfile:
    """Squared-coefficient mass of a Pauli expansion, keyed by Pauli weight."""

    weights: dict = field(default_factory=dict)
    total: float = 0.0

    def mass(self, k: int) -> float:
        return self.weights.get(k, 0.0)

    def non_identity_total(self) -> float:
        return self.total - self.mass(0)

    def fraction_at_most(self, k_max: int) -> float:
        """Share of non-identity mass carried by weights 1..k_max."""
        denom = self.non_identity_total()
        if denom == 0.0:
            return 1.0
        return sum(v for k, v in self.weights.items() if 1 <= k <= k_max) / denom

    def relative_mass(self, k: int) -> float:
        denom = self.non_identity_total()
        return self.mass(k) / denom if denom else 0.0


def locality_profile(mat: np.ndarray) -> LocalityProfile:
    """Pauli-weight mass profile of a Hermitian matrix."""
    expansion = pauli_decompose(mat)
    weights: dict[int, float] = {}
    for c, p in expansion.terms:
        k = pauli_weight(p)
        weights[k] = weights.get(k, 0.0) + c * c
    return LocalityProfile(weights=weights, total=sum(weights.values()))


def effective_hamiltonian(ham, channel) -> tuple[np.ndarray, LocalityProfile]:
    """Heisenberg-picture observable and its locality profile.

    ``channel`` is a :class:`ChannelSpec` or :class:`ConvexChannelSpec`; the
    pulled-back operator stays Hermitian, and increasing the interaction time
    concentrates its non-identity mass on low Pauli weights.
    """
    mat = ham.to_dense() if isinstance(ham, PauliSum) else np.asarray(ham, dtype=complex)
    if isinstance(channel, ConvexChannelSpec):
        out = adjoint_convex_channel_on_observable(channel, mat)
    elif isinstance(channel, ChannelSpec):
        out = adjoint_channel_on_observable(channel, mat)
    else:
        raise TypeError(f"unsupported channel type {type(channel)!r}")
    return out, locality_profile(out)


def hf_dissipators(hf_bits: str) -> LiouvillianSpec:
    """Dissipators along z whose joint steady state is |hf_bits><hf_bits|."""
    if not hf_bits or set(hf_bits) - {"0", "1"}:
        raise ValueError(f"invalid bitstring {hf_bits!r}")
    dissipators = tuple(
        DissipatorSpec(site=q, alpha=(np.pi if b == "0" else 0.0), phi=0.0, gamma=1.0)
        for q, b in enumerate(hf_bits)
    )
    return LiouvillianSpec(n=len(hf_bits), dissipators=dissipators)


class PauliFileError(ValueError):
    """Raised for malformed Pauli coefficient files, with the line number."""


def load_pauli_file(path) -> PauliSum:
    """Parse a Pauli coefficient file.

    Header lines start with ``#`` and carry ``key=value`` metadata; body lines
    are ``<float> <PauliString>``.  Blank lines are ignored, duplicate strings
    are merged by coefficient addition, and the qubit count is inferred from
    the string length (checked against the ``n`` header when present).
    """
    meta: dict[str, str] = {}
    coeffs: dict[str, float] = {}
    order: list[str] = []
    n: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PauliFileError(
                    f"{path}:{lineno}: expected '<coefficient> <PauliString>', got {line!r}"
                )
            try:
                c = float(parts[0])
            except ValueError as exc:
                raise PauliFileError(
                    f"{path}:{lineno}: coefficient {parts[0]!r} is not a real number"
                ) from exc
            p = parts[1].upper()
            if not set(p) <= _PAULI_CHARS:
                raise PauliFileError(f"{path}:{lineno}: invalid Pauli string {p!r}")
            if n is None:
                n = len(p)
            elif len(p) != n:
                raise PauliFileError(
                    f"{path}:{lineno}: string length {len(p)} != {n} seen earlier"
                )
            if p not in coeffs:
                order.append(p)
                coeffs[p] = 0.0
            coeffs[p] += c
    if n is None:
        raise PauliFileError(f"{path}: no Pauli terms found")
    if "n" in meta and int(meta["n"]) != n:
        raise PauliFileError(
            f"{path}: header n={meta['n']} but strings have length {n}"
        )
    terms = tuple((coeffs[p], p) for p in order)
    return PauliSum(n=n, terms=terms, metadata=tuple(sorted(meta.items())))
