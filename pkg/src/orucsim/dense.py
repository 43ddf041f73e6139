"""Dense complex linear algebra for small systems.

Conventions: qubit 0 (leftmost label character) is the most significant bit
of the computational-basis index, so Pauli matrices are built as
kron(letter_0, letter_1, ...). Pauli transfer matrices are normalized so the
identity channel maps to the identity matrix:

    T[a, b] = (1/2^n) * Tr( sigma_a * E[sigma_b] )

with basis order given by ``enumerate_paulis(n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .paulis import PauliString, enumerate_paulis

DENSE_LIMIT = 6  # qubits; PTMs above this are refused

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DenseLimitError(ValueError):
    """Raised when a dense operation would exceed the configured qubit limit."""


def check_dense_limit(n: int, limit: int = DENSE_LIMIT) -> None:
    if n > limit:
        raise DenseLimitError(f"{n} qubits exceeds dense limit of {limit}")


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string."""
    return reduce(np.kron, (PAULI_1Q[p.letter(i)] for i in range(p.n)))


@lru_cache(maxsize=8)
def pauli_basis_stack(n: int) -> np.ndarray:
    """Stacked (4^n, 2^n, 2^n) array of all Pauli matrices in canonical order."""
    check_dense_limit(n, 4)  # stacks above 4 qubits are built per call instead
    return np.stack([pauli_matrix(p) for p in enumerate_paulis(n)])


@dataclass(frozen=True)
class GeneratorSet:
    """Pauli generators sigma_k with real coefficients a_k."""

    paulis: tuple[PauliString, ...]
    coefficients: np.ndarray

    def __post_init__(self):
        if len(self.paulis) != len(self.coefficients):
            raise ValueError("coefficient vector length must match generators")
        if len(self.paulis) == 0:
            raise ValueError("need at least one generator")

    def with_coefficients(self, coefficients: np.ndarray) -> "GeneratorSet":
        return GeneratorSet(self.paulis, np.asarray(coefficients, dtype=float))


def exp_pauli_sum(gen: GeneratorSet, scale: float = 1.0) -> np.ndarray:
    """exp(scale * sum_k i*a_k*sigma_k), unitary to round-off.

    The Hermitian generator H = sum_k a_k sigma_k is eigendecomposed, so the
    result is exactly unitary up to floating error (no series truncation).
    """
    coeffs = np.asarray(gen.coefficients, dtype=float)
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("non-finite generator coefficients")
    n = gen.paulis[0].n
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for p, a in zip(gen.paulis, coeffs):
        if a != 0.0:
            h += a * pauli_matrix(p)
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * scale * vals)) @ vecs.conj().T


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary on n qubits (QR of a Ginibre matrix, phase-fixed R)."""
    check_dense_limit(n)
    return haar_unitary_dim(2**n, rng)


def haar_unitary_dim(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def apply_unitary(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """U rho U^dagger."""
    if u.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {rho.shape}")
    return u @ rho @ u.conj().T


def ptm_of_unitary(u: np.ndarray) -> np.ndarray:
    """PTM of the conjugation channel rho -> U rho U^dagger (orthogonal matrix)."""
    dim = u.shape[0]
    n = dim.bit_length() - 1
    if 2**n != dim:
        raise ValueError("unitary dimension must be a power of two")
    check_dense_limit(n)
    basis = pauli_basis_stack(n) if n <= 4 else None
    if basis is not None:
        images = u @ basis @ u.conj().T
        t = np.einsum("aij,bji->ab", basis, images).real / dim
        return t
    paulis = enumerate_paulis(n)
    t = np.empty((4**n, 4**n))
    for b, pb in enumerate(paulis):
        img = u @ pauli_matrix(pb) @ u.conj().T
        for a, pa in enumerate(paulis):
            t[a, b] = np.trace(pauli_matrix(pa) @ img).real / dim
    return t


def ptm_from_apply(n: int, apply_fn) -> np.ndarray:
    """PTM of an arbitrary channel given its action on density-like matrices."""
    check_dense_limit(n)
    dim = 2**n
    paulis = enumerate_paulis(n)
    mats = (
        pauli_basis_stack(n)
        if n <= 4
        else np.stack([pauli_matrix(p) for p in paulis])
    )
    t = np.empty((4**n, 4**n))
    for b in range(4**n):
        img = apply_fn(mats[b])
        col = np.einsum("aij,ji->a", mats, img) / dim
        if np.max(np.abs(col.imag)) > 1e-10:
            raise ValueError("channel is not Hermiticity-preserving")
        t[:, b] = col.real
    return t


def channel_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between two PTMs, normalized by 2^n."""
    if a.shape != b.shape:
        raise ValueError(f"PTM size mismatch: {a.shape} vs {b.shape}")
    dim2 = a.shape[0]
    n = (dim2.bit_length() - 1) // 2
    if 4**n != dim2:
        raise ValueError("PTM side must be a power of four")
    return float(np.linalg.norm(a - b)) / 2**n


def bit_sign_mask(p: PauliString) -> int:
    """z-bits of p repacked so bit (n-1-i) covers qubit i, matching basis indices.

    Used for the (-1)^(k . z) parity of computational bitstrings k against an
    I/Z-only Pauli string.
    """
    m = 0
    for i in range(p.n):
        if (p.z_bits >> i) & 1:
            m |= 1 << (p.n - 1 - i)
    return m


def parity_sign(k: int, mask: int) -> int:
    return -1 if (k & mask).bit_count() % 2 else 1
