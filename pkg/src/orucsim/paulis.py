"""Exact n-qubit Pauli string arithmetic in symplectic (x, z) bit form.

A Pauli string is stored as a pair of bit-packed integers: bit ``i`` of
``x_bits``/``z_bits`` refers to qubit ``i``, and qubit 0 is the leftmost
character of the text label. The operator encoded by a pair of bits is

    P(x, z) = i^(x*z) * X^x * Z^z        (so x=z=1 is Y),

which keeps all products and commutators exact in integer arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Optional, Sequence

import numpy as np

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator without phase, in symplectic bit form."""

    n: int
    x_bits: int
    z_bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        mask = (1 << self.n) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask:
            raise ValueError("bit vectors longer than qubit count")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse a label like ``"XZY"`` (leftmost character = qubit 1)."""
        if not label:
            raise ValueError("empty Pauli label")
        x = z = 0
        for i, ch in enumerate(label):
            try:
                xb, zb = _LETTER_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_TO_LETTER[(self.x_bits >> i) & 1, (self.z_bits >> i) & 1]
            for i in range(self.n)
        )

    def __str__(self) -> str:
        return self.label

    def letter(self, qubit: int) -> str:
        return _BITS_TO_LETTER[(self.x_bits >> qubit) & 1, (self.z_bits >> qubit) & 1]

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of qubits with a non-identity letter."""
        bits = self.x_bits | self.z_bits
        return tuple(i for i in range(self.n) if (bits >> i) & 1)

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def restrict(self, qubits: Iterable[int]) -> "PauliString":
        """Keep letters on ``qubits``, set everything else to identity."""
        keep = 0
        for q in qubits:
            keep |= 1 << q
        return PauliString(self.n, self.x_bits & keep, self.z_bits & keep)


@dataclass(frozen=True)
class PhasedPauli:
    """A Pauli string together with a coefficient i^phase_power."""

    pauli: PauliString
    phase_power: int  # mod 4

    def __post_init__(self):
        if self.phase_power not in (0, 1, 2, 3):
            raise ValueError("phase_power must be in {0,1,2,3}")

    @property
    def coefficient(self) -> complex:
        return (1j) ** self.phase_power


def _check_same_length(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise ValueError(f"Pauli length mismatch: {a.n} vs {b.n}")


def pauli_product(a: PauliString, b: PauliString) -> PhasedPauli:
    """Product a*b as a phased Pauli: matrix(a)@matrix(b) = i^k * matrix(c).

    Phase bookkeeping: moving Z^za past X^xb costs (-1)^(za & xb), and the
    canonical i^(x*z) prefactors of a, b and the result are reconciled mod 4.
    """
    _check_same_length(a, b)
    xc = a.x_bits ^ b.x_bits
    zc = a.z_bits ^ b.z_bits
    phase = (
        (a.x_bits & a.z_bits).bit_count()
        + (b.x_bits & b.z_bits).bit_count()
        - (xc & zc).bit_count()
        + 2 * (a.z_bits & b.x_bits).bit_count()
    ) % 4
    return PhasedPauli(PauliString(a.n, xc, zc), phase)


def symplectic_inner(a: PauliString, b: PauliString) -> int:
    """0 when a and b commute, 1 when they anticommute."""
    _check_same_length(a, b)
    return (
        (a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()
    ) % 2


def commutator_string(
    a: PauliString, b: PauliString
) -> Optional[tuple[PauliString, complex]]:
    """[A, B] as (c, lam) with [A,B] = lam * matrix(c), or None if they commute.

    For anticommuting strings [A,B] = 2AB, so lam = 2*i^k with k the product
    phase (always odd here, making i*lam real).
    """
    _check_same_length(a, b)
    if symplectic_inner(a, b) == 0:
        return None
    prod = pauli_product(a, b)
    return prod.pauli, 2.0 * prod.coefficient


@dataclass(frozen=True)
class SignMatrix:
    """Matrix of (-1)^<row, col> symplectic signs over two Pauli index lists."""

    entries: np.ndarray  # integer +/-1 matrix
    rows: tuple[PauliString, ...]
    cols: tuple[PauliString, ...]


def sign_matrix(
    rows: Sequence[PauliString], cols: Sequence[PauliString]
) -> SignMatrix:
    """Build S with S[i, j] = (-1)^symplectic_inner(rows[i], cols[j])."""
    if len(rows) == 0 or len(cols) == 0:
        raise ValueError("sign_matrix needs non-empty row and column sets")
    entries = np.empty((len(rows), len(cols)), dtype=np.int64)
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            entries[i, j] = -1 if symplectic_inner(r, c) else 1
    return SignMatrix(entries, tuple(rows), tuple(cols))


_SIGN_1Q = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=np.int8
)


@lru_cache(maxsize=8)
def full_sign_entries(n: int) -> np.ndarray:
    """Sign matrix over the full canonical Pauli set; S_n = S_1 kron ... kron S_1."""
    return reduce(np.kron, [_SIGN_1Q] * n)


_LETTER_DIGIT = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def pauli_index(p: PauliString) -> int:
    """Index of p in the canonical enumerate_paulis(p.n) ordering."""
    idx = 0
    for i in range(p.n):
        idx = 4 * idx + _LETTER_DIGIT[p.letter(i)]
    return idx


def enumerate_paulis(
    n: int, max_weight: Optional[int] = None
) -> list[PauliString]:
    """All Pauli strings on n qubits in lexicographic label order (I<X<Y<Z).

    With ``max_weight`` set, only strings of that weight or less are produced
    (generated site-combination-wise so large n with small weight stays cheap).
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if max_weight is not None and max_weight > n:
        raise ValueError("max_weight exceeds qubit count")
    if max_weight is None or max_weight >= n:
        if n > 10:
            raise ValueError("full Pauli set too large past 10 qubits")
        return [
            PauliString.from_label("".join(letters))
            for letters in itertools.product("IXYZ", repeat=n)
        ]
    out = [PauliString.identity(n)]
    for w in range(1, max_weight + 1):
        for sites in itertools.combinations(range(n), w):
            for letters in itertools.product("XYZ", repeat=w):
                x = z = 0
                for q, ch in zip(sites, letters):
                    xb, zb = _LETTER_TO_BITS[ch]
                    x |= xb << q
                    z |= zb << q
                out.append(PauliString(n, x, z))
    out.sort(key=lambda p: p.label)
    return out
