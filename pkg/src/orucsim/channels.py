"""Channel constructors and exact / Monte-Carlo application.

Covers every channel family used in the experiments: Pauli channels (dense or
sparse support), unitary conjugations, the U.P.V random-unitary sandwich,
Weyl shift-and-multiply channels, general random unitary channels, sparse
multiplicative factor models, and compositions. ``Composition(parts)`` follows
the mathematical convention: parts[0] is applied last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dense
from .paulis import (
    PauliString,
    enumerate_paulis,
    full_sign_entries,
    pauli_index,
    symplectic_inner,
)

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityVector:
    """Convex coefficients over a support of Pauli strings (or other labels)."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if len(self.support) != len(p):
            raise ValueError("support and probability lengths differ")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be unique")
        if np.any(p < -PROB_TOL):
            raise ValueError(f"negative probability: min {p.min()}")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")

    @classmethod
    def point_mass(cls, support, index: int = 0) -> "ProbabilityVector":
        p = np.zeros(len(support))
        p[index] = 1.0
        return cls(tuple(support), p)


def uniform_probs(support) -> ProbabilityVector:
    k = len(support)
    return ProbabilityVector(tuple(support), np.full(k, 1.0 / k))


class Channel:
    """Base class: immutable channel spec with dense application and PTM."""

    n: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _compute_ptm(self) -> np.ndarray:
        return dense.ptm_from_apply(self.n, self.apply)

    def ptm(self) -> np.ndarray:
        cached = getattr(self, "_ptm_cache", None)
        if cached is None:
            cached = self._compute_ptm()
            object.__setattr__(self, "_ptm_cache", cached)
        return cached

    def unitary_ensemble(self) -> list[tuple[float, np.ndarray]]:
        """(probability, unitary) decomposition used by exact and sampled modes."""
        raise NotImplementedError

    def sample_unitary(self, rng: np.random.Generator) -> np.ndarray:
        probs_and_us = self.unitary_ensemble()
        probs = np.array([p for p, _ in probs_and_us])
        idx = rng.choice(len(probs_and_us), p=probs / probs.sum())
        return probs_and_us[idx][1]

    def adjoint(self) -> "Channel":
        raise NotImplementedError(f"adjoint unsupported for {type(self).__name__}")


@dataclass(frozen=True)
class UnitaryChannel(Channel):
    """rho -> U rho U^dagger."""

    unitary: np.ndarray

    @property
    def n(self) -> int:
        return self.unitary.shape[0].bit_length() - 1

    @classmethod
    def from_generators(cls, gen: dense.GeneratorSet, scale: float = 1.0):
        return cls(dense.exp_pauli_sum(gen, scale))

    @classmethod
    def identity(cls, n: int) -> "UnitaryChannel":
        return cls(np.eye(2**n, dtype=complex))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return dense.apply_unitary(self.unitary, rho)

    def _compute_ptm(self) -> np.ndarray:
        return dense.ptm_of_unitary(self.unitary)

    def unitary_ensemble(self):
        return [(1.0, self.unitary)]

    def adjoint(self) -> "UnitaryChannel":
        return UnitaryChannel(self.unitary.conj().T)


@dataclass(frozen=True)
class PauliChannel(Channel):
    """rho -> sum_k p_k sigma_k rho sigma_k; support may be sparse."""

    n: int
    probs: ProbabilityVector

    def __post_init__(self):
        for s in self.probs.support:
            if not isinstance(s, PauliString) or s.n != self.n:
                raise ValueError("Pauli channel support must be n-qubit Paulis")

    @classmethod
    def identity(cls, n: int) -> "PauliChannel":
        return cls(n, ProbabilityVector.point_mass((PauliString.identity(n),)))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for p, s in zip(self.probs.probs, self.probs.support):
            if p != 0.0:
                m = dense.pauli_matrix(s)
                out += p * (m @ rho @ m)
        return out

    def fidelity(self, alpha: PauliString) -> float:
        """Diagonal PTM entry for sigma_alpha, from symplectic signs alone."""
        total = 0.0
        for p, s in zip(self.probs.probs, self.probs.support):
            total += -p if symplectic_inner(alpha, s) else p
        return total

    def _support_indices(self) -> np.ndarray:
        return np.array([pauli_index(s) for s in self.probs.support])

    def _compute_ptm(self) -> np.ndarray:
        dense.check_dense_limit(self.n)
        s_cols = full_sign_entries(self.n)[:, self._support_indices()]
        return np.diag(s_cols.astype(float) @ self.probs.probs)

    def unitary_ensemble(self):
        return [
            (float(p), dense.pauli_matrix(s))
            for p, s in zip(self.probs.probs, self.probs.support)
        ]

    def adjoint(self) -> "PauliChannel":
        return self


def sparse_additive_channel(
    n: int, probs: ProbabilityVector, max_weight: Optional[int] = None
) -> PauliChannel:
    """Additive sparse model: a Pauli channel on a weight-limited support."""
    if max_weight is not None:
        for s in probs.support:
            if s.weight > max_weight:
                raise ValueError(f"support entry {s} exceeds weight {max_weight}")
    return PauliChannel(n, probs)


@dataclass(frozen=True)
class OrucChannel(Channel):
    """rho -> sum_i p_i (U sigma_i V) rho (U sigma_i V)^dagger."""

    unitary_out: np.ndarray
    pauli_probs: ProbabilityVector
    unitary_in: np.ndarray

    @property
    def n(self) -> int:
        return self.unitary_out.shape[0].bit_length() - 1

    def parts(self) -> tuple[UnitaryChannel, PauliChannel, UnitaryChannel]:
        return (
            UnitaryChannel(self.unitary_out),
            PauliChannel(self.n, self.pauli_probs),
            UnitaryChannel(self.unitary_in),
        )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        u, p, v = self.parts()
        return u.apply(p.apply(v.apply(rho)))

    def _compute_ptm(self) -> np.ndarray:
        u, p, v = self.parts()
        return u.ptm() @ p.ptm() @ v.ptm()

    def unitary_ensemble(self):
        return [
            (float(pi), self.unitary_out @ dense.pauli_matrix(s) @ self.unitary_in)
            for pi, s in zip(self.pauli_probs.probs, self.pauli_probs.support)
        ]

    def adjoint(self) -> "Channel":
        u, p, v = self.parts()
        return Composition((v.adjoint(), p, u.adjoint()))


@dataclass(frozen=True)
class WeylIndex:
    d: int
    k: int
    j: int

    def __post_init__(self):
        if not (0 <= self.k < self.d and 0 <= self.j < self.d):
            raise ValueError("Weyl index out of range")


def weyl_matrix(idx: WeylIndex) -> np.ndarray:
    """W_kj = sum_m exp(2 pi i k m / d) |m+j><m| (shift-and-multiply basis)."""
    d, k, j = idx.d, idx.k, idx.j
    w = np.zeros((d, d), dtype=complex)
    for m in range(d):
        w[(m + j) % d, m] = np.exp(2j * np.pi * k * m / d)
    return w


@dataclass(frozen=True)
class WeylChannel(Channel):
    """Random unitary channel over Weyl matrices, embedded on n = log2(d) qubits."""

    d: int
    probs: ProbabilityVector  # support of (k, j) tuples

    def __post_init__(self):
        n = self.d.bit_length() - 1
        if 2**n != self.d:
            raise ValueError("Weyl channel requires d = 2^n to stay in the Pauli frame")

    @property
    def n(self) -> int:
        return self.d.bit_length() - 1

    def unitary_ensemble(self):
        return [
            (float(p), weyl_matrix(WeylIndex(self.d, k, j)))
            for p, (k, j) in zip(self.probs.probs, self.probs.support)
        ]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for p, u in self.unitary_ensemble():
            if p != 0.0:
                out += p * (u @ rho @ u.conj().T)
        return out

    def adjoint(self) -> "Channel":
        return GeneralRUC(tuple((p, u.conj().T) for p, u in self.unitary_ensemble()))


@dataclass(frozen=True)
class GeneralRUC(Channel):
    """Convex combination of arbitrary (not necessarily orthogonal) unitaries."""

    members: tuple  # of (prob, unitary ndarray)

    def __post_init__(self):
        probs = np.array([p for p, _ in self.members], dtype=float)
        ProbabilityVector(tuple(range(len(probs))), probs)  # validity check

    @property
    def n(self) -> int:
        return self.members[0][1].shape[0].bit_length() - 1

    def unitary_ensemble(self):
        return [(float(p), u) for p, u in self.members]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for p, u in self.members:
            if p != 0.0:
                out += p * (u @ rho @ u.conj().T)
        return out

    def adjoint(self) -> "GeneralRUC":
        return GeneralRUC(tuple((p, u.conj().T) for p, u in self.members))


@dataclass(frozen=True)
class SparseMultiplicative(Channel):
    """Composition of two-outcome factors E_i[rho] = (1-q_i) rho + q_i s_i rho s_i."""

    n: int
    factors: tuple  # of (q, PauliString)

    def __post_init__(self):
        for q, s in self.factors:
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"factor probability {q} outside [0, 1]")
            if s.n != self.n:
                raise ValueError("factor Pauli length mismatch")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.asarray(rho, dtype=complex)
        for q, s in self.factors:
            if q != 0.0:
                m = dense.pauli_matrix(s)
                out = (1.0 - q) * out + q * (m @ out @ m)
        return out

    def _compute_ptm(self) -> np.ndarray:
        dense.check_dense_limit(self.n)
        return np.diag([self.fidelity(a) for a in enumerate_paulis(self.n)])

    def fidelity(self, alpha: PauliString) -> float:
        """Closed-form PTM diagonal: prod_k (1 - q_k + s_{k,alpha} q_k)."""
        f = 1.0
        for q, s in self.factors:
            f *= 1.0 - 2.0 * q if symplectic_inner(s, alpha) else 1.0
        return f

    def unitary_ensemble(self):
        # expand the product distribution; exponential in factor count, only
        # used by the Monte Carlo path through sample_unitary below
        raise NotImplementedError("use sample_unitary for multiplicative channels")

    def sample_unitary(self, rng: np.random.Generator) -> np.ndarray:
        dim = 2**self.n
        u = np.eye(dim, dtype=complex)
        for q, s in self.factors:
            if rng.random() < q:
                u = dense.pauli_matrix(s) @ u
        return u

    def as_composition(self) -> "Composition":
        """Left-to-right factor composition (factors[0] applied last)."""
        parts = []
        for q, s in self.factors:
            probs = ProbabilityVector(
                (PauliString.identity(self.n), s), np.array([1.0 - q, q])
            )
            parts.append(PauliChannel(self.n, probs))
        return Composition(tuple(parts))

    def adjoint(self) -> "SparseMultiplicative":
        return self  # factors are Pauli channels, each self-adjoint and commuting


@dataclass(frozen=True)
class Composition(Channel):
    """Channel composition; parts[0] is applied last (matches E = A o B o C)."""

    parts: tuple

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ValueError("empty composition")
        ns = {c.n for c in self.parts}
        if len(ns) != 1:
            raise ValueError("composition parts act on different qubit counts")

    @property
    def n(self) -> int:
        return self.parts[0].n

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = rho
        for c in reversed(self.parts):
            out = c.apply(out)
        return out

    def _compute_ptm(self) -> np.ndarray:
        t = self.parts[0].ptm()
        for c in self.parts[1:]:
            t = t @ c.ptm()
        return t

    def sample_unitary(self, rng: np.random.Generator) -> np.ndarray:
        u = None
        for c in self.parts:
            ui = c.sample_unitary(rng)
            u = ui if u is None else u @ ui
        return u

    def adjoint(self) -> "Composition":
        return Composition(tuple(c.adjoint() for c in reversed(self.parts)))


def apply_channel_exact(spec: Channel, rho: np.ndarray) -> np.ndarray:
    dense.check_dense_limit(spec.n)
    return spec.apply(rho)


def apply_channel_sampled(
    spec: Channel, rho: np.ndarray, samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Monte Carlo application: average of U rho U^dagger over sampled unitaries."""
    if samples < 1:
        raise ValueError("need at least one sample")
    out = np.zeros_like(rho, dtype=complex)
    for _ in range(samples):
        u = spec.sample_unitary(rng)
        out += u @ rho @ u.conj().T
    return out / samples


def ptm_of(spec: Channel) -> np.ndarray:
    """Pauli transfer matrix of any channel spec (dense-limited)."""
    dense.check_dense_limit(spec.n)
    return spec.ptm()


def adjoint_channel(spec: Channel) -> Channel:
    """Adjoint channel: its PTM is the transpose of the input's."""
    return spec.adjoint()


def fidelities_from_probs(p: ProbabilityVector) -> np.ndarray:
    """Walsh-Hadamard transform f = S p over the full canonical Pauli set."""
    _require_full_support(p)
    n = p.support[0].n
    return full_sign_entries(n).astype(float) @ p.probs


def probs_from_fidelities(
    n: int, fidelities: np.ndarray
) -> ProbabilityVector:
    """Inverse transform p = S f / 4^n on the full canonical Pauli set."""
    support = enumerate_paulis(n)
    if len(fidelities) != len(support):
        raise ValueError("fidelity vector must cover the full Pauli set")
    s = full_sign_entries(n).astype(float)
    return ProbabilityVector(tuple(support), (s @ np.asarray(fidelities)) / 4**n)


def _require_full_support(p: ProbabilityVector) -> None:
    if not p.support or not isinstance(p.support[0], PauliString):
        raise ValueError("need a Pauli-string support")
    n = p.support[0].n
    full = enumerate_paulis(n)
    if list(p.support) != full:
        raise ValueError("support must be the full canonical Pauli set")


# single-qubit Cliffords reachable as words in H and S (left-to-right application)
_CLIFFORD_GATES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "I": np.eye(2, dtype=complex),
}


def clifford_unitary(label: str) -> np.ndarray:
    """Matrix of a Clifford word like "H", "S", "HS"; leftmost gate acts last."""
    if not label:
        raise ValueError("empty Clifford label")
    u = np.eye(2, dtype=complex)
    for ch in label:
        if ch not in _CLIFFORD_GATES:
            raise ValueError(f"unsupported Clifford letter {ch!r} (use I, H, S)")
        u = u @ _CLIFFORD_GATES[ch]
    return u


def clifford_conjugated_pauli_probs(
    p: ProbabilityVector, clifford_label: str
) -> ProbabilityVector:
    """Pauli probabilities of W . E_P . W^dagger for a 1-qubit Clifford W.

    Conjugating each error Pauli by W permutes the X/Y/Z axes (signs drop out
    of the channel), so the result is the axis-permuted probability vector.
    """
    _require_full_support(p)
    if p.support[0].n != 1:
        raise ValueError("Clifford permutation check is single-qubit only")
    w = clifford_unitary(clifford_label)
    support = list(p.support)
    out = np.zeros(4)
    for i, s in enumerate(support):
        m = w @ dense.pauli_matrix(s) @ w.conj().T
        for j, t in enumerate(support):
            tm = dense.pauli_matrix(t)
            overlap = np.trace(tm @ m) / 2.0
            if abs(abs(overlap) - 1.0) < 1e-9:
                out[j] += p.probs[i]
                break
        else:
            raise ValueError(f"{clifford_label!r} does not permute the Pauli axes")
    return ProbabilityVector(tuple(support), out)
