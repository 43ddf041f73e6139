"""PTM-element evaluation, exact or from simulated shots.

Exact mode evaluates (1/2^n) Tr[sigma_a E[sigma_b]] directly. Shot mode
follows the eigenstate-preparation scheme: a full-weight Pauli pair fixes one
input-preparation and one measurement Clifford frame per qubit, every
computational bitstring is prepared and measured, and PTM elements of all
commuting sub-Paulis are reconstructed from the outcome histogram

    <<s_o | E | r_i>> = sum_{k,j} (1/2^n) p(j|k) s_i(k) s_o(j).
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .channels import Channel
from .dense import bit_sign_mask, check_dense_limit, pauli_matrix, parity_sign
from .paulis import PauliString, symplectic_inner


@dataclass
class CallCounter:
    """Quantum-call ledger; one evaluation invocation = one call on its channel."""

    target_channel_calls: int = 0
    trial_channel_calls: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def add(self, role: str, count: int = 1) -> None:
        if count < 0:
            raise ValueError("call counts only increase")
        with self._lock:
            if role == "target":
                self.target_channel_calls += count
            elif role == "trial":
                self.trial_channel_calls += count
            else:
                raise ValueError(f"unknown channel role {role!r}")


def expectation_exact(
    channel: Channel,
    sigma: PauliString,
    rho: PauliString,
    counter: Optional[CallCounter] = None,
    role: str = "target",
) -> float:
    """<<sigma | E | rho>> with unit-norm Pauli input rho = sigma_rho / 2^n."""
    if sigma.n != rho.n or sigma.n != channel.n:
        raise ValueError("qubit counts disagree")
    check_dense_limit(sigma.n)
    if counter is not None:
        counter.add(role)
    dim = 2**sigma.n
    out = channel.apply(pauli_matrix(rho))
    val = np.trace(pauli_matrix(sigma) @ out) / dim
    if abs(val.imag) > 1e-9:
        raise ValueError("expectation has a non-real value; channel not CPTP?")
    return float(val.real)


def pauli_input_decomposition(sigma: PauliString) -> list[tuple[int, int]]:
    """Write an I/Z-only Pauli as a signed sum of computational basis states.

    Returns 2^n terms (sign, bitstring) with sign = (-1)^(k . z(sigma)), so
    sum_k sign_k |k><k| equals the Pauli matrix exactly.
    """
    if sigma.x_bits != 0:
        raise ValueError("input decomposition needs an I/Z-only Pauli")
    mask = bit_sign_mask(sigma)
    return [(parity_sign(k, mask), k) for k in range(2**sigma.n)]


# Clifford frames taking Z to each letter (prep) and each letter to Z (meas)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_PREP_1Q = {"X": _H, "Y": _S @ _H, "Z": np.eye(2, dtype=complex)}
_MEAS_1Q = {"X": _H, "Y": _H @ _S.conj().T, "Z": np.eye(2, dtype=complex)}


def _frame(letters: str, table: dict) -> np.ndarray:
    return reduce(np.kron, (table[ch] for ch in letters))


def line_adjacency(n: int) -> tuple[tuple[int, int], ...]:
    """Nearest-neighbor chain graph edges."""
    return tuple((i, i + 1) for i in range(n - 1))


def _neighbors(n: int, adjacency) -> list[set]:
    nb = [set() for _ in range(n)]
    for a, b in adjacency:
        nb[a].add(b)
        nb[b].add(a)
    return nb


def _is_connected(qubits: tuple[int, ...], nb: list[set]) -> bool:
    if len(qubits) <= 1:
        return True
    todo = {qubits[0]}
    seen = set()
    rest = set(qubits)
    while todo:
        q = todo.pop()
        seen.add(q)
        todo |= (nb[q] & rest) - seen
    return seen == rest


@dataclass(frozen=True)
class MeasurementPlan:
    """One prepared/measured frame and the sub-Pauli pairs it reconstructs."""

    n: int
    alpha: PauliString  # full-weight output string
    beta: PauliString  # full-weight input string
    out_paulis: tuple[PauliString, ...]
    in_paulis: tuple[PauliString, ...]
    connectivity_mask: np.ndarray  # bool, out x in
    input_states: tuple[int, ...]

    def admitted_pairs(self) -> list[tuple[PauliString, PauliString]]:
        return [
            (o, i)
            for a, o in enumerate(self.out_paulis)
            for b, i in enumerate(self.in_paulis)
            if self.connectivity_mask[a, b]
        ]

    def measurement_frame(self) -> np.ndarray:
        return _frame(self.alpha.label, _MEAS_1Q)

    def preparation_frame(self) -> np.ndarray:
        return _frame(self.beta.label, _PREP_1Q)


def build_measurement_plan(
    n: int,
    alpha: PauliString,
    beta: PauliString,
    adjacency: Optional[Sequence[tuple[int, int]]] = None,
    max_weight: int = 2,
) -> MeasurementPlan:
    """Candidate sub-Pauli pairs of (alpha, beta) under a locality relation.

    Candidates are restrictions of the full strings to connected qubit sets of
    size <= max_weight; a pair is admitted when the union of its supports is
    still connected and no larger than max_weight.
    """
    if alpha.n != n or beta.n != n:
        raise ValueError("qubit counts disagree")
    if alpha.weight != n or beta.weight != n:
        raise ValueError("plan strings must have no identity letters")
    if adjacency is None:
        adjacency = line_adjacency(n)
    nb = _neighbors(n, adjacency)

    subsets = [
        s
        for w in range(1, max_weight + 1)
        for s in itertools.combinations(range(n), w)
        if _is_connected(s, nb)
    ]
    out_paulis = tuple(alpha.restrict(s) for s in subsets)
    in_paulis = tuple(beta.restrict(s) for s in subsets)

    mask = np.zeros((len(subsets), len(subsets)), dtype=bool)
    for a, sa in enumerate(subsets):
        for b, sb in enumerate(subsets):
            union = tuple(sorted(set(sa) | set(sb)))
            mask[a, b] = len(union) <= max_weight and _is_connected(union, nb)

    return MeasurementPlan(
        n=n,
        alpha=alpha,
        beta=beta,
        out_paulis=out_paulis,
        in_paulis=in_paulis,
        connectivity_mask=mask,
        input_states=tuple(range(2**n)),
    )


def split_shots(shots_total: int, cells: int) -> list[int]:
    """Even split with the remainder handed to the earliest cells."""
    base, extra = divmod(shots_total, cells)
    return [base + (1 if i < extra else 0) for i in range(cells)]


def expectation_sampled(
    channel: Channel,
    plan: MeasurementPlan,
    shots_total: int,
    rng: np.random.Generator,
    counter: Optional[CallCounter] = None,
    role: str = "target",
) -> dict[tuple[str, str], float]:
    """Shot-sampled estimates for every admitted pair of the plan."""
    n_states = len(plan.input_states)
    if shots_total < n_states:
        raise ValueError(
            f"{shots_total} shots cannot cover {n_states} input states"
        )
    if counter is not None:
        counter.add(role)
    dim = 2**plan.n
    prep = plan.preparation_frame()
    meas = plan.measurement_frame()
    shots = split_shots(shots_total, n_states)

    # empirical conditional outcome distributions p(j | k)
    phat = np.zeros((n_states, dim))
    for k, nsh in zip(plan.input_states, shots):
        rho_k = np.outer(prep[:, k], prep[:, k].conj())
        out = channel.apply(rho_k)
        probs = np.clip(np.diag(meas @ out @ meas.conj().T).real, 0.0, None)
        probs /= probs.sum()
        if nsh > 0:
            phat[k] = rng.multinomial(nsh, probs) / nsh

    estimates: dict[tuple[str, str], float] = {}
    for o, i in plan.admitted_pairs():
        in_mask = bit_sign_mask(_z_form(i))
        out_mask = bit_sign_mask(_z_form(o))
        total = 0.0
        for k in plan.input_states:
            s_in = parity_sign(k, in_mask)
            m_k = sum(
                phat[k, j] * parity_sign(j, out_mask) for j in range(dim)
            )
            total += s_in * m_k
        estimates[(o.label, i.label)] = total / dim
    return estimates


def _z_form(p: PauliString) -> PauliString:
    """The I/Z pattern a sub-Pauli takes in its measurement/preparation frame."""
    bits = p.x_bits | p.z_bits
    return PauliString(p.n, 0, bits)


def expectation_pair_sampled(
    channel: Channel,
    sigma: PauliString,
    rho: PauliString,
    shots_total: int,
    rng: np.random.Generator,
    counter: Optional[CallCounter] = None,
    role: str = "target",
) -> float:
    """Shot-sampled estimate of a single PTM element.

    Identity letters are completed to full-weight frame strings; they carry no
    reconstruction sign, so any filler letter works (including the all-identity
    string, whose estimate reduces to the trace average).
    """
    if sigma.n != rho.n or sigma.n != channel.n:
        raise ValueError("qubit counts disagree")
    n = sigma.n
    n_states = 2**n
    if shots_total < n_states:
        raise ValueError(f"{shots_total} shots cannot cover {n_states} input states")
    if counter is not None:
        counter.add(role)
    prep = _frame(_complete(rho).label, _PREP_1Q)
    meas = _frame(_complete(sigma).label, _MEAS_1Q)
    in_mask = bit_sign_mask(_z_form(rho))
    out_mask = bit_sign_mask(_z_form(sigma))
    shots = split_shots(shots_total, n_states)
    signs_out = np.array([parity_sign(j, out_mask) for j in range(n_states)])
    total = 0.0
    for k, nsh in enumerate(shots):
        rho_k = np.outer(prep[:, k], prep[:, k].conj())
        out = channel.apply(rho_k)
        probs = np.clip(np.diag(meas @ out @ meas.conj().T).real, 0.0, None)
        probs /= probs.sum()
        phat = rng.multinomial(nsh, probs) / nsh if nsh > 0 else probs * 0.0
        total += parity_sign(k, in_mask) * float(phat @ signs_out)
    return total / n_states


def full_adjacency(n: int) -> tuple[tuple[int, int], ...]:
    """All-to-all connectivity (no pairs filtered)."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def _complete(p: PauliString) -> PauliString:
    letters = [ch if ch != "I" else "Z" for ch in p.label]
    return PauliString.from_label("".join(letters))


def sample_pauli_pair(
    n: int, rng: np.random.Generator
) -> tuple[PauliString, PauliString]:
    """Full-weight pair with matching strings (Pauli-learning convention)."""
    letters = "".join(rng.choice(list("XYZ")) for _ in range(n))
    p = PauliString.from_label(letters)
    return p, p


def sample_unitary_pair(
    n: int, rng: np.random.Generator
) -> tuple[PauliString, PauliString]:
    """Full-weight anticommuting pair for unitary learning.

    Letters differ per qubit; when n is even one uniformly chosen qubit keeps
    equal letters so the strings anticommute globally (commuting pairs have
    identically zero contracted gradients at any PTM-diagonal trial point).
    """
    a_letters = []
    b_letters = []
    same_site = rng.integers(0, n) if n % 2 == 0 else -1
    for q in range(n):
        if q == same_site:
            a = b = rng.choice(list("XYZ"))
        else:
            a, b = rng.choice(list("XYZ"), size=2, replace=False)
        a_letters.append(a)
        b_letters.append(b)
    assert symplectic_inner(
        PauliString.from_label("".join(a_letters)),
        PauliString.from_label("".join(b_letters)),
    )
    return (
        PauliString.from_label("".join(a_letters)),
        PauliString.from_label("".join(b_letters)),
    )
