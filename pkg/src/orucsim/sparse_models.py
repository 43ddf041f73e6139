"""Sparse-model bookkeeping: generator layouts, commuting/anticommuting balance,
and the average-fidelity matching between multiplicative and additive channels.

For a generator set of size d, each member alpha sees N_c(alpha) commuting
members (itself included) and N_a(alpha) anticommuting ones. The averages obey
N_a + N_c = d and Delta = N_c - N_a = d - 2 N_a. Average fidelities:

    multiplicative, uniform qbar:   <f> = (1 - 2 qbar)^N_a
    additive, uniform pbar:         <g> = 1 - 2 N_a pbar

matched when pbar = (1 - exp(lambda N_a)) / (2 N_a), lambda = ln(1 - 2 qbar).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import dense
from .channels import Channel, PauliChannel, SparseMultiplicative
from .paulis import PauliString, enumerate_paulis, symplectic_inner

LAYOUT_KINDS = ("single_site", "nn_pairs", "all_pairs", "triples")


@dataclass(frozen=True)
class Layout:
    kind: str
    n_qubits: int
    generators: tuple[PauliString, ...]


def _windows(kind: str, n: int) -> list[tuple[int, ...]]:
    if kind == "single_site":
        return [(i,) for i in range(n)]
    if kind == "nn_pairs":
        return [(i, i + 1) for i in range(n - 1)]
    if kind == "all_pairs":
        return list(itertools.combinations(range(n), 2))
    if kind == "triples":
        return list(itertools.combinations(range(n), 3))
    raise ValueError(f"unknown layout kind {kind!r}")


def build_layout(kind: str, n: int) -> Layout:
    """Non-identity Paulis supported inside any window, deduplicated."""
    if n < 1:
        raise ValueError("need at least one qubit")
    seen: dict[str, PauliString] = {}
    for window in _windows(kind, n):
        k = len(window)
        for letters in itertools.product("IXYZ", repeat=k):
            if all(ch == "I" for ch in letters):
                continue
            label = ["I"] * n
            for q, ch in zip(window, letters):
                label[q] = ch
            lab = "".join(label)
            if lab not in seen:
                seen[lab] = PauliString.from_label(lab)
    gens = tuple(seen[lab] for lab in sorted(seen))
    return Layout(kind, n, gens)


@dataclass(frozen=True)
class SparseChannelStats:
    d: int
    n_anticommuting: float
    n_commuting: float
    delta: float


def layout_delta(layout: Layout) -> SparseChannelStats:
    """Average commuting/anticommuting balance over the generator set itself."""
    gens = layout.generators
    if not gens:
        raise ValueError("empty layout")
    d = len(gens)
    anti_counts = []
    for a in gens:
        anti = sum(symplectic_inner(a, b) for b in gens)  # self contributes 0
        anti_counts.append(anti)
    n_a = float(np.mean(anti_counts))
    return SparseChannelStats(d, n_a, d - n_a, d - 2.0 * n_a)


def avg_fidelity_multiplicative(qbar: float, n_a: float) -> float:
    if not 0.0 <= qbar <= 0.5:
        raise ValueError("mean factor probability must be in [0, 1/2]")
    return (1.0 - 2.0 * qbar) ** n_a


def avg_fidelity_additive(pbar: float, n_a: float) -> float:
    if pbar < 0.0:
        raise ValueError("mean probability must be non-negative")
    return 1.0 - 2.0 * n_a * pbar


def equivalent_pbar(qbar: float, n_a: float) -> float:
    """Additive mean probability matching a multiplicative model's average fidelity."""
    if not 0.0 <= qbar < 0.5:
        raise ValueError("lambda = ln(1 - 2 qbar) needs qbar in [0, 1/2)")
    if n_a <= 0.0:
        raise ValueError("need a positive anticommuting count")
    lam = np.log1p(-2.0 * qbar)
    return float((1.0 - np.exp(lam * n_a)) / (2.0 * n_a))


@dataclass(frozen=True)
class FeasibilityReport:
    pbar: float
    pbar_cap_na: float  # positivity bound 1 / (2 N_a)
    pbar_cap_d: float  # normalization bound 1 / d
    exp_condition_met: bool  # e^(lambda N_a) >= Delta / d


def feasibility_check(qbar: float, stats: SparseChannelStats) -> FeasibilityReport:
    pbar = equivalent_pbar(qbar, stats.n_anticommuting)
    lam = np.log1p(-2.0 * qbar)
    lhs = float(np.exp(lam * stats.n_anticommuting))
    return FeasibilityReport(
        pbar=pbar,
        pbar_cap_na=1.0 / (2.0 * stats.n_anticommuting),
        pbar_cap_d=1.0 / stats.d,
        exp_condition_met=lhs >= stats.delta / stats.d,
    )


def channel_fidelities(
    spec: Channel, alphas: Sequence[PauliString], mode: str = "symplectic"
) -> np.ndarray:
    """Per-alpha PTM diagonal entries by closed form or dense reconstruction."""
    if mode == "symplectic":
        if isinstance(spec, (PauliChannel, SparseMultiplicative)):
            return np.array([spec.fidelity(a) for a in alphas])
        raise ValueError("closed form needs a Pauli or multiplicative channel")
    if mode == "dense":
        t = dense.ptm_from_apply(spec.n, spec.apply)
        order = {p.label: i for i, p in enumerate(enumerate_paulis(spec.n))}
        return np.array([t[order[a.label], order[a.label]] for a in alphas])
    raise ValueError(f"unknown fidelity mode {mode!r}")


def brute_force_avg_fidelity(
    spec: Channel,
    alphas: Optional[Sequence[PauliString]] = None,
    mode: str = "symplectic",
) -> float:
    """Average fidelity over a Pauli set (default: the channel's own sparse set)."""
    if alphas is None:
        if isinstance(spec, SparseMultiplicative):
            alphas = [s for _, s in spec.factors]
        elif isinstance(spec, PauliChannel):
            alphas = [s for s in spec.probs.support if not s.is_identity()]
        else:
            raise ValueError("no default averaging set for this channel kind")
    return float(np.mean(channel_fidelities(spec, alphas, mode)))


def uniform_multiplicative(layout: Layout, qbar: float) -> SparseMultiplicative:
    return SparseMultiplicative(
        layout.n_qubits, tuple((qbar, s) for s in layout.generators)
    )


def matched_additive(layout: Layout, qbar: float) -> PauliChannel:
    """Additive channel with uniform pbar matched to the multiplicative average."""
    from .channels import ProbabilityVector  # local import avoids cycle at top

    stats = layout_delta(layout)
    pbar = equivalent_pbar(qbar, stats.n_anticommuting)
    d = len(layout.generators)
    p_i = 1.0 - d * pbar
    if p_i < 0.0:
        raise ValueError("matched additive model infeasible: d * pbar > 1")
    support = (PauliString.identity(layout.n_qubits),) + layout.generators
    probs = np.concatenate(([p_i], np.full(d, pbar)))
    return PauliChannel(layout.n_qubits, ProbabilityVector(support, probs))
