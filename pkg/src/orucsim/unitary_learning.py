"""Unitary-channel learning: contracted steps, their resolution-of-the-identity
variant, and a parameter-shift variational baseline.

The contracted step perturbs the trial channel with infinitesimal unitary
channels generated by anti-Hermitian Pauli sums A (input side) and B (output
side). Coefficient derivatives of x = <<sigma | E | rho>> reduce to commutator
expectations,

    dx/da_k = i Tr sigma E[[sigma_k, rho]],
    dx/db_k = i Tr [sigma, sigma_k] E[rho],

which in exact mode are single PTM entries scaled by the commutator phase.
A descent step composes exp(eta A') onto the input unitary and exp(eta B')
onto the output unitary, with A', B' the residual-weighted gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .channels import Channel, Composition, OrucChannel, PauliChannel, ProbabilityVector, UnitaryChannel
from .dense import GeneratorSet, exp_pauli_sum
from .expectations import (
    CallCounter,
    MeasurementPlan,
    build_measurement_plan,
    expectation_exact,
    expectation_pair_sampled,
    expectation_sampled,
    full_adjacency,
    sample_unitary_pair,
)
from .paulis import PauliString, commutator_string, enumerate_paulis, pauli_index


def default_generators(n: int, max_weight: int = 1) -> tuple[PauliString, ...]:
    """Non-identity Pauli generators up to a locality cutoff (3n when 1-local)."""
    return tuple(
        p for p in enumerate_paulis(n, max_weight=max_weight) if not p.is_identity()
    )


@dataclass(frozen=True)
class UnitaryLearnState:
    """Accumulated outer/inner unitaries plus the generator set and step count."""

    unitary_out: np.ndarray
    unitary_in: np.ndarray
    generators: tuple[PauliString, ...]
    steps: int = 0

    @classmethod
    def identity(
        cls, n: int, generators: Optional[Sequence[PauliString]] = None
    ) -> "UnitaryLearnState":
        if generators is None:
            generators = default_generators(n)
        eye = np.eye(2**n, dtype=complex)
        return cls(eye.copy(), eye.copy(), tuple(generators))

    @property
    def n(self) -> int:
        return self.unitary_out.shape[0].bit_length() - 1

    def trial_channel(self, pauli_probs: ProbabilityVector) -> OrucChannel:
        return OrucChannel(self.unitary_out, pauli_probs, self.unitary_in)


def cql_gradients(
    channel: Channel,
    sigma: PauliString,
    rho: PauliString,
    generators: Sequence[PauliString],
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient gradients of <<sigma|E|rho>> for input (a) and output (b) sides."""
    t = channel.ptm()
    i_sigma = pauli_index(sigma)
    i_rho = pauli_index(rho)
    a_grads = np.zeros(len(generators))
    b_grads = np.zeros(len(generators))
    for k, gen in enumerate(generators):
        comm_in = commutator_string(gen, rho)
        if comm_in is not None:
            c, lam = comm_in
            a_grads[k] = (1j * lam).real * t[i_sigma, pauli_index(c)]
        comm_out = commutator_string(sigma, gen)
        if comm_out is not None:
            c, lam = comm_out
            b_grads[k] = (1j * lam).real * t[pauli_index(c), i_rho]
    return a_grads, b_grads


def _compose_step(
    state: UnitaryLearnState,
    a_coeffs: np.ndarray,
    b_coeffs: np.ndarray,
    eta: float,
) -> UnitaryLearnState:
    u_out, u_in = state.unitary_out, state.unitary_in
    if np.any(a_coeffs != 0.0):
        step_in = exp_pauli_sum(GeneratorSet(state.generators, a_coeffs), eta)
        u_in = u_in @ step_in
    if np.any(b_coeffs != 0.0):
        step_out = exp_pauli_sum(GeneratorSet(state.generators, b_coeffs), eta)
        u_out = step_out @ u_out
    return replace(
        state, unitary_out=u_out, unitary_in=u_in, steps=state.steps + 1
    )


def cql_step(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    sigma: PauliString,
    rho: PauliString,
    eta: float,
    shots: int = 0,
    rng: Optional[np.random.Generator] = None,
    counter: Optional[CallCounter] = None,
) -> UnitaryLearnState:
    """One contracted step on the sampled pair: measure residual, exponentiate."""
    trial = state.trial_channel(pauli_probs)
    if shots == 0:
        y = expectation_exact(target, sigma, rho, counter, "target")
        x = float(trial.ptm()[pauli_index(sigma), pauli_index(rho)])
        if counter is not None:
            counter.add("trial")  # the x measurement
        a_grads, b_grads = cql_gradients(trial, sigma, rho, state.generators)
        if counter is not None:
            counter.add(
                "trial",
                int(np.count_nonzero(a_grads)) + int(np.count_nonzero(b_grads)),
            )
    else:
        y = expectation_pair_sampled(target, sigma, rho, shots, rng, counter, "target")
        x = expectation_pair_sampled(trial, sigma, rho, shots, rng, counter, "trial")
        a_grads, b_grads = _sampled_cql_gradients(
            trial, sigma, rho, state.generators, shots, rng, counter
        )
    residual = y - x
    return _compose_step(state, residual * a_grads, residual * b_grads, eta)


def _sampled_cql_gradients(
    trial: Channel,
    sigma: PauliString,
    rho: PauliString,
    generators: Sequence[PauliString],
    shots: int,
    rng: np.random.Generator,
    counter: Optional[CallCounter],
) -> tuple[np.ndarray, np.ndarray]:
    """Shot-mode gradients: one trial circuit per non-vanishing commutator."""
    a_grads = np.zeros(len(generators))
    b_grads = np.zeros(len(generators))
    for k, gen in enumerate(generators):
        comm_in = commutator_string(gen, rho)
        if comm_in is not None:
            c, lam = comm_in
            est = expectation_pair_sampled(trial, sigma, c, shots, rng, counter, "trial")
            a_grads[k] = (1j * lam).real * est
        comm_out = commutator_string(sigma, gen)
        if comm_out is not None:
            c, lam = comm_out
            est = expectation_pair_sampled(trial, c, rho, shots, rng, counter, "trial")
            b_grads[k] = (1j * lam).real * est
    return a_grads, b_grads


def ri_gradient_deltas(
    sigma: PauliString, rho: PauliString, generators: Sequence[PauliString]
) -> np.ndarray:
    """Trial-side derivatives around the identity channel; zero channel calls.

    d/da_k <<sigma|E_exp(mu A)|rho>> at mu=0 equals i*lam when [sigma_k, rho]
    = lam * sigma, else 0 (and the same value serves the output side).
    """
    deltas = np.zeros(len(generators))
    for k, gen in enumerate(generators):
        comm = commutator_string(gen, rho)
        if comm is not None:
            c, lam = comm
            if c == sigma:
                deltas[k] = (1j * lam).real
    return deltas


def ri_cql_step(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    sigma: PauliString,
    rho: PauliString,
    eta: float,
    shots: int = 0,
    rng: Optional[np.random.Generator] = None,
    counter: Optional[CallCounter] = None,
) -> UnitaryLearnState:
    """Resolution-of-the-identity step: two target calls, classical trial side."""
    n = state.n
    u_adj = UnitaryChannel(state.unitary_out).adjoint()
    v_adj = UnitaryChannel(state.unitary_in).adjoint()
    e_p = PauliChannel(n, pauli_probs)
    target_a = Composition((v_adj, e_p, u_adj, target))
    target_b = Composition((target, v_adj, e_p, u_adj))
    if shots == 0:
        y_a = expectation_exact(target_a, sigma, rho, counter, "target")
        y_b = expectation_exact(target_b, sigma, rho, counter, "target")
    else:
        y_a = expectation_pair_sampled(target_a, sigma, rho, shots, rng, counter, "target")
        y_b = expectation_pair_sampled(target_b, sigma, rho, shots, rng, counter, "target")
    x = 1.0 if sigma == rho else 0.0
    deltas = ri_gradient_deltas(sigma, rho, state.generators)
    return _compose_step(state, (y_a - x) * deltas, (y_b - x) * deltas, eta)


@dataclass(frozen=True)
class StepRecord:
    """Diagnostics from one batched learning step."""

    gradient_norm: float
    residual_norm: float
    pair_count: int


@dataclass(frozen=True)
class CommutatorTable:
    """Precomputed commutator index/weight maps for a generator set.

    For generator k and basis index j: [g_k, sigma_j] = lam * sigma_{c_in[k, j]}
    with weight w_in[k, j] = (i*lam).real (zero when they commute); c_out/w_out
    hold the mirrored [sigma_j, g_k] maps for the output side.
    """

    generators: tuple[PauliString, ...]
    c_in: np.ndarray
    w_in: np.ndarray
    c_out: np.ndarray
    w_out: np.ndarray


_TABLE_CACHE: dict = {}


def commutator_table(n: int, generators: tuple[PauliString, ...]) -> CommutatorTable:
    key = (n, generators)
    cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached
    basis = enumerate_paulis(n)
    dim = len(basis)
    c_in = np.zeros((len(generators), dim), dtype=np.int64)
    w_in = np.zeros((len(generators), dim))
    c_out = np.zeros((len(generators), dim), dtype=np.int64)
    w_out = np.zeros((len(generators), dim))
    for k, gen in enumerate(generators):
        for j, p in enumerate(basis):
            comm = commutator_string(gen, p)
            if comm is not None:
                c, lam = comm
                c_in[k, j] = pauli_index(c)
                w_in[k, j] = (1j * lam).real
            comm = commutator_string(p, gen)
            if comm is not None:
                c, lam = comm
                c_out[k, j] = pauli_index(c)
                w_out[k, j] = (1j * lam).real
    table = CommutatorTable(generators, c_in, w_in, c_out, w_out)
    _TABLE_CACHE[key] = table
    return table


def contracted_direction(
    table: CommutatorTable, trial_ptm: np.ndarray, residual: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Residual-weighted gradient accumulation over a (possibly masked) pair grid.

    residual[i, j] holds y - x for the pair (sigma_i, rho_j), zero for pairs
    outside the batch. Equals summing cql_gradients over every non-zero pair.
    """
    dim = residual.shape[0]
    cols = np.arange(dim)
    m_in = trial_ptm.T @ residual  # (c, rho)
    a = (table.w_in * m_in[table.c_in, cols[None, :]]).sum(axis=1)
    m_out = trial_ptm @ residual.T  # (c, sigma)
    b = (table.w_out * m_out[table.c_out, cols[None, :]]).sum(axis=1)
    return a, b


def gradient_call_count(
    table: CommutatorTable, pairs_mask: np.ndarray
) -> int:
    """Circuit evaluations a hardware CQL gradient would need for this batch."""
    nz_in = (table.w_in != 0).sum(axis=0)  # per rho index
    nz_out = (table.w_out != 0).sum(axis=0)  # per sigma index
    sig_idx, rho_idx = np.nonzero(pairs_mask)
    return int(nz_in[rho_idx].sum() + nz_out[sig_idx].sum())


def _plan_for(
    n: int,
    alpha: PauliString,
    beta: PauliString,
    adjacency,
    max_weight: Optional[int],
) -> MeasurementPlan:
    if max_weight is None:
        max_weight = n
    if adjacency is None:
        adjacency = full_adjacency(n)
    return build_measurement_plan(n, alpha, beta, adjacency, max_weight)


def _pair_values_exact(
    channel: Channel, pairs: Sequence[tuple[PauliString, PauliString]]
) -> dict:
    t = channel.ptm()
    return {p: t[pauli_index(p[0]), pauli_index(p[1])] for p in pairs}


def _masked_residual(
    dim: int, pairs, ys: dict, xs: dict
) -> np.ndarray:
    residual = np.zeros((dim, dim))
    for p in pairs:
        residual[pauli_index(p[0]), pauli_index(p[1])] = ys[p] - xs[p]
    return residual


def _apply_direction(
    state: UnitaryLearnState,
    a_acc: np.ndarray,
    b_acc: np.ndarray,
    eta: float,
    residual_sq: float,
    pair_count: int,
    optimizer: Optional["AdamUpdater"] = None,
) -> tuple[UnitaryLearnState, StepRecord]:
    record = StepRecord(
        gradient_norm=float(np.sqrt(a_acc @ a_acc + b_acc @ b_acc)),
        residual_norm=float(np.sqrt(residual_sq)),
        pair_count=pair_count,
    )
    if optimizer is not None:
        # accumulated direction is minus the loss gradient
        update = -optimizer.step(-np.concatenate([a_acc, b_acc]))
        k = len(a_acc)
        return _compose_step(state, update[:k], update[k:], 1.0), record
    return _compose_step(state, a_acc, b_acc, eta), record


def cql_plan_step(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    alpha: PauliString,
    beta: PauliString,
    eta: float,
    adjacency=None,
    max_weight: Optional[int] = None,
    shots: int = 0,
    rng: Optional[np.random.Generator] = None,
    counter: Optional[CallCounter] = None,
    optimizer: Optional["AdamUpdater"] = None,
) -> tuple[UnitaryLearnState, StepRecord]:
    """Contracted step over the simultaneously-measurable sub-pairs of (alpha, beta).

    One target and one trial invocation cover every admitted pair; gradients
    accumulate residual-weighted commutator terms over the whole batch.
    """
    plan = _plan_for(state.n, alpha, beta, adjacency, max_weight)
    pairs = plan.admitted_pairs()
    trial = state.trial_channel(pauli_probs)
    if shots == 0:
        ys = _pair_values_exact(target, pairs)
        xs = _pair_values_exact(trial, pairs)
        if counter is not None:
            counter.add("target")
            counter.add("trial")
    else:
        y_est = expectation_sampled(target, plan, shots, rng, counter, "target")
        x_est = expectation_sampled(trial, plan, shots, rng, counter, "trial")
        ys = {p: y_est[(p[0].label, p[1].label)] for p in pairs}
        xs = {p: x_est[(p[0].label, p[1].label)] for p in pairs}

    table = commutator_table(state.n, state.generators)
    residual = _masked_residual(4**state.n, pairs, ys, xs)
    if shots == 0:
        a_acc, b_acc = contracted_direction(table, trial.ptm(), residual)
    else:
        a_acc = np.zeros(len(state.generators))
        b_acc = np.zeros(len(state.generators))
        for sigma, rho in pairs:
            a_g, b_g = _sampled_cql_gradients(
                trial, sigma, rho, state.generators, shots, rng, counter
            )
            r = ys[(sigma, rho)] - xs[(sigma, rho)]
            a_acc += r * a_g
            b_acc += r * b_g
    if shots == 0 and counter is not None:
        counter.add("trial", gradient_call_count(table, residual != 0))
    residual_sq = float(np.sum(residual**2))
    return _apply_direction(
        state, a_acc, b_acc, eta, residual_sq, len(pairs), optimizer
    )


def _ri_targets(
    target: Channel, state: UnitaryLearnState, pauli_probs: ProbabilityVector
) -> tuple[Channel, Channel]:
    u_adj = UnitaryChannel(state.unitary_out).adjoint()
    v_adj = UnitaryChannel(state.unitary_in).adjoint()
    e_p = PauliChannel(state.n, pauli_probs)
    return (
        Composition((v_adj, e_p, u_adj, target)),
        Composition((target, v_adj, e_p, u_adj)),
    )


def ri_cql_plan_step(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    alpha: PauliString,
    beta: PauliString,
    eta: float,
    adjacency=None,
    max_weight: Optional[int] = None,
    shots: int = 0,
    rng: Optional[np.random.Generator] = None,
    counter: Optional[CallCounter] = None,
    optimizer: Optional["AdamUpdater"] = None,
) -> tuple[UnitaryLearnState, StepRecord]:
    """RI variant of the batched step: two target calls total, classical trial side."""
    n = state.n
    plan = _plan_for(n, alpha, beta, adjacency, max_weight)
    pairs = plan.admitted_pairs()
    target_a, target_b = _ri_targets(target, state, pauli_probs)
    if shots == 0:
        ya = _pair_values_exact(target_a, pairs)
        yb = _pair_values_exact(target_b, pairs)
        if counter is not None:
            counter.add("target", 2)
    else:
        ya_est = expectation_sampled(target_a, plan, shots, rng, counter, "target")
        yb_est = expectation_sampled(target_b, plan, shots, rng, counter, "target")
        ya = {p: ya_est[(p[0].label, p[1].label)] for p in pairs}
        yb = {p: yb_est[(p[0].label, p[1].label)] for p in pairs}

    xs = {p: 1.0 if p[0] == p[1] else 0.0 for p in pairs}
    dim = 4**n
    table = commutator_table(n, state.generators)
    eye = np.eye(dim)
    res_a = _masked_residual(dim, pairs, ya, xs)
    res_b = _masked_residual(dim, pairs, yb, xs)
    a_acc, _ = contracted_direction(table, eye, res_a)
    _, b_acc = contracted_direction(table, eye, res_b)
    residual_sq = float(np.sum(res_a**2) + np.sum(res_b**2))
    return _apply_direction(
        state, a_acc, b_acc, eta, residual_sq, len(pairs), optimizer
    )


def cql_full_step(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    eta: float,
    counter: Optional[CallCounter] = None,
    method: str = "cql",
    optimizer: Optional["AdamUpdater"] = None,
) -> tuple[UnitaryLearnState, StepRecord]:
    """Deterministic batch over every off-diagonal pair (exact mode only).

    Counted as one sweep invocation per measured channel, like a plan batch.
    """
    n = state.n
    dim = 4**n
    mask = ~np.eye(dim, dtype=bool)
    table = commutator_table(n, state.generators)
    if method == "cql":
        trial = state.trial_channel(pauli_probs)
        residual = (target.ptm() - trial.ptm()) * mask
        if counter is not None:
            counter.add("target")
            counter.add("trial")
            counter.add("trial", gradient_call_count(table, residual != 0))
        a_acc, b_acc = contracted_direction(table, trial.ptm(), residual)
        residual_sq = float(np.sum(residual**2))
    elif method == "ri_cql":
        target_a, target_b = _ri_targets(target, state, pauli_probs)
        eye = np.eye(dim)
        res_a = (target_a.ptm() - eye) * mask
        res_b = (target_b.ptm() - eye) * mask
        if counter is not None:
            counter.add("target", 2)
        a_acc, _ = contracted_direction(table, eye, res_a)
        _, b_acc = contracted_direction(table, eye, res_b)
        residual_sq = float(np.sum(res_a**2) + np.sum(res_b**2))
    else:
        raise ValueError(f"unknown unitary method {method!r}")
    return _apply_direction(
        state, a_acc, b_acc, eta, residual_sq, int(mask.sum()), optimizer
    )


def cql_run(
    target: Channel,
    state: UnitaryLearnState,
    pauli_probs: ProbabilityVector,
    iterations: int,
    eta: float,
    rng: np.random.Generator,
    method: str = "cql",
    adjacency=None,
    max_weight: Optional[int] = None,
    shots: int = 0,
    counter: Optional[CallCounter] = None,
    normalization: str = "none",
    trace: Optional[list] = None,
) -> UnitaryLearnState:
    """Iterate batched contracted steps on freshly sampled measurement frames.

    Trace rows: (iteration, normalized loss, gradient norm, target calls,
    trial calls); the loss is the full off-diagonal PTM residual, a
    deterministic diagnostic in exact mode.
    """
    if method not in ("cql", "ri_cql"):
        raise ValueError(f"unknown unitary method {method!r}")
    step_fn = cql_plan_step if method == "cql" else ri_cql_plan_step
    counter = counter if counter is not None else CallCounter()
    t_target = target.ptm()
    for i in range(iterations):
        alpha, beta = sample_unitary_pair(state.n, rng)
        state, record = step_fn(
            target, state, pauli_probs, alpha, beta, eta,
            adjacency=adjacency, max_weight=max_weight,
            shots=shots, rng=rng, counter=counter,
        )
        if trace is not None:
            loss = pair_loss(state.trial_channel(pauli_probs).ptm(), t_target)
            trace.append(
                (
                    i + 1,
                    normalized_loss(loss, normalization, state.n, len(state.generators)),
                    record.gradient_norm,
                    counter.target_channel_calls,
                    counter.trial_channel_calls,
                )
            )
        if not np.isfinite(record.gradient_norm):
            raise ArithmeticError("gradient diverged")
    return state


def pair_loss(
    trial_ptm: np.ndarray, target_ptm: np.ndarray, pairs: str = "offdiag"
) -> float:
    """Mean squared-residual loss over PTM elements ("offdiag", "diag" or "all")."""
    diff = trial_ptm - target_ptm
    if pairs == "all":
        sq = diff**2
        m = diff.size
    elif pairs == "diag":
        sq = np.diag(diff) ** 2
        m = diff.shape[0]
    elif pairs == "offdiag":
        sq = diff**2 - np.diag(np.diag(diff)) ** 2
        m = diff.size - diff.shape[0]
    else:
        raise ValueError(f"unknown pair set {pairs!r}")
    return 0.5 * float(np.sum(sq)) / m


LOSS_NORMALIZATIONS = ("none", "qubits", "generators")


def normalized_loss(loss: float, mode: str, n: int, n_generators: int) -> float:
    if mode == "none":
        return loss
    if mode == "qubits":
        return loss / n
    if mode == "generators":
        return loss / n_generators
    raise ValueError(f"unknown normalization {mode!r}")


# ---------------------------------------------------------------------------
# Parameterized-circuit baseline (parameter-shift gradients)


@dataclass(frozen=True)
class RotationGate:
    """Single-Pauli rotation exp(-i theta P / 2) on the input or output side."""

    pauli: PauliString
    side: str  # "out" (theta) or "in" (phi)

    def __post_init__(self):
        if self.side not in ("out", "in"):
            raise ValueError("gate side must be 'out' or 'in'")


@dataclass(frozen=True)
class PQCAnsatz:
    gates: tuple[RotationGate, ...]
    params: np.ndarray

    def __post_init__(self):
        if len(self.gates) != len(self.params):
            raise ValueError("one parameter per gate")
        n = self.gates[0].pauli.n
        if len(self.gates) > 2 * 4**n - 2:
            raise ValueError("over-parameterized ansatz (limit 2*4^n - 2)")

    @property
    def n(self) -> int:
        return self.gates[0].pauli.n

    def shifted(self, index: int, delta: float) -> "PQCAnsatz":
        params = self.params.copy()
        params[index] += delta
        return PQCAnsatz(self.gates, params)

    def side_unitary(self, side: str) -> np.ndarray:
        u = np.eye(2**self.n, dtype=complex)
        for gate, theta in zip(self.gates, self.params):
            if gate.side == side:
                rot = exp_pauli_sum(
                    GeneratorSet((gate.pauli,), np.array([-0.5])), theta
                )
                u = rot @ u  # listed order = application order
        return u

    def trial_channel(self, pauli_probs: ProbabilityVector) -> OrucChannel:
        return OrucChannel(
            self.side_unitary("out"), pauli_probs, self.side_unitary("in")
        )


def pqc_expectations(
    ansatz: PQCAnsatz,
    pauli_probs: ProbabilityVector,
    pairs: Sequence[tuple[PauliString, PauliString]],
    counter: Optional[CallCounter] = None,
) -> np.ndarray:
    """Trial expectations for a batch of pairs; one trial call per invocation."""
    if counter is not None:
        counter.add("trial")
    t = ansatz.trial_channel(pauli_probs).ptm()
    return np.array([t[pauli_index(s), pauli_index(r)] for s, r in pairs])


def pqc_gradient(
    ansatz: PQCAnsatz,
    target: Channel,
    pairs: Sequence[tuple[PauliString, PauliString]],
    pauli_probs: ProbabilityVector,
    counter: Optional[CallCounter] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Parameter-shift loss gradient over a batch of observable pairs.

    Returns (gradient, x, y). Costs one trial and one target call for the
    function values plus two trial calls per parameter for the shifts.
    """
    m = len(pairs)
    if counter is not None:
        counter.add("target")
    t_target = target.ptm()
    y = np.array([t_target[pauli_index(s), pauli_index(r)] for s, r in pairs])
    x = pqc_expectations(ansatz, pauli_probs, pairs, counter)
    grad = np.zeros(len(ansatz.params))
    for i in range(len(ansatz.params)):
        x_plus = pqc_expectations(ansatz.shifted(i, np.pi / 2), pauli_probs, pairs, counter)
        x_minus = pqc_expectations(ansatz.shifted(i, -np.pi / 2), pauli_probs, pairs, counter)
        x_prime = (x_plus - x_minus) / 2.0
        grad[i] = float(np.sum((x - y) * x_prime)) / m
    return grad, x, y


def pqc_descent_step(
    ansatz: PQCAnsatz,
    target: Channel,
    pairs: Sequence[tuple[PauliString, PauliString]],
    pauli_probs: ProbabilityVector,
    rate: float,
    counter: Optional[CallCounter] = None,
) -> PQCAnsatz:
    grad, _, _ = pqc_gradient(ansatz, target, pairs, pauli_probs, counter)
    return PQCAnsatz(ansatz.gates, ansatz.params - rate * grad)


class AdamUpdater:
    """Standard ADAM accumulator for coefficient updates."""

    def __init__(self, dim: int, rate: float = 0.01, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.rate = rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(dim)
        self.v = np.zeros(dim)
        self.t = 0

    def step(self, gradient: np.ndarray) -> np.ndarray:
        """Returns the update to *subtract* for the given loss gradient."""
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * gradient
        self.v = self.beta2 * self.v + (1 - self.beta2) * gradient**2
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return self.rate * m_hat / (np.sqrt(v_hat) + self.eps)
