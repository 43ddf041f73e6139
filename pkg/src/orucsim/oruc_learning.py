"""Alternating multi-objective learning of U.P.V channel decompositions.

Each outer round runs a block of unitary sub-steps (contracted or RI variant)
against the raw target, then a block of Pauli sub-steps against the target
conjugated by the current inverse unitaries. Schedules only reorder the same
total work so different modes are comparable at matched call budgets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channels import (
    Channel,
    Composition,
    OrucChannel,
    PauliChannel,
    ProbabilityVector,
    UnitaryChannel,
)
from .dense import channel_distance, pauli_matrix
from .expectations import (
    CallCounter,
    sample_pauli_pair,
    sample_unitary_pair,
)
from .paulis import PauliString, enumerate_paulis, pauli_product
from . import pauli_learning as pl
from . import unitary_learning as ul


@dataclass(frozen=True)
class Schedule:
    """Outer-round plan: K rounds of N_u unitary and N_p Pauli sub-iterations."""

    mode: str = "alternating"  # alternating | pauli_first | unitary_first
    unitary_steps: int = 3
    pauli_steps: int = 1
    rounds: int = 50
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("alternating", "pauli_first", "unitary_first"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.unitary_steps < 0 or self.pauli_steps < 0 or self.rounds < 0:
            raise ValueError("schedule counts must be non-negative")

    @property
    def ratio(self) -> float:
        return self.unitary_steps / max(self.pauli_steps, 1)

    def round_plan(self) -> list[tuple[int, int]]:
        """(unitary, pauli) sub-steps per round; totals identical across modes."""
        k = self.rounds
        if self.mode == "alternating":
            return [(self.unitary_steps, self.pauli_steps)] * k
        if self.mode == "pauli_first":
            return [(0, self.pauli_steps)] * k + [(self.unitary_steps, 0)] * k
        return [(self.unitary_steps, 0)] * k + [(0, self.pauli_steps)] * k


@dataclass
class RoundRecord:
    round: int
    pauli_loss: float
    unitary_loss: float
    channel_distance: float
    target_calls: int


@dataclass
class OrucEstimate:
    """Learned decomposition plus the per-round convergence trace."""

    unitary_out: np.ndarray
    unitary_in: np.ndarray
    pauli: ProbabilityVector
    rounds: list[RoundRecord] = field(default_factory=list)

    @classmethod
    def identity(
        cls, n: int, support: Optional[Sequence[PauliString]] = None
    ) -> "OrucEstimate":
        if support is None:
            support = enumerate_paulis(n)
        eye = np.eye(2**n, dtype=complex)
        return cls(eye.copy(), eye.copy(), ProbabilityVector.point_mass(tuple(support)))

    @property
    def n(self) -> int:
        return self.unitary_out.shape[0].bit_length() - 1

    def channel(self) -> OrucChannel:
        return OrucChannel(self.unitary_out, self.pauli, self.unitary_in)

    @property
    def distance_trace(self) -> list[float]:
        return [r.channel_distance for r in self.rounds]


def transformed_pauli_target(target: Channel, est: OrucEstimate) -> Channel:
    """The target conjugated by inverse estimate unitaries: E_U^-1 . E . E_V^-1."""
    u_inv = UnitaryChannel(est.unitary_out).adjoint()
    v_inv = UnitaryChannel(est.unitary_in).adjoint()
    return Composition((u_inv, target, v_inv))


@dataclass(frozen=True)
class LearnerSettings:
    """Sub-learner configuration shared by all schedules."""

    unitary_method: str = "cql"  # cql | ri_cql
    pauli_method: str = "lstsq"  # rgd | lstsq
    eta_unitary: float = 0.1
    eta_pauli: float = 0.5
    mu: float = 0.5
    pauli_batch: Optional[int] = None  # None = full support
    generator_weight: int = 1
    unitary_batch: str = "plan"  # plan | full
    optimizer: str = "sgd"  # sgd | adam
    adam_rate: float = 0.02
    gauge_fix: bool = True
    shots: int = 0

    def __post_init__(self):
        if self.unitary_method not in ("cql", "ri_cql"):
            raise ValueError(f"unknown unitary method {self.unitary_method!r}")
        if self.pauli_method not in ("rgd", "lstsq"):
            raise ValueError(f"unknown Pauli method {self.pauli_method!r}")
        if self.unitary_batch not in ("plan", "full"):
            raise ValueError(f"unknown unitary batch mode {self.unitary_batch!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.unitary_batch == "full" and self.shots:
            raise ValueError("full-batch unitary steps are exact-mode only")


def absorb_dominant_pauli(est: OrucEstimate) -> OrucEstimate:
    """Re-anchor identity dominance using the local-equivalence gauge freedom.

    If the heaviest probability sits on sigma_max != I, rewrite each term as
    U sigma_i V = (U sigma_max)(sigma_max sigma_i) V: the output unitary absorbs
    sigma_max and probabilities are remapped. Exact for product-closed supports;
    for sparse supports mass landing outside the support is renormalized away
    (the next Pauli fit repairs it). Prevents the heavily-contracted fixed
    points where all unitary gradients vanish.
    """
    probs = est.pauli.probs
    support = list(est.pauli.support)
    k = int(np.argmax(probs))
    if support[k].is_identity():
        return est
    s_max = support[k]
    est.unitary_out = est.unitary_out @ pauli_matrix(s_max)
    index = {s: i for i, s in enumerate(support)}
    remapped = np.zeros(len(support))
    for i, s in enumerate(support):
        j = index.get(pauli_product(s_max, s).pauli)
        if j is not None:
            remapped[j] += probs[i]
    est.pauli = ProbabilityVector(tuple(support), pl.project_simplex(remapped))
    return est


def learn_oruc(
    target: Channel,
    schedule: Schedule,
    rng: np.random.Generator,
    init: Optional[OrucEstimate] = None,
    settings: LearnerSettings = LearnerSettings(),
    counter: Optional[CallCounter] = None,
) -> OrucEstimate:
    """Alternating Pauli / unitary learning loop with per-round diagnostics."""
    n = target.n
    if init is None:
        init = OrucEstimate.identity(n)
    est = OrucEstimate(
        init.unitary_out.copy(), init.unitary_in.copy(), init.pauli, []
    )
    counter = counter if counter is not None else CallCounter()
    generators = ul.default_generators(n, settings.generator_weight)
    target_ptm = target.ptm()
    optimizer = (
        ul.AdamUpdater(2 * len(generators), rate=settings.adam_rate)
        if settings.optimizer == "adam"
        else None
    )

    for round_idx, (n_u, n_p) in enumerate(schedule.round_plan()):
        if n_u > 0:
            ustate = ul.UnitaryLearnState(
                est.unitary_out, est.unitary_in, generators
            )
            for _ in range(n_u):
                if settings.unitary_batch == "full":
                    ustate, _ = ul.cql_full_step(
                        target,
                        ustate,
                        est.pauli,
                        settings.eta_unitary,
                        counter=counter,
                        method=settings.unitary_method,
                        optimizer=optimizer,
                    )
                else:
                    alpha, beta = sample_unitary_pair(n, rng)
                    step_fn = (
                        ul.cql_plan_step
                        if settings.unitary_method == "cql"
                        else ul.ri_cql_plan_step
                    )
                    ustate, _ = step_fn(
                        target,
                        ustate,
                        est.pauli,
                        alpha,
                        beta,
                        settings.eta_unitary,
                        shots=settings.shots,
                        rng=rng,
                        counter=counter,
                        optimizer=optimizer,
                    )
            est.unitary_out = ustate.unitary_out
            est.unitary_in = ustate.unitary_in

        if n_p > 0:
            view = transformed_pauli_target(target, est)
            pstate = pl.PauliLearnState(tuple(est.pauli.support), est.pauli.probs)
            pstate = pl.simplex_rgd_run(
                view,
                pstate,
                updates=n_p,
                eta=settings.eta_pauli,
                rng=rng,
                batch_size=settings.pauli_batch,
                method=settings.pauli_method,
                mu=settings.mu,
                shots=settings.shots,
                counter=counter,
                resample_each_update=False,
            )
            est.pauli = pstate.probability_vector()
            if settings.gauge_fix:
                est = absorb_dominant_pauli(est)

        est_ptm = est.channel().ptm()
        dist = channel_distance(est_ptm, target_ptm)
        est.rounds.append(
            RoundRecord(
                round=round_idx,
                pauli_loss=ul.pair_loss(est_ptm, target_ptm, "diag"),
                unitary_loss=ul.pair_loss(est_ptm, target_ptm, "offdiag"),
                channel_distance=dist,
                target_calls=counter.target_channel_calls,
            )
        )
        if not np.isfinite(dist):
            raise ArithmeticError("channel distance diverged")
        if dist < schedule.epsilon:
            break
    return est


AXIS_PERMUTATIONS = tuple(itertools.permutations(range(3)))


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    permutation: Optional[tuple[int, int, int]]
    max_deviation: float
    channel_distance: float


def locally_equivalent_solutions_check(
    est: OrucEstimate, target: Channel, tolerance: float = 0.05
) -> EquivalenceReport:
    """Is the learned Pauli vector an axis permutation of the target's?

    Single-qubit only: every axis permutation is realized by a Clifford, so a
    permuted match witnesses a locally equivalent decomposition.
    """
    if est.n != 1:
        raise ValueError("local-equivalence check supports n=1 only")
    target_probs = _reference_probs(target)
    est_probs = _full_probs(est.pauli)
    dist = channel_distance(est.channel().ptm(), target.ptm())
    best_perm = None
    best_dev = np.inf
    for perm in AXIS_PERMUTATIONS:
        candidate = np.array(
            [est_probs[0]] + [est_probs[1 + perm[i]] for i in range(3)]
        )
        dev = float(np.max(np.abs(candidate - target_probs)))
        if dev < best_dev:
            best_dev = dev
            best_perm = perm
    return EquivalenceReport(
        equivalent=best_dev <= tolerance,
        permutation=best_perm if best_dev <= tolerance else None,
        max_deviation=best_dev,
        channel_distance=dist,
    )


def _full_probs(p: ProbabilityVector) -> np.ndarray:
    full = enumerate_paulis(p.support[0].n)
    out = np.zeros(len(full))
    index = {s: i for i, s in enumerate(full)}
    for s, val in zip(p.support, p.probs):
        out[index[s]] = val
    return out


def _reference_probs(target: Channel) -> np.ndarray:
    if isinstance(target, OrucChannel):
        return _full_probs(target.pauli_probs)
    if isinstance(target, PauliChannel):
        return _full_probs(target.probs)
    raise ValueError("target has no reference Pauli probability vector")
