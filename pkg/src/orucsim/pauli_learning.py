"""Pauli-channel learning: least-squares inversion and simplex Riemannian descent.

Both learners fit a probability vector p over a Pauli support against measured
fidelities y_a = <<sigma_a | E | sigma_a>>, related by y = S p with S the
symplectic sign matrix. The inversion route projects relaxed solutions back to
the simplex; the Riemannian route follows the Fisher-Rao gradient

    grad L(p) = p . (dL - <p, dL> 1),    dL = S^T (S p - y),

retracted by Euclidean projection. Boundary points are nudged onto the
interior with a small epsilon so the multiplicative update does not pin them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .channels import Channel, ProbabilityVector
from .expectations import CallCounter, expectation_exact, expectation_pair_sampled
from .paulis import PauliString, sign_matrix

EPS_INTERIOR = 1e-8


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    cond = u + (1.0 - css) / idx > 0
    rho = int(np.nonzero(cond)[0][-1])
    lam = (1.0 - css[rho]) / (rho + 1.0)
    return np.maximum(v + lam, 0.0)


def riemannian_grad(p: np.ndarray, euclid_grad: np.ndarray) -> np.ndarray:
    """Fisher-Rao gradient on the simplex: p . (g - <p, g> 1)."""
    p = np.asarray(p, dtype=float)
    g = np.asarray(euclid_grad, dtype=float)
    if p.shape != g.shape:
        raise ValueError("gradient dimension mismatch")
    return p * (g - np.dot(p, g))


@dataclass(frozen=True)
class PauliLearnState:
    """Current simplex point over a fixed Pauli support."""

    support: tuple[PauliString, ...]
    p: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        if len(self.support) != len(self.p):
            raise ValueError("support size must match probability dimension")

    @classmethod
    def uniform(cls, support: Sequence[PauliString]) -> "PauliLearnState":
        d = len(support)
        return cls(tuple(support), np.full(d, 1.0 / d))

    @classmethod
    def point_mass(cls, support: Sequence[PauliString], index: int = 0):
        p = np.zeros(len(support))
        p[index] = 1.0
        return cls(tuple(support), p)

    def probability_vector(self) -> ProbabilityVector:
        return ProbabilityVector(self.support, project_simplex(self.p))


def measure_fidelities(
    target: Channel,
    alphas: Sequence[PauliString],
    shots: int = 0,
    rng: Optional[np.random.Generator] = None,
    counter: Optional[CallCounter] = None,
) -> np.ndarray:
    """y_a = <<a|E|a>> for each row Pauli, exact (shots=0) or shot-sampled."""
    out = np.empty(len(alphas))
    for i, a in enumerate(alphas):
        if shots == 0:
            out[i] = expectation_exact(target, a, a, counter)
        else:
            out[i] = expectation_pair_sampled(target, a, a, shots, rng, counter)
    return out


def slice_sign_matrix(
    rows: Sequence[PauliString], support: Sequence[PauliString]
) -> np.ndarray:
    return sign_matrix(list(rows), list(support)).entries.astype(float)


def lstsq_update(
    state: PauliLearnState,
    y: np.ndarray,
    s_rows: np.ndarray,
    mu: float,
) -> PauliLearnState:
    """p <- Proj((1-mu) p + mu S^+ y); minimum-norm solve for sliced rows."""
    if s_rows.shape != (len(y), len(state.p)):
        raise ValueError("sign-matrix slice shape mismatch")
    solution, *_ = np.linalg.lstsq(s_rows, np.asarray(y, dtype=float), rcond=None)
    p_new = project_simplex((1.0 - mu) * state.p + mu * solution)
    return replace(state, p=p_new, iteration=state.iteration + 1)


def rgd_update(
    state: PauliLearnState,
    y: np.ndarray,
    s_rows: np.ndarray,
    eta: float,
    eps_interior: float = EPS_INTERIOR,
) -> PauliLearnState:
    if s_rows.shape != (len(y), len(state.p)):
        raise ValueError("sign-matrix slice shape mismatch")
    residual = np.asarray(y, dtype=float) - s_rows @ state.p
    euclid = -(s_rows.T @ residual)
    p_eff = np.maximum(state.p, eps_interior)
    step = riemannian_grad(p_eff, euclid)
    p_new = project_simplex(state.p - eta * step)
    return replace(state, p=p_new, iteration=state.iteration + 1)


def batch_loss(p: np.ndarray, y: np.ndarray, s_rows: np.ndarray) -> float:
    r = np.asarray(y) - s_rows @ p
    return 0.5 * float(r @ r)


def simplex_rgd_run(
    target: Channel,
    state: PauliLearnState,
    updates: int,
    eta: float,
    rng: np.random.Generator,
    batch_size: Optional[int] = None,
    method: str = "rgd",
    mu: float = 0.5,
    shots: int = 0,
    counter: Optional[CallCounter] = None,
    resample_each_update: bool = True,
    row_sampler: Optional[Callable[[np.random.Generator], PauliString]] = None,
    trace: Optional[list] = None,
) -> PauliLearnState:
    """Run batched simplex descent (or projected inversion) against a target.

    batch_size=None uses the whole support as one deterministic batch. With an
    integer batch size, rows are drawn by ``row_sampler`` (default: uniform
    over the support) and re-drawn every update unless disabled. The recorded
    loss is the full-support loss in exact mode, otherwise the batch loss.
    """
    support = list(state.support)
    full_s = None
    y_full = None
    if trace is not None and shots == 0:
        full_s = slice_sign_matrix(support, support)
        y_full = measure_fidelities(target, support)  # diagnostic, not counted

    def draw_batch():
        if batch_size is None:
            rows = support
        else:
            if row_sampler is None:
                idx = rng.integers(0, len(support), size=batch_size)
                rows = [support[i] for i in idx]
            else:
                rows = [row_sampler(rng) for _ in range(batch_size)]
        y = measure_fidelities(target, rows, shots, rng, counter)
        return rows, y, slice_sign_matrix(rows, support)

    rows, y, s_rows = draw_batch()
    for _ in range(updates):
        if method == "rgd":
            state = rgd_update(state, y, s_rows, eta)
        elif method == "lstsq":
            state = lstsq_update(state, y, s_rows, mu)
        else:
            raise ValueError(f"unknown Pauli learning method {method!r}")
        if trace is not None:
            if y_full is not None:
                loss = batch_loss(state.p, y_full, full_s)
            else:
                loss = batch_loss(state.p, y, s_rows)
            trace.append((state.iteration, loss, state.p.copy()))
        if resample_each_update:
            rows, y, s_rows = draw_batch()
    return state
