"""Flat key-value config and channel-spec text files.

Grammar: one ``key = value`` per line, ``#`` starts a comment, keys are
dotted paths. Channel files use the keys

    kind   = pauli | unitary | oruc | weyl | general_ruc | sparse_multiplicative
    n      = <qubits>            (weyl uses d = <dimension> instead)
    probs  = I:0.6, X:0.05, ...  (weyl keys look like 0-0, 1-2)
    unitary.out / unitary.in / unitary = <unitary spec>
    members = 0.7 haar:3, 0.3 weyl:1-2          (general_ruc)
    factors = XII:0.02, IXI:0.02                (sparse_multiplicative)

A unitary spec is ``identity``, ``haar:<seed>``, ``weyl:<k>-<j>``,
``pauli:<label>`` or a generator map ``X:0.5, Z:-0.25`` meaning
exp(i * sum coeff * sigma). Learned unitaries round-trip through the
generator map via the matrix logarithm.
"""

from __future__ import annotations

import numpy as np

from . import dense
from .channels import (
    Channel,
    GeneralRUC,
    OrucChannel,
    PauliChannel,
    ProbabilityVector,
    SparseMultiplicative,
    UnitaryChannel,
    WeylChannel,
    WeylIndex,
    weyl_matrix,
)
from .dense import GeneratorSet, exp_pauli_sum, haar_unitary, pauli_matrix
from .paulis import PauliString, enumerate_paulis


class ConfigError(ValueError):
    """Malformed config or channel spec; carries the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        if key in out:
            raise ConfigError(key, "duplicate key")
        out[key] = value.strip()
    return out


def dump_kv_text(kv: dict[str, str]) -> str:
    return "".join(f"{k} = {kv[k]}\n" for k in sorted(kv))


def _parse_scalar_map(key: str, value: str) -> list[tuple[str, float]]:
    items = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise ConfigError(key, f"expected 'label:value' items, got {part!r}")
        label, num = part.rsplit(":", 1)
        try:
            items.append((label.strip(), float(num)))
        except ValueError:
            raise ConfigError(key, f"bad number in {part!r}") from None
    if not items:
        raise ConfigError(key, "empty map")
    return items


def format_scalar_map(items) -> str:
    return ", ".join(f"{label}:{value!r}" for label, value in items)


def parse_unitary_spec(key: str, value: str, n: int) -> np.ndarray:
    value = value.strip()
    if value == "identity":
        return np.eye(2**n, dtype=complex)
    if value.startswith("haar:"):
        seed = int(value.split(":", 1)[1])
        return haar_unitary(n, np.random.default_rng(seed))
    if value.startswith("haar_local:"):
        seed = int(value.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        out = np.eye(1, dtype=complex)
        for _ in range(n):
            out = np.kron(out, haar_unitary(1, rng))
        return out
    if value.startswith("weyl:"):
        k, j = value.split(":", 1)[1].split("-")
        return weyl_matrix(WeylIndex(2**n, int(k), int(j)))
    if value.startswith("pauli:"):
        return pauli_matrix(PauliString.from_label(value.split(":", 1)[1]))
    coeffs = _parse_scalar_map(key, value)
    paulis = []
    values = []
    for label, c in coeffs:
        p = PauliString.from_label(label)
        if p.n != n:
            raise ConfigError(key, f"generator {label!r} is not on {n} qubits")
        paulis.append(p)
        values.append(c)
    return exp_pauli_sum(GeneratorSet(tuple(paulis), np.array(values)))


def unitary_to_generator_map(u: np.ndarray) -> list[tuple[str, float]]:
    """Pauli generator coefficients h with exp(i sum h_k sigma_k) = u up to phase."""
    dim = u.shape[0]
    n = dim.bit_length() - 1
    vals, vecs = np.linalg.eig(u)
    phases = np.angle(vals)
    h = (vecs * phases) @ np.linalg.inv(vecs)
    h = (h + h.conj().T) / 2  # clean round-off; log of a unitary is Hermitian
    out = []
    for p in enumerate_paulis(n):
        if p.is_identity():
            continue  # identity component is a global phase
        c = float((np.trace(pauli_matrix(p) @ h) / dim).real)
        if abs(c) > 1e-12:
            out.append((p.label, c))
    if not out:
        out.append(("X" + "I" * (n - 1), 0.0))  # identity: zero-coefficient map
    return out


def _probs_from_map(
    key: str, items: list[tuple[str, float]], n: int
) -> ProbabilityVector:
    support = []
    probs = []
    for label, value in items:
        p = PauliString.from_label(label)
        if p.n != n:
            raise ConfigError(key, f"Pauli {label!r} is not on {n} qubits")
        support.append(p)
        probs.append(value)
    try:
        return ProbabilityVector(tuple(support), np.array(probs))
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def parse_channel(kv: dict[str, str], prefix: str = "") -> Channel:
    def get(name: str, default=None) -> str:
        full = prefix + name
        if full in kv:
            return kv[full]
        if default is not None:
            return default
        raise ConfigError(full, "required key missing")

    kind = get("kind")
    if kind == "weyl":
        d = int(get("d"))
        items = _parse_scalar_map(prefix + "probs", get("probs"))
        support = []
        for label, _ in items:
            try:
                k, j = label.split("-")
                support.append((int(k), int(j)))
            except ValueError:
                raise ConfigError(prefix + "probs", f"bad Weyl index {label!r}") from None
        probs = ProbabilityVector(tuple(support), np.array([v for _, v in items]))
        return WeylChannel(d, probs)

    n = int(get("n"))
    if kind == "pauli":
        items = _parse_scalar_map(prefix + "probs", get("probs"))
        return PauliChannel(n, _probs_from_map(prefix + "probs", items, n))
    if kind == "unitary":
        return UnitaryChannel(parse_unitary_spec(prefix + "unitary", get("unitary"), n))
    if kind == "oruc":
        items = _parse_scalar_map(prefix + "probs", get("probs"))
        return OrucChannel(
            parse_unitary_spec(prefix + "unitary.out", get("unitary.out", "identity"), n),
            _probs_from_map(prefix + "probs", items, n),
            parse_unitary_spec(prefix + "unitary.in", get("unitary.in", "identity"), n),
        )
    if kind == "general_ruc":
        members = []
        for part in get("members").split(","):
            part = part.strip()
            if not part:
                continue
            try:
                weight, spec = part.split(None, 1)
            except ValueError:
                raise ConfigError(prefix + "members", f"expected 'weight spec', got {part!r}") from None
            members.append(
                (float(weight), parse_unitary_spec(prefix + "members", spec, n))
            )
        if not members:
            raise ConfigError(prefix + "members", "empty member list")
        return GeneralRUC(tuple(members))
    if kind == "sparse_multiplicative":
        items = _parse_scalar_map(prefix + "factors", get("factors"))
        factors = []
        for label, q in items:
            p = PauliString.from_label(label)
            if p.n != n:
                raise ConfigError(prefix + "factors", f"{label!r} is not on {n} qubits")
            factors.append((q, p))
        return SparseMultiplicative(n, tuple(factors))
    raise ConfigError(prefix + "kind", f"unknown channel kind {kind!r}")


def channel_to_kv(channel: Channel, prefix: str = "") -> dict[str, str]:
    """Canonical spec text for the channel kinds the CLI writes out."""
    if isinstance(channel, OrucChannel):
        return {
            prefix + "kind": "oruc",
            prefix + "n": str(channel.n),
            prefix + "probs": format_scalar_map(
                [
                    (s.label, float(v))
                    for s, v in zip(channel.pauli_probs.support, channel.pauli_probs.probs)
                ]
            ),
            prefix + "unitary.out": format_scalar_map(
                unitary_to_generator_map(channel.unitary_out)
            ),
            prefix + "unitary.in": format_scalar_map(
                unitary_to_generator_map(channel.unitary_in)
            ),
        }
    if isinstance(channel, PauliChannel):
        return {
            prefix + "kind": "pauli",
            prefix + "n": str(channel.n),
            prefix + "probs": format_scalar_map(
                [(s.label, float(v)) for s, v in zip(channel.probs.support, channel.probs.probs)]
            ),
        }
    if isinstance(channel, UnitaryChannel):
        return {
            prefix + "kind": "unitary",
            prefix + "n": str(channel.n),
            prefix + "unitary": format_scalar_map(
                unitary_to_generator_map(channel.unitary)
            ),
        }
    raise ConfigError(prefix + "kind", f"cannot serialize {type(channel).__name__}")
