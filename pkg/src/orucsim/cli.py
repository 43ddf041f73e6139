"""Command-line experiment runner.

Subcommands: learn-pauli, learn-unitary, learn-oruc, sparse-analysis,
make-channel. Every run reads a flat key-value config (see specfiles), fans
seeds out across worker threads, and writes one CSV trace per seed plus a
sidecar echoing the fully resolved config. Identical config + seed gives
byte-identical output.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dense
from .channels import Channel, ProbabilityVector
from .expectations import CallCounter
from .oruc_learning import LearnerSettings, OrucEstimate, Schedule, learn_oruc
from .pauli_learning import PauliLearnState, simplex_rgd_run
from .paulis import PauliString, enumerate_paulis
from .sparse_models import (
    LAYOUT_KINDS,
    build_layout,
    equivalent_pbar,
    feasibility_check,
    layout_delta,
)
from .specfiles import (
    ConfigError,
    channel_to_kv,
    dump_kv_text,
    parse_channel,
    parse_kv_text,
)
from .unitary_learning import (
    LOSS_NORMALIZATIONS,
    PQCAnsatz,
    RotationGate,
    UnitaryLearnState,
    cql_run,
    default_generators,
    pair_loss,
    pqc_descent_step,
    normalized_loss,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class Config:
    """Resolved config: raw keys plus every consumed default, for the sidecar."""

    def __init__(self, kv: dict[str, str]):
        self.kv = dict(kv)
        self.resolved: dict[str, str] = {}

    def get(self, key: str, default=None, required: bool = False) -> str:
        if key in self.kv:
            value = self.kv[key]
        elif required:
            raise ConfigError(key, "required")
        else:
            value = default
        if value is not None:
            self.resolved[key] = str(value)
        return value

    def get_int(self, key: str, default=None, required: bool = False) -> int:
        value = self.get(key, default, required)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected integer, got {value!r}") from None

    def get_float(self, key: str, default=None, required: bool = False) -> float:
        value = self.get(key, default, required)
        try:
            out = float(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected number, got {value!r}") from None
        if not np.isfinite(out):
            raise ConfigError(key, "must be finite")
        return out

    def get_choice(self, key: str, choices, default=None) -> str:
        value = self.get(key, default)
        if value not in choices:
            raise ConfigError(key, f"expected one of {sorted(choices)}, got {value!r}")
        return value

    def get_list(self, key: str, default=None, required: bool = False) -> list[str]:
        value = self.get(key, default, required)
        items = [s.strip() for s in str(value).split(",") if s.strip()]
        if not items:
            raise ConfigError(key, "empty list")
        return items


def _load_target(cfg: Config) -> Channel:
    path = cfg.get("target.file")
    if path is not None:
        kv = parse_kv_text(Path(path).read_text())
        for k, v in kv.items():
            cfg.resolved[f"target.{k}"] = v
        channel = parse_channel(kv)
    elif not any(k.startswith("target.") for k in cfg.kv):
        raise ConfigError("target.kind", "target.channel required")
    else:
        for k, v in cfg.kv.items():
            if k.startswith("target."):
                cfg.resolved[k] = v
        channel = parse_channel(cfg.kv, prefix="target.")
    limit = cfg.get_int("dense_limit", dense.DENSE_LIMIT)
    if channel.n > limit:
        raise ConfigError("dense_limit", f"target needs {channel.n} qubits > limit {limit}")
    return channel


def _support_from_config(cfg: Config, n: int) -> tuple[PauliString, ...]:
    mode = cfg.get("pauli.support", "full")
    if mode == "full":
        return tuple(enumerate_paulis(n))
    if mode.startswith("weight:"):
        w = int(mode.split(":", 1)[1])
        return tuple(enumerate_paulis(n, max_weight=w))
    raise ConfigError("pauli.support", f"expected 'full' or 'weight:K', got {mode!r}")


def _initial_p(cfg: Config, support, rng: np.random.Generator) -> np.ndarray:
    mode = cfg.get("pauli.init", "uniform")
    d = len(support)
    if mode == "uniform":
        return np.full(d, 1.0 / d)
    if mode == "identity":
        p = np.zeros(d)
        p[0] = 1.0
        return p
    if mode == "random":
        return rng.dirichlet(np.ones(d))
    raise ConfigError("pauli.init", f"expected uniform|identity|random, got {mode!r}")


def write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _out_dir(cfg: Config, override) -> Path:
    out = Path(override if override is not None else cfg.get("out", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seeds(cfg: Config, override) -> list[int]:
    if override is not None:
        cfg.resolved["seeds"] = str(override)
        return [int(override)]
    return [int(s) for s in cfg.get_list("seeds", required=True)]


def _shots(cfg: Config, args) -> int:
    if args.exact:
        cfg.resolved["shots"] = "0"
        return 0
    if args.shots is not None:
        cfg.resolved["shots"] = str(args.shots)
        return int(args.shots)
    shots = cfg.get_int("shots", 0)
    if shots < 0:
        raise ConfigError("shots", "must be >= 0")
    return shots


def _fan_out(seeds: list[int], run_one) -> list[tuple[int, object]]:
    with ThreadPoolExecutor(max_workers=min(4, len(seeds))) as pool:
        results = list(pool.map(run_one, seeds))
    return list(zip(seeds, results))


def cmd_learn_pauli(cfg: Config, args) -> int:
    target = _load_target(cfg)
    shots = _shots(cfg, args)
    seeds = _seeds(cfg, args.seed)
    out = _out_dir(cfg, args.out)
    method = cfg.get_choice("pauli.method", ("rgd", "lstsq"), "rgd")
    eta = cfg.get_float("rates.pauli", 0.5)
    mu = cfg.get_float("pauli.mu", 0.5)
    updates = cfg.get_int("pauli.updates", 500)
    batch = cfg.get("pauli.batch", "full")
    batch_size = None if batch == "full" else int(batch)
    support = _support_from_config(cfg, target.n)

    def run_one(seed: int):
        rng = np.random.default_rng(seed)
        state = PauliLearnState(support, _initial_p(cfg, support, rng))
        trace: list = []
        simplex_rgd_run(
            target,
            state,
            updates=updates,
            eta=eta,
            rng=rng,
            batch_size=batch_size,
            method=method,
            mu=mu,
            shots=shots,
            trace=trace,
        )
        return trace

    header = ["iteration", "loss"] + [f"p_{s.label}" for s in support]
    for seed, trace in _fan_out(seeds, run_one):
        rows = [(it, loss, *p.tolist()) for it, loss, p in trace]
        if rows and not np.isfinite(rows[-1][1]):
            raise ArithmeticError("non-finite loss")
        write_csv(out / f"pauli_seed{seed}.csv", header, rows)
    _write_sidecar(cfg, out)
    return EXIT_OK


def cmd_learn_unitary(cfg: Config, args) -> int:
    target = _load_target(cfg)
    shots = _shots(cfg, args)
    seeds = _seeds(cfg, args.seed)
    out = _out_dir(cfg, args.out)
    method = cfg.get_choice("unitary.method", ("cql", "ri_cql", "pqc"), "cql")
    eta = cfg.get_float("rates.unitary", 0.1)
    iterations = cfg.get_int("unitary.iterations", 300)
    gen_weight = cfg.get_int("unitary.generators", 1)
    normalization = cfg.get_choice("unitary.normalization", LOSS_NORMALIZATIONS, "none")
    n = target.n
    p_identity = ProbabilityVector.point_mass(tuple(enumerate_paulis(n)))
    if method == "pqc" and shots:
        raise ConfigError("unitary.method", "pqc supports exact mode only")

    loss_col = {"none": "loss", "qubits": "loss_per_qubit", "generators": "loss_per_generator"}

    def run_one(seed: int):
        rng = np.random.default_rng(seed)
        trace: list = []
        counter = CallCounter()
        if method == "pqc":
            gens = default_generators(n, 1)
            gates = tuple(
                RotationGate(p, side) for side in ("out", "in") for p in gens
            )
            ansatz = PQCAnsatz(gates, np.zeros(len(gates)))
            t_target = target.ptm()
            full = enumerate_paulis(n)
            pairs = [(s, r) for s in full for r in full if s != r]
            for i in range(iterations):
                ansatz = pqc_descent_step(ansatz, target, pairs, p_identity, eta, counter)
                loss = pair_loss(ansatz.trial_channel(p_identity).ptm(), t_target)
                trace.append(
                    (
                        i + 1,
                        normalized_loss(loss, normalization, n, len(gens)),
                        float("nan"),
                        counter.target_channel_calls,
                        counter.trial_channel_calls,
                    )
                )
        else:
            state = UnitaryLearnState.identity(n, default_generators(n, gen_weight))
            cql_run(
                target,
                state,
                p_identity,
                iterations,
                eta,
                rng,
                method=method,
                shots=shots,
                counter=counter,
                normalization=normalization,
                trace=trace,
            )
        return trace

    header = ["iteration", loss_col[normalization], "gradient_norm", "target_calls", "trial_calls"]
    for seed, trace in _fan_out(seeds, run_one):
        if trace and not np.isfinite(trace[-1][1]):
            raise ArithmeticError("non-finite loss")
        write_csv(out / f"unitary_seed{seed}.csv", header, trace)
    _write_sidecar(cfg, out)
    return EXIT_OK


def cmd_learn_oruc(cfg: Config, args) -> int:
    target = _load_target(cfg)
    shots = _shots(cfg, args)
    seeds = _seeds(cfg, args.seed)
    out = _out_dir(cfg, args.out)
    schedule = Schedule(
        mode=cfg.get_choice(
            "schedule.mode", ("alternating", "pauli_first", "unitary_first"), "alternating"
        ),
        unitary_steps=cfg.get_int("schedule.unitary_steps", 3),
        pauli_steps=cfg.get_int("schedule.pauli_steps", 1),
        rounds=cfg.get_int("schedule.rounds", 50),
        epsilon=cfg.get_float("schedule.epsilon", 1e-4),
    )
    settings = LearnerSettings(
        unitary_method=cfg.get_choice("unitary.method", ("cql", "ri_cql"), "cql"),
        pauli_method=cfg.get_choice("pauli.method", ("rgd", "lstsq"), "lstsq"),
        eta_unitary=cfg.get_float("rates.unitary", 0.1),
        eta_pauli=cfg.get_float("rates.pauli", 0.5),
        mu=cfg.get_float("pauli.mu", 0.5),
        generator_weight=cfg.get_int("unitary.generators", 1),
        unitary_batch=cfg.get_choice("unitary.batch", ("plan", "full"), "plan"),
        optimizer=cfg.get_choice("optimizer", ("sgd", "adam"), "sgd"),
        adam_rate=cfg.get_float("rates.adam", 0.02),
        gauge_fix=cfg.get("oruc.gauge_fix", "true") == "true",
        shots=shots,
    )
    support = _support_from_config(cfg, target.n)

    def run_one(seed: int):
        rng = np.random.default_rng(seed)
        init = OrucEstimate.identity(target.n, support)
        init.pauli = ProbabilityVector(tuple(support), _initial_p(cfg, support, rng))
        counter = CallCounter()
        est = learn_oruc(target, schedule, rng, init=init, settings=settings, counter=counter)
        return est

    header = ["round", "pauli_loss", "unitary_loss", "channel_distance", "target_calls"]
    for seed, est in _fan_out(seeds, run_one):
        rows = [
            (r.round, r.pauli_loss, r.unitary_loss, r.channel_distance, r.target_calls)
            for r in est.rounds
        ]
        if rows and not np.isfinite(rows[-1][3]):
            raise ArithmeticError("non-finite channel distance")
        write_csv(out / f"oruc_seed{seed}.csv", header, rows)
        final_kv = channel_to_kv(est.channel())
        (out / f"final_channel_seed{seed}.txt").write_text(dump_kv_text(final_kv))
    _write_sidecar(cfg, out)
    return EXIT_OK


def cmd_sparse_analysis(cfg: Config, args) -> int:
    out = _out_dir(cfg, args.out)
    kind = cfg.get_choice("layout.kind", LAYOUT_KINDS, "single_site")
    n_values = [int(v) for v in cfg.get_list("layout.n", "4,6,8,10,12")]
    if not n_values:
        raise ConfigError("layout.n", "empty N range")
    qbar_values = [float(v) for v in cfg.get_list("qbar", "0.001,0.004,0.016")]

    delta_rows = []
    for n in n_values:
        layout = build_layout(kind, n)
        stats = layout_delta(layout)
        delta_rows.append((kind, n, stats.d, stats.n_anticommuting, stats.n_commuting, stats.delta))
    write_csv(
        out / "delta_table.csv",
        ["layout", "n", "d", "n_anticommuting", "n_commuting", "delta"],
        delta_rows,
    )

    feas_rows = []
    feas_d = cfg.get_int("feasibility.d", 256)
    na_values = [float(v) for v in cfg.get_list("feasibility.na", "2,4,8,16,32,64,128")]
    for qbar in qbar_values:
        for na in na_values:
            pbar = equivalent_pbar(qbar, na)
            lam_ok = (1 - 2 * qbar) ** na >= (feas_d - 2 * na) / feas_d
            feas_rows.append(
                (qbar, na, pbar, 1.0 / (2 * na), 1.0 / feas_d, pbar <= 1.0 / feas_d, lam_ok)
            )
    write_csv(
        out / "feasibility.csv",
        ["qbar", "n_anticommuting", "pbar", "cap_na", "cap_d", "pbar_within_cap_d", "exp_condition_met"],
        feas_rows,
    )
    _write_sidecar(cfg, out)
    return EXIT_OK


def cmd_make_channel(cfg: Config, args) -> int:
    target = _load_target(cfg)
    out = _out_dir(cfg, args.out)
    name = cfg.get("name", "channel")
    try:
        kv = channel_to_kv(target)
    except ConfigError:
        kv = {k[len("target."):]: v for k, v in cfg.resolved.items() if k.startswith("target.")}
    (out / f"{name}.txt").write_text(dump_kv_text(kv))
    _write_sidecar(cfg, out)
    return EXIT_OK


def _write_sidecar(cfg: Config, out: Path) -> None:
    (out / "resolved_config.txt").write_text(dump_kv_text(cfg.resolved))


COMMANDS = {
    "learn-pauli": cmd_learn_pauli,
    "learn-unitary": cmd_learn_unitary,
    "learn-oruc": cmd_learn_oruc,
    "sparse-analysis": cmd_sparse_analysis,
    "make-channel": cmd_make_channel,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orucsim", description="Random unitary channel learning experiments"
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to key-value config file")
    parser.add_argument("--seed", type=int, default=None, help="override the seeds list")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--shots", type=int, default=None, help="shot-sampled mode")
    parser.add_argument("--exact", action="store_true", help="force exact expectations")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = Config(parse_kv_text(text))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
