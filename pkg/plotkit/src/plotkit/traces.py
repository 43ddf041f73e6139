"""Loading of experiment CSV traces and final channel spec files.

Consumes only the documented text formats: per-seed CSVs named
``<kind>_seed<N>.csv`` with a header row, a ``resolved_config.txt`` sidecar of
``key = value`` lines, and ``final_channel_seed<N>.txt`` channel specs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class SeedTrace:
    seed: int
    header: tuple[str, ...]
    columns: dict  # column name -> list of floats

    def __len__(self) -> int:
        return len(next(iter(self.columns.values())))


@dataclass(frozen=True)
class TraceBundle:
    traces: tuple[SeedTrace, ...]
    metadata: dict  # resolved config echo, possibly empty

    @property
    def header(self) -> tuple[str, ...]:
        return self.traces[0].header

    def loss_column(self) -> str:
        for name in self.header:
            if name.startswith("loss") or name.endswith("loss"):
                return name
        raise ValueError(f"no loss column among {self.header}")


_SEED_RE = re.compile(r"_seed(\d+)\.csv$")


def parse_kv_text(text: str) -> dict:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _read_csv(path: Path) -> tuple[tuple[str, ...], dict]:
    lines = path.read_text().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    header = tuple(lines[0].split(","))
    columns = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            columns[name].append(float(cell))
    return header, columns


def load_bundle(directory, pattern: str = "*_seed*.csv") -> TraceBundle:
    directory = Path(directory)
    traces = []
    for path in sorted(directory.glob(pattern)):
        m = _SEED_RE.search(path.name)
        if m is None:
            continue
        header, columns = _read_csv(path)
        traces.append(SeedTrace(int(m.group(1)), header, columns))
    if not traces:
        raise ValueError(f"no seed CSVs matching {pattern!r} in {directory}")
    headers = {t.header for t in traces}
    if len(headers) != 1:
        raise ValueError("seed CSVs disagree on their header row")
    sidecar = directory / "resolved_config.txt"
    metadata = parse_kv_text(sidecar.read_text()) if sidecar.exists() else {}
    return TraceBundle(tuple(traces), metadata)


def load_final_probs(directory) -> list[dict]:
    """Probability maps (label -> weight) from final channel spec files."""
    directory = Path(directory)
    specs = []
    for path in sorted(directory.glob("final_channel_seed*.txt")):
        kv = parse_kv_text(path.read_text())
        if "probs" not in kv:
            raise ValueError(f"{path} has no probability vector")
        probs = {}
        for item in kv["probs"].split(","):
            item = item.strip()
            if not item:
                continue
            label, _, value = item.rpartition(":")
            probs[label.strip()] = float(value)
        specs.append(probs)
    if not specs:
        raise ValueError(f"no final channel specs in {directory}")
    return specs
