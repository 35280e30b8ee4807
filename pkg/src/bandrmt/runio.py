"""Run manifests and checksummed output files.

Every run writes its manifest before any result file; each result file ends
with a terminal checksum line `# sha256=<hex>` over all preceding bytes, so
partially written outputs are detectable.  Manifests embed the fully
resolved configuration and can be re-run to reproduce every result file
bit-exactly (same seeds, single-threaded mode).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: Path, columns, rows, comment: str | None = None) -> str:
    """Write a CSV with an optional leading comment, a header row, and a
    terminal checksum line.  Returns the checksum hex digest."""
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"# {part}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    body = ("\n".join(lines) + "\n").encode()
    digest = hashlib.sha256(body).hexdigest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(f"# sha256={digest}\n".encode())
    return digest


def write_values(path: Path, values, comment: str | None = None) -> str:
    """Plain-text dump, one value per line, with a terminal checksum line."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.extend(repr(float(v)) for v in values)
    body = ("\n".join(lines) + "\n").encode()
    digest = hashlib.sha256(body).hexdigest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(f"# sha256={digest}\n".encode())
    return digest


def verify_checksum(path: Path) -> bool:
    """Check the terminal checksum line of an output file."""
    raw = Path(path).read_bytes()
    head, _, last = raw.rstrip(b"\n").rpartition(b"\n")
    if not last.startswith(b"# sha256="):
        return False
    return hashlib.sha256(head + b"\n").hexdigest() == last[len(b"# sha256="):].decode()


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int
    replicas: int | None
    threads: int
    status: str = "running"
    error: str | None = None
    outputs: dict = field(default_factory=dict)
    wall_time_s: float | None = None
    versions: dict = field(default_factory=lambda: {
        "bandrmt": "0.1.0",
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    })
    started_unix: float = field(default_factory=time.time)

    def save(self, path: Path) -> None:
        payload = {
            "subcommand": self.subcommand,
            "config": self.config,
            "seed": self.seed,
            "replicas": self.replicas,
            "threads": self.threads,
            "status": self.status,
            "error": self.error,
            "outputs": self.outputs,
            "wall_time_s": self.wall_time_s,
            "versions": self.versions,
            "started_unix": self.started_unix,
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path: Path) -> dict:
        return json.loads(Path(path).read_text())
