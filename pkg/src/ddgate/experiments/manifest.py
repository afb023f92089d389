"""Run manifests and CSV output with provenance headers."""
from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def config_hash(config: dict, version: str) -> str:
    """Stable digest of the resolved configuration and tool version.

    The output directory is excluded: it does not affect any result.
    """
    cfg = {k: v for k, v in config.items() if k != "out"}
    blob = json.dumps({"config": _jsonable(cfg), "version": version}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Table:
    columns: Sequence[str]
    rows: list[Sequence[Any]]
    description: str = ""

    def column(self, name: str) -> np.ndarray:
        j = list(self.columns).index(name)
        return np.array([r[j] for r in self.rows])


@dataclass
class RunManifest:
    scenario: str
    version: str
    config: dict
    seed: int
    convergence: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    wall_time: float = 0.0
    outputs: list[str] = field(default_factory=list)
    status: str = "ok"

    @property
    def hash(self) -> str:
        return config_hash(self.config, self.version)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "manifest_hash": self.hash,
                "scenario": self.scenario,
                "tool_version": self.version,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "seed": self.seed,
                "status": self.status,
                "config": self.config,
                "convergence": self.convergence,
                "summary": self.summary,
                "wall_time_s": self.wall_time,
                "outputs": self.outputs,
            }
        )

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.scenario}_manifest.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n", encoding="utf-8")
        return path


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_table(path: Path, table: Table, manifest_hash: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# manifest: {manifest_hash}"]
    if table.description:
        lines.append(f"# {table.description}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in table.rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse(x: str) -> Any:
    if x in ("true", "false"):
        return x == "true"
    try:
        return float(x)
    except ValueError:
        return x


def read_table(path: Path) -> tuple[str, Table]:
    """Return (manifest hash, table) from a written CSV; numbers come back as floats."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    mhash, notes, body = "", [], []
    for line in text:
        if line.startswith("# manifest:"):
            mhash = line.split(":", 1)[1].strip()
        elif line.startswith("#"):
            notes.append(line[1:].strip())
        elif line:
            body.append(line)
    cols = body[0].split(",")
    rows = [[_parse(x) for x in r.split(",")] for r in body[1:]]
    return mhash, Table(cols, rows, " ".join(notes))
