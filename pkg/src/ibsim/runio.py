"""Run-directory layout, manifests and CSV serialisation of runs.

Every command writes into ``output_dir/<run-id>/``:

* ``manifest.json``  -- resolved configuration, seeds, RNG family, code
  version, scheme/model description and the list of data files; a run is
  reproducible from its manifest alone.
* ``config.toml``    -- byte-for-byte copy of the input configuration file
  (when one was used).
* data CSVs          -- one per sampled configuration or simulated path.
* ``report.json`` / ``report.md`` -- diagnostics output (verify commands).
"""

from __future__ import annotations

import csv
import io
import json
import subprocess
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .configuration import Configuration, write_configuration_csv
from .dynamics import PathRecord
from .errors import InvalidParameterError

__all__ = [
    "code_version",
    "write_manifest",
    "read_manifest",
    "write_path_csv",
    "read_path_csv",
    "run_directory",
]

RNG_FAMILY = "philox"
MANIFEST_SCHEMA = 1


def code_version() -> str:
    """git describe of the working tree, falling back to the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"ibsim-{__version__}"


def run_directory(output_dir, run_id: str) -> Path:
    path = Path(output_dir) / run_id
    path.mkdir(parents=True, exist_ok=True)
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_manifest(run_dir, payload: dict) -> Path:
    path = Path(run_dir) / "manifest.json"
    body = {
        "schema": MANIFEST_SCHEMA,
        "rng": RNG_FAMILY,
        "code_version": code_version(),
        **_jsonable(payload),
    }
    path.write_text(json.dumps(body, indent=2, sort_keys=True), encoding="utf-8")
    return path


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise InvalidParameterError(f"no manifest.json under {run_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


_FLOAT_FMT = "%.17g"


def write_path_csv(record: PathRecord, path_or_buf) -> None:
    """Long-format CSV: one row per (time, particle)."""
    dim = record.dim
    header = ["time", "label", "frozen"] + [f"x{c + 1}" for c in range(dim)] + ["local_time"]

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t, labels, pts, frz, lt in zip(
            record.times, record.labels, record.points, record.frozen, record.local_time
        ):
            for lab, pt, fz, l in zip(labels, pts, frz, lt):
                row = [_FLOAT_FMT % t, int(lab), int(fz)]
                row += [_FLOAT_FMT % v for v in pt]
                row.append(_FLOAT_FMT % l)
                writer.writerow(row)

    if hasattr(path_or_buf, "write"):
        _write(path_or_buf)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


def read_path_csv(path_or_buf, meta: dict | None = None) -> PathRecord:
    """Inverse of :func:`write_path_csv` (events/final state live in the manifest)."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        text = Path(path_or_buf).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "time" or header[-1] != "local_time":
        raise InvalidParameterError("path CSV must carry time,label,frozen,x..,local_time")
    dim = len(header) - 4
    frames: dict[float, list] = {}
    order: list[float] = []
    for row in reader:
        if not row:
            continue
        t = float(row[0])
        if t not in frames:
            frames[t] = []
            order.append(t)
        frames[t].append(
            (int(row[1]), bool(int(row[2])), [float(v) for v in row[3 : 3 + dim]], float(row[-1]))
        )
    times, labels, points, frozen, local_time = [], [], [], [], []
    for t in order:
        rows = frames[t]
        times.append(t)
        labels.append(np.array([r[0] for r in rows], dtype=int))
        frozen.append(np.array([r[1] for r in rows], dtype=bool))
        points.append(np.array([r[2] for r in rows], dtype=float).reshape(len(rows), dim))
        local_time.append(np.array([r[3] for r in rows], dtype=float))
    events = [tuple(e) for e in (meta or {}).get("events", [])]
    events = [(float(t), str(kind), int(lab)) for t, kind, lab in events]
    return PathRecord(
        times=np.asarray(times),
        labels=labels,
        points=points,
        frozen=frozen,
        local_time=local_time,
        events=events,
        meta=dict(meta or {}),
    )


def save_run(run_dir, records: list[PathRecord], manifest_extra: dict) -> Path:
    """Write per-replica path CSVs plus the run manifest."""
    run_dir = Path(run_dir)
    files = []
    all_events = {}
    for i, rec in enumerate(records):
        name = f"path_{i:04d}.csv"
        write_path_csv(rec, run_dir / name)
        files.append(name)
        if rec.events:
            all_events[name] = [[float(t), kind, int(lab)] for t, kind, lab in rec.events]
    payload = {
        "kind": "simulate",
        "files": files,
        "events": all_events,
        **manifest_extra,
    }
    return write_manifest(run_dir, payload)


def load_run(run_dir) -> tuple[list[PathRecord], dict]:
    """Read every path CSV of a run directory, attaching manifest metadata."""
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    records = []
    for name in manifest.get("files", []):
        meta = {
            "scheme": manifest.get("scheme"),
            "model": manifest.get("model"),
            "events": manifest.get("events", {}).get(name, []),
        }
        records.append(read_path_csv(run_dir / name, meta))
    return records, manifest


def save_samples(run_dir, samples: list[Configuration], manifest_extra: dict) -> Path:
    run_dir = Path(run_dir)
    files = []
    for i, cfg in enumerate(samples):
        name = f"sample_{i:04d}.csv"
        write_configuration_csv(cfg, run_dir / name)
        files.append(name)
    payload = {"kind": "sample", "files": files, **manifest_extra}
    return write_manifest(run_dir, payload)


def load_samples(run_dir) -> tuple[list[Configuration], dict]:
    from .configuration import read_configuration_csv

    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    window = float(manifest.get("window_radius", 0.0) or 0.0)
    samples = [
        read_configuration_csv(run_dir / name, window_radius=window)
        for name in manifest.get("files", [])
    ]
    return samples, manifest
