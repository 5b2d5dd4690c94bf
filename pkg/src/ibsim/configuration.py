"""Finite particle configurations: windows of an infinite point set.

A configuration stores an ordered list of points in R^d together with a
per-point frozen flag (exterior particles that never move) and the radius of
the window the free particles live in.  All operations here are pure; the
arrays are treated as immutable after construction.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "Configuration",
    "LabeledConfig",
    "label_by_modulus",
    "restrict",
    "write_configuration_csv",
    "read_configuration_csv",
]


def _as_points(points, dim=None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        # a flat list of 1-d points
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise InvalidParameterError(f"points must be (n, d), got shape {pts.shape}")
    if dim is not None and pts.shape[0] and pts.shape[1] != dim:
        raise InvalidParameterError(f"expected dimension {dim}, got {pts.shape[1]}")
    if pts.size and not np.all(np.isfinite(pts)):
        raise InvalidParameterError("point coordinates must be finite")
    return pts


@dataclass(frozen=True)
class Configuration:
    """A finite multiset of points with a frozen-exterior annotation.

    ``window_radius`` is the radius of the ball that non-frozen points must
    lie in; 0 means unbounded.  Duplicate points are allowed in storage (the
    min-gap diagnostic flags them).
    """

    points: np.ndarray
    frozen: np.ndarray = None  # type: ignore[assignment]
    window_radius: float = 0.0

    def __post_init__(self):
        pts = _as_points(self.points)
        object.__setattr__(self, "points", pts)
        if self.frozen is None:
            frz = np.zeros(len(pts), dtype=bool)
        else:
            frz = np.asarray(self.frozen, dtype=bool)
            if frz.shape != (len(pts),):
                raise InvalidParameterError("frozen mask length must match points")
        object.__setattr__(self, "frozen", frz)
        radius = float(self.window_radius)
        if radius < 0:
            raise InvalidParameterError("window_radius must be >= 0")
        object.__setattr__(self, "window_radius", radius)
        if radius > 0 and len(pts):
            moduli = np.linalg.norm(pts[~frz], axis=1)
            if moduli.size and moduli.max() > radius * (1 + 1e-12):
                raise InvalidParameterError(
                    "non-frozen points must lie inside the window radius"
                )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1] if self.points.size else 0

    @property
    def free_points(self) -> np.ndarray:
        return self.points[~self.frozen]

    @property
    def frozen_points(self) -> np.ndarray:
        return self.points[self.frozen]

    def moduli(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)


@dataclass(frozen=True)
class LabeledConfig:
    """Particles carrying stable 1-based integer labels.

    Produced by :func:`label_by_modulus`, in which case position ``i`` holds
    label ``i + 1`` and moduli are nondecreasing along the list.
    """

    points: np.ndarray
    labels: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        pts = _as_points(self.points)
        object.__setattr__(self, "points", pts)
        if self.labels is None:
            lbl = np.arange(1, len(pts) + 1, dtype=int)
        else:
            lbl = np.asarray(self.labels, dtype=int)
            if lbl.shape != (len(pts),):
                raise InvalidParameterError("labels length must match points")
            if len(lbl) and sorted(lbl) != list(range(1, len(lbl) + 1)):
                raise InvalidParameterError("labels must be a bijection onto 1..n")
        object.__setattr__(self, "labels", lbl)

    def __len__(self) -> int:
        return len(self.points)

    def unlabel(self) -> Configuration:
        """Forget labels; inverse of labelling up to multiset equality."""
        return Configuration(self.points.copy())


def label_by_modulus(config: Configuration) -> LabeledConfig:
    """Order particles by increasing modulus, ties broken lexicographically.

    An empty configuration yields an empty labelled configuration.
    """
    pts = config.points
    if not len(pts):
        return LabeledConfig(pts.reshape(0, max(config.dim, 1)))
    return LabeledConfig(pts[modulus_order(pts)])


def modulus_order(points: np.ndarray) -> np.ndarray:
    """Index array sorting raw points by modulus then lexicographically."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if not len(pts):
        return np.empty(0, dtype=int)
    moduli = np.linalg.norm(pts, axis=1)
    keys = tuple(pts[:, c] for c in reversed(range(pts.shape[1]))) + (moduli,)
    return np.lexsort(keys)


def restrict(config: Configuration, radius: float, complement: bool = False) -> Configuration:
    """Points with modulus <= radius (or > radius when ``complement``).

    The two halves reassemble the input exactly as a multiset.  The inner
    part keeps ``radius`` as its window; the complement is unbounded.
    """
    if radius <= 0:
        raise InvalidParameterError("restriction radius must be > 0")
    moduli = config.moduli()
    keep = moduli > radius if complement else moduli <= radius
    window = 0.0 if complement else float(radius)
    frozen = config.frozen[keep]
    pts = config.points[keep]
    if not complement and len(pts):
        return Configuration(pts, frozen, window)
    return Configuration(pts, frozen, 0.0)


_CSV_FLOAT_FMT = "%.17g"


def write_configuration_csv(config: Configuration, path_or_buf) -> None:
    """CSV with header ``label,frozen,x1..xd``; labels follow storage order."""
    dim = config.dim if len(config) else 1
    header = ["label", "frozen"] + [f"x{c + 1}" for c in range(dim)]

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, (pt, frz) in enumerate(zip(config.points, config.frozen)):
            row = [i + 1, int(frz)] + [_CSV_FLOAT_FMT % v for v in pt]
            writer.writerow(row)

    if hasattr(path_or_buf, "write"):
        _write(path_or_buf)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)


def read_configuration_csv(path_or_buf, window_radius: float = 0.0) -> Configuration:
    """Inverse of :func:`write_configuration_csv`. Header row is mandatory."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, "r", encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "label" or header[1] != "frozen":
        raise InvalidParameterError("configuration CSV must start with label,frozen,x1..")
    dim = len(header) - 2
    pts, frz = [], []
    for row in reader:
        if not row:
            continue
        frz.append(bool(int(row[1])))
        pts.append([float(v) for v in row[2 : 2 + dim]])
    points = np.asarray(pts, dtype=float).reshape(-1, dim)
    return Configuration(points, np.asarray(frz, dtype=bool), window_radius)
