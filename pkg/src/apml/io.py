"""Point-cloud file formats.

``xyz``
    ASCII, one point per line, whitespace-separated coordinates. Lines whose
    first non-blank character is ``#`` and blank lines are skipped. The
    dimension is taken from the first point line.
``bin``
    Little-endian binary: magic ``b"PSET"``, ``u32`` version (1), ``u32`` n,
    ``u32`` d, then ``n * d`` float32 values in row-major order.
"""

from __future__ import annotations

import enum
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, FormatError, ParseError
from .geometry import PointSet, as_points

__all__ = ["PointCloudFormat", "load_pointcloud", "save_pointcloud", "infer_format"]

MAGIC = b"PSET"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


class PointCloudFormat(str, enum.Enum):
    ASCII_XYZ = "xyz"
    BINARY_F32 = "bin"


_SUFFIXES = {".xyz": PointCloudFormat.ASCII_XYZ, ".txt": PointCloudFormat.ASCII_XYZ,
             ".pts": PointCloudFormat.ASCII_XYZ, ".bin": PointCloudFormat.BINARY_F32,
             ".pset": PointCloudFormat.BINARY_F32}


def infer_format(path) -> PointCloudFormat:
    suffix = Path(path).suffix.lower()
    try:
        return _SUFFIXES[suffix]
    except KeyError:
        raise FormatError(f"cannot infer point-cloud format from suffix {suffix!r}") from None


def _resolve(path, fmt):
    if fmt is None or fmt == "auto":
        return infer_format(path)
    return PointCloudFormat(fmt)


def _load_ascii(path):
    rows = []
    d = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values = [float(tok) for tok in stripped.split()]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if d is None:
                d = len(values)
            elif len(values) != d:
                raise DimensionMismatch(f"line {lineno}: expected {d} coordinates, found {len(values)}")
            rows.append(values)
    return PointSet(np.array(rows, dtype=np.float64).reshape(len(rows), d or 0))


def _load_binary(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError("file too short for header")
    magic, version, n, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    expected = _HEADER.size + 4 * n * d
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes for n={n}, d={d}, found {len(data)}")
    pts = np.frombuffer(data, dtype="<f4", count=n * d, offset=_HEADER.size).reshape(n, d)
    return PointSet(pts.astype(np.float64))


def load_pointcloud(path, fmt=None) -> PointSet:
    fmt = _resolve(path, fmt)
    if fmt is PointCloudFormat.ASCII_XYZ:
        return _load_ascii(path)
    return _load_binary(path)


def _encode(points, fmt):
    if fmt is PointCloudFormat.ASCII_XYZ:
        lines = (" ".join(f"{v:.9g}" for v in row) for row in points)
        return ("\n".join(lines) + "\n").encode("utf-8")
    n, d = points.shape
    body = np.ascontiguousarray(points, dtype="<f4").tobytes()
    return _HEADER.pack(MAGIC, VERSION, n, d) + body


def save_pointcloud(points, path, fmt=None) -> None:
    """Write a point set, replacing ``path`` atomically."""
    if not str(path):
        raise FileNotFoundError("empty output path")
    pts = as_points(points).points  # rejects empty sets before anything is written
    fmt = _resolve(path, fmt)
    payload = _encode(pts, fmt)
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent if str(target.parent) else ".", prefix=".tmp-", suffix=target.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
