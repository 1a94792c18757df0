"""Depth-map container, normalization, profile/point-cloud views and file I/O.

Two on-disk formats are supported:

``pfm-32``
    Greyscale PFM (``Pf`` magic), little-endian, scale field ``-1.0``.
    Rows are stored bottom-to-top as the format prescribes.
``csv-grid``
    One line per pixel row, comma separated decimals, with an optional
    ``# width height`` header line.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantMap, ParseError, RowOutOfRange

FORMATS = ("pfm-32", "csv-grid")


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Immutable H x W grid of relative depth values (larger = farther).

    Values live in memory as float64; the 32-bit precision applies to the
    pfm-32 storage format.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"depth map must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("depth map contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, yx):
        return self.values[yx]

    def __eq__(self, other):
        if not isinstance(other, DepthMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Profile:
    row_index: int
    x: np.ndarray
    z: np.ndarray

    @property
    def samples(self) -> list[tuple[int, float]]:
        return [(int(a), float(b)) for a, b in zip(self.x, self.z)]

    def __len__(self):
        return len(self.x)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N x 3 array of (x, y, z) in row-major pixel order."""

    points: np.ndarray
    width: int = field(default=0)
    height: int = field(default=0)

    def __len__(self):
        return len(self.points)


def normalize(dmap: DepthMap) -> DepthMap:
    """Min-max scale depths to [0, 1]."""
    z = dmap.values
    zmin, zmax = z.min(), z.max()
    if zmax == zmin:
        raise ConstantMap("cannot normalize a constant depth map")
    return DepthMap((z - zmin) / (zmax - zmin))


def extract_profile(dmap: DepthMap, row: int) -> Profile:
    if not 0 <= row < dmap.height:
        raise RowOutOfRange(f"row {row} outside [0, {dmap.height})")
    return Profile(row, np.arange(dmap.width), dmap.values[row].copy())


def to_point_cloud(dmap: DepthMap) -> PointCloud:
    yy, xx = np.mgrid[0:dmap.height, 0:dmap.width]
    pts = np.column_stack([xx.ravel(), yy.ravel(), dmap.values.ravel()]).astype(np.float64)
    return PointCloud(pts, dmap.width, dmap.height)


def from_point_cloud(cloud: PointCloud) -> DepthMap:
    pts = np.asarray(cloud.points)
    xs = pts[:, 0].astype(np.int64)
    ys = pts[:, 1].astype(np.int64)
    width = cloud.width or int(xs.max()) + 1
    height = cloud.height or int(ys.max()) + 1
    z = np.full((height, width), np.nan)
    z[ys, xs] = pts[:, 2]
    return DepthMap(z)


def _infer_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pfm":
        return "pfm-32"
    if ext in (".csv", ".txt"):
        return "csv-grid"
    raise ParseError(f"cannot infer depth-map format from {path!r}")


def write_depth_map(dmap: DepthMap, path, fmt: str | None = None, precision: int = 9) -> None:
    fmt = fmt or _infer_format(path)
    if fmt == "pfm-32":
        _write_pfm(dmap, path)
    elif fmt == "csv-grid":
        _write_csv_grid(dmap, path, precision)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def read_depth_map(path, fmt: str | None = None) -> DepthMap:
    fmt = fmt or _infer_format(path)
    if fmt == "pfm-32":
        return _read_pfm(path)
    if fmt == "csv-grid":
        return _read_csv_grid(path)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def _write_pfm(dmap: DepthMap, path) -> None:
    data = np.flipud(dmap.values).astype("<f4")
    with open(path, "wb") as f:
        f.write(f"Pf\n{dmap.width} {dmap.height}\n-1.0\n".encode("ascii"))
        f.write(data.tobytes())


def _read_pfm(path) -> DepthMap:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"Pf":
            raise ParseError(f"{path}: expected greyscale 'Pf' header, got {magic!r}")
        dims = f.readline().decode("ascii", "replace")
        m = re.fullmatch(r"\s*(\d+)\s+(\d+)\s*", dims)
        if not m:
            raise ParseError(f"{path}: malformed dimension line {dims!r}")
        width, height = int(m.group(1)), int(m.group(2))
        try:
            scale = float(f.readline())
        except ValueError as exc:
            raise ParseError(f"{path}: malformed scale line") from exc
        endian = "<" if scale < 0 else ">"
        buf = f.read()
    count = width * height
    if len(buf) < 4 * count:
        raise ParseError(f"{path}: expected {count} floats, found {len(buf) // 4}")
    data = np.frombuffer(buf[: 4 * count], dtype=endian + "f4").reshape(height, width)
    data = np.flipud(data)
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: non-finite depth values")
    return DepthMap(data.astype(np.float64))


def _write_csv_grid(dmap: DepthMap, path, precision: int) -> None:
    fmt = f"%.{precision}g"
    with open(path, "w", encoding="ascii") as f:
        f.write(f"# {dmap.width} {dmap.height}\n")
        for row in dmap.values:
            f.write(",".join(fmt % v for v in row))
            f.write("\n")


def _read_csv_grid(path) -> DepthMap:
    rows = []
    declared = None
    with open(path, encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) != 2 or rows:
                    raise ParseError(f"{path}: line {lineno}: malformed header {line!r}")
                declared = (int(parts[0]), int(parts[1]))
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ParseError(f"{path}: row {len(rows)} (line {lineno}): {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = declared[0] if declared else len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{path}: row {i} has {len(row)} values, expected {width}")
    if declared and len(rows) != declared[1]:
        raise ParseError(f"{path}: found {len(rows)} rows, header declares {declared[1]}")
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{path}: non-finite depth values")
    return DepthMap(arr)
