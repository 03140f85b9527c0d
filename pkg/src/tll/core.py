"""Shared geometric and grid primitives.

Coordinate convention: origin at the top-left corner, x grows to the right,
y grows downward, and cell centers sit at integer coordinates.  Grids are
stored row-major, computed in float64 in memory, and serialized as float32.
All value types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

GRID_MAGIC = b"TLLG"
GRID_VERSION = 1
KIND_SCALAR = 0
KIND_VECTOR = 1


@dataclass(frozen=True)
class Point:
    """A 2D location in pixels."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class TopoLine:
    """A pedestrian instance as its top-to-bottom center line with a score."""

    top: Point
    bottom: Point
    score: float = 1.0

    def __post_init__(self):
        if self.bottom.y < self.top.y:
            raise ValueError("topological line must point downward (bottom.y >= top.y)")
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")

    @property
    def length(self) -> float:
        return self.top.distance_to(self.bottom)

    @property
    def midpoint(self) -> Point:
        return Point((self.top.x + self.bottom.x) / 2.0, (self.top.y + self.bottom.y) / 2.0)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box given by center, size, and a detection score."""

    cx: float
    cy: float
    w: float
    h: float
    score: float = 1.0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError("box width and height must be positive")

    @property
    def x0(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def x1(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y0(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def y1(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Annotation:
    """A ground-truth instance: line, occlusion level, and ignore flag."""

    line: TopoLine
    occlusion_fraction: float = 0.0
    ignore: bool = False

    def __post_init__(self):
        if not 0.0 <= self.occlusion_fraction <= 1.0:
            raise ValueError("occlusion_fraction must lie in [0, 1]")


class ScalarGrid:
    """A 2D float field, e.g. one vertex confidence map.

    Wraps a read-only float64 array of shape (height, width).
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("scalar grid needs a 2D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarGrid is immutable")

    @classmethod
    def zeros(cls, width: int, height: int) -> "ScalarGrid":
        return cls(np.zeros((height, width), dtype=np.float64))

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> "ScalarGrid":
        flat = np.asarray(values, dtype=np.float64)
        if flat.size != width * height:
            raise ValueError("values length must equal width*height")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Row-major flat copy of the cell values."""
        return self.data.reshape(-1).copy()

    def allclose(self, other: "ScalarGrid", atol: float = 0.0) -> bool:
        return self.data.shape == other.data.shape and np.allclose(
            self.data, other.data, rtol=0.0, atol=atol
        )


class VectorField:
    """A 2D field of 2-vectors, e.g. the link direction map.

    Wraps a read-only float64 array of shape (height, width, 2) holding
    (vx, vy) per cell.  Link maps keep vector norms <= 1 (+ small epsilon);
    pass check_norm=False for unconstrained fields such as gradients.
    """

    __slots__ = ("data",)

    NORM_EPS = 1e-6

    def __init__(self, data, check_norm: bool = True):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ValueError("vector field needs an array of shape (h, w, 2)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        if check_norm:
            norms = np.sqrt(np.sum(arr * arr, axis=2))
            if norms.size and norms.max() > 1.0 + self.NORM_EPS:
                raise ValueError("vector norms must not exceed 1")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("VectorField is immutable")

    @classmethod
    def zeros(cls, width: int, height: int) -> "VectorField":
        return cls(np.zeros((height, width, 2), dtype=np.float64))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Row-major flat copy of (vx, vy) pairs, shape (w*h, 2)."""
        return self.data.reshape(-1, 2).copy()

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(self.data * self.data, axis=2))

    def allclose(self, other: "VectorField", atol: float = 0.0) -> bool:
        return self.data.shape == other.data.shape and np.allclose(
            self.data, other.data, rtol=0.0, atol=atol
        )


def _bilinear_weights(x: float, y: float, width: int, height: int):
    # Callers guarantee 0 <= x <= width-1 and 0 <= y <= height-1.
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    x0 = min(x0, width - 2) if width > 1 else 0
    y0 = min(y0, height - 2) if height > 1 else 0
    x1 = min(x0 + 1, width - 1)
    y1 = min(y0 + 1, height - 1)
    fx = x - x0
    fy = y - y0
    return (x0, y0, x1, y1, fx, fy)


def sample_bilinear(grid, p: Point):
    """Bilinearly interpolate a ScalarGrid or VectorField at point p.

    Exact cell value at integer coordinates.  Raises ValueError for points
    outside [0, width-1] x [0, height-1].
    """
    w, h = grid.width, grid.height
    if not (0.0 <= p.x <= w - 1 and 0.0 <= p.y <= h - 1):
        raise ValueError("point outside grid")
    x0, y0, x1, y1, fx, fy = _bilinear_weights(p.x, p.y, w, h)
    d = grid.data
    v00 = d[y0, x0]
    v10 = d[y0, x1]
    v01 = d[y1, x0]
    v11 = d[y1, x1]
    top = v00 * (1.0 - fx) + v10 * fx
    bot = v01 * (1.0 - fx) + v11 * fx
    out = top * (1.0 - fy) + bot * fy
    if isinstance(grid, VectorField):
        return np.asarray(out, dtype=np.float64)
    return float(out)


def sample_bilinear_many(grid, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling at arrays of in-bounds coordinates."""
    w, h = grid.width, grid.height
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size and (xs.min() < 0 or xs.max() > w - 1 or ys.min() < 0 or ys.max() > h - 1):
        raise ValueError("point outside grid")
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    np.clip(x0, 0, max(w - 2, 0), out=x0)
    np.clip(y0, 0, max(h - 2, 0), out=y0)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    d = grid.data
    if isinstance(grid, VectorField):
        fx = fx[:, None]
        fy = fy[:, None]
    top = d[y0, x0] * (1.0 - fx) + d[y0, x1] * fx
    bot = d[y1, x0] * (1.0 - fx) + d[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def grid_to_bytes(grid) -> bytes:
    """Serialize a grid to the TLLG binary format (float32, little-endian)."""
    if isinstance(grid, ScalarGrid):
        kind = KIND_SCALAR
    elif isinstance(grid, VectorField):
        kind = KIND_VECTOR
    else:
        raise TypeError("expected ScalarGrid or VectorField")
    header = GRID_MAGIC + struct.pack("<BBII", GRID_VERSION, kind, grid.width, grid.height)
    payload = grid.data.astype("<f4").tobytes()
    return header + payload


def grid_from_bytes(blob: bytes):
    """Decode a TLLG blob back into a ScalarGrid or VectorField."""
    hdr = struct.calcsize("<BBII")
    if len(blob) < len(GRID_MAGIC) + hdr:
        raise ValueError("malformed grid file")
    if blob[: len(GRID_MAGIC)] != GRID_MAGIC:
        raise ValueError("malformed grid file")
    version, kind, width, height = struct.unpack_from("<BBII", blob, len(GRID_MAGIC))
    if version != GRID_VERSION or kind not in (KIND_SCALAR, KIND_VECTOR):
        raise ValueError("malformed grid file")
    ncomp = 1 if kind == KIND_SCALAR else 2
    expected = width * height * ncomp * 4
    payload = blob[len(GRID_MAGIC) + hdr :]
    if len(payload) != expected:
        raise ValueError("malformed grid file")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if kind == KIND_SCALAR:
        return ScalarGrid(values.reshape(height, width))
    return VectorField(values.reshape(height, width, 2))
