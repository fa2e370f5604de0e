"""Neighbor relations, grid images and connected pixel sets on Z^2.

Coordinates are ``(row, col)`` tuples. A pixel set is a plain ``frozenset`` of
coordinates; it may contain pixels outside the image domain.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

Coord = tuple[int, int]
PixelSet = frozenset
Bounds = tuple[int, int, int, int]  # row0, col0, row1, col1 (half-open)

AXIS_OFFSETS = frozenset({(1, 0), (-1, 0), (0, 1), (0, -1)})
DIAGONAL_OFFSETS = frozenset({(1, 1), (1, -1), (-1, 1), (-1, -1)})


@dataclass(frozen=True)
class Connectivity:
    """Translation-invariant symmetric neighbor relation given by offsets.

    The four axis neighbors are required unless ``require_axes`` is false,
    which is only meant for the one-dimensional line relation.
    """

    offsets: frozenset
    name: str = "custom"
    require_axes: bool = True

    def __post_init__(self):
        offs = frozenset((int(dr), int(dc)) for dr, dc in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if (0, 0) in offs:
            raise ValueError("connectivity offsets must exclude the zero vector")
        missing = [v for v in offs if (-v[0], -v[1]) not in offs]
        if missing:
            raise ValueError(f"connectivity offsets are not symmetric: {sorted(missing)}")
        if self.require_axes and not AXIS_OFFSETS <= offs:
            raise ValueError("connectivity must contain the four axis neighbors")
        if not offs:
            raise ValueError("connectivity needs at least one offset")

    @classmethod
    def four(cls) -> "Connectivity":
        return cls(AXIS_OFFSETS, "4")

    @classmethod
    def eight(cls) -> "Connectivity":
        return cls(AXIS_OFFSETS | DIAGONAL_OFFSETS, "8")

    @classmethod
    def line(cls) -> "Connectivity":
        """Consecutive pixels along a row: the classical sequence setting."""
        return cls(frozenset({(0, 1), (0, -1)}), "line", require_axes=False)

    @classmethod
    def from_name(cls, name) -> "Connectivity":
        key = str(name)
        if key == "4":
            return cls.four()
        if key == "8":
            return cls.eight()
        if key == "line":
            return cls.line()
        raise ValueError(f"unknown connectivity {name!r} (expected 4, 8 or line)")

    @property
    def reach(self) -> int:
        """Largest coordinate displacement of any offset."""
        return max(max(abs(dr), abs(dc)) for dr, dc in self.offsets)

    def sorted_offsets(self) -> list[Coord]:
        return sorted(self.offsets)

    def describe(self):
        """JSON-friendly description (name for built-ins, offset list otherwise)."""
        if self.name in ("4", "8", "line"):
            return self.name
        return [list(v) for v in self.sorted_offsets()]

    @classmethod
    def from_description(cls, desc) -> "Connectivity":
        if isinstance(desc, (list, tuple)):
            return cls(frozenset(tuple(v) for v in desc))
        return cls.from_name(desc)


@dataclass
class GridImage:
    """Integer function on Z^2: explicit values on [0,height)x[0,width), constant elsewhere."""

    values: np.ndarray
    padding: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 2 or vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError(f"values must be a non-empty 2D array, got shape {vals.shape}")
        if not np.issubdtype(vals.dtype, np.integer):
            if not np.all(np.equal(np.mod(vals, 1), 0)):
                raise ValueError("GridImage values must be integers")
        self.values = vals.astype(np.int64, copy=True)
        self.padding = int(self.padding)

    @classmethod
    def from_rows(cls, rows, padding: int = 0) -> "GridImage":
        return cls(np.array(rows, dtype=np.int64), padding)

    @classmethod
    def constant(cls, height: int, width: int, value: int, padding: Optional[int] = None) -> "GridImage":
        pad = value if padding is None else padding
        return cls(np.full((height, width), value, dtype=np.int64), pad)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def in_domain(self, p: Coord) -> bool:
        return 0 <= p[0] < self.height and 0 <= p[1] < self.width

    def at(self, p: Coord) -> int:
        if self.in_domain(p):
            return int(self.values[p])
        return self.padding

    def padded(self, ring: int) -> np.ndarray:
        return np.pad(self.values, ring, mode="constant", constant_values=self.padding)

    def copy(self) -> "GridImage":
        return GridImage(self.values.copy(), self.padding)

    def __neg__(self) -> "GridImage":
        return GridImage(-self.values, -self.padding)

    def __add__(self, other) -> "GridImage":
        if isinstance(other, GridImage):
            self._check_shape(other)
            return GridImage(self.values + other.values, self.padding + other.padding)
        return GridImage(self.values + int(other), self.padding + int(other))

    def __sub__(self, other) -> "GridImage":
        if isinstance(other, GridImage):
            self._check_shape(other)
            return GridImage(self.values - other.values, self.padding - other.padding)
        return GridImage(self.values - int(other), self.padding - int(other))

    def scaled(self, alpha: int) -> "GridImage":
        return GridImage(self.values * int(alpha), self.padding * int(alpha))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridImage):
            return NotImplemented
        return (self.shape == other.shape and self.padding == other.padding
                and bool(np.array_equal(self.values, other.values)))

    def __le__(self, other: "GridImage") -> bool:
        self._check_shape(other)
        return bool(np.all(self.values <= other.values)) and self.padding <= other.padding

    def _check_shape(self, other: "GridImage"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __repr__(self) -> str:
        return f"GridImage({self.values.tolist()!r}, padding={self.padding})"


def domain_bounds(f: GridImage) -> Bounds:
    return (0, 0, f.height, f.width)


def expand(bounds: Bounds, ring: int) -> Bounds:
    r0, c0, r1, c1 = bounds
    return (r0 - ring, c0 - ring, r1 + ring, c1 + ring)


def _inside(p: Coord, bounds: Bounds) -> bool:
    return bounds[0] <= p[0] < bounds[2] and bounds[1] <= p[1] < bounds[3]


def neighbors(x: Coord, conn: Connectivity) -> PixelSet:
    return frozenset((x[0] + dr, x[1] + dc) for dr, dc in conn.offsets)


def is_connected(pixels: Iterable[Coord], conn: Connectivity) -> bool:
    s = set(pixels)
    if len(s) <= 1:
        return True
    start = next(iter(s))
    seen = {start}
    todo = [start]
    while todo:
        r, c = todo.pop()
        for dr, dc in conn.offsets:
            q = (r + dr, c + dc)
            if q in s and q not in seen:
                seen.add(q)
                todo.append(q)
    return len(seen) == len(s)


def boundary(pixels: Iterable[Coord], conn: Connectivity) -> PixelSet:
    """Pixels outside the set with at least one neighbor inside it."""
    s = set(pixels)
    out = set()
    for r, c in s:
        for dr, dc in conn.offsets:
            q = (r + dr, c + dc)
            if q not in s:
                out.add(q)
    return frozenset(out)


def adjacency(pixels: Iterable[Coord], conn: Connectivity) -> PixelSet:
    """adj(V): pixels whose addition keeps the connected set V connected."""
    s = frozenset(pixels)
    if not s:
        raise ValueError("adjacency needs a nonempty set")
    if not is_connected(s, conn):
        raise ValueError("adjacency is only defined for connected sets")
    return boundary(s, conn)


def point_connected_opening(x: Coord, predicate: Callable[[Coord], bool],
                            conn: Connectivity, bounds: Bounds) -> PixelSet:
    """Maximal connected subset of {y : predicate(y)} through x, clipped to ``bounds``."""
    if not _inside(x, bounds) or not predicate(x):
        return frozenset()
    seen = {x}
    todo = deque([x])
    while todo:
        r, c = todo.popleft()
        for dr, dc in conn.offsets:
            q = (r + dr, c + dc)
            if q not in seen and _inside(q, bounds) and predicate(q):
                seen.add(q)
                todo.append(q)
    return frozenset(seen)


def _threshold_component(f: GridImage, x: Coord, t: int, conn: Connectivity,
                         limit: int) -> Optional[set]:
    """Component of {f >= t} through x, or None when it exceeds ``limit`` or reaches padding."""
    seen = {x}
    todo = [x]
    while todo:
        r, c = todo.pop()
        for dr, dc in conn.offsets:
            q = (r + dr, c + dc)
            if q in seen:
                continue
            if not f.in_domain(q):
                if f.padding >= t:
                    return None
                continue
            if f.values[q] >= t:
                seen.add(q)
                if len(seen) > limit:
                    return None
                todo.append(q)
    return seen


def maximal_local_max_set(f: GridImage, x: Coord, n: int, conn: Connectivity) -> Optional[PixelSet]:
    """Largest local maximum set of f containing x with at most n pixels.

    Walks the nested upper threshold components through x from level f(x)
    downwards and stops once a component is larger than n or unbounded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not f.in_domain(x):
        return None
    fx = f.at(x)
    levels = np.unique(f.values[f.values <= fx])[::-1]
    best = None
    for t in levels:
        comp = _threshold_component(f, x, int(t), conn, n)
        if comp is None:
            break
        low = min(int(f.values[p]) for p in comp)
        high_adj = max(f.at(q) for q in boundary(comp, conn))
        if high_adj < low:
            best = frozenset(comp)
    return best


def maximal_local_min_set(f: GridImage, x: Coord, n: int, conn: Connectivity) -> Optional[PixelSet]:
    return maximal_local_max_set(-f, x, n, conn)


def is_local_max_set(f: GridImage, pixels: Iterable[Coord], conn: Connectivity) -> bool:
    s = frozenset(pixels)
    if not s or not is_connected(s, conn):
        return False
    return max(f.at(q) for q in boundary(s, conn)) < min(f.at(p) for p in s)


def is_local_min_set(f: GridImage, pixels: Iterable[Coord], conn: Connectivity) -> bool:
    return is_local_max_set(-f, pixels, conn)


def flat_zones(f: GridImage, conn: Connectivity) -> list[PixelSet]:
    """Maximal constant-valued connected subsets of the domain.

    Zones are clipped to the domain: a zone at the padding value touching the
    border continues into the (infinite) padding region.
    """
    h, w = f.shape
    vals = f.values
    label = np.full((h, w), -1, dtype=np.int64)
    zones = []
    for r in range(h):
        for c in range(w):
            if label[r, c] >= 0:
                continue
            v = vals[r, c]
            comp = point_connected_opening(
                (r, c), lambda q, v=v: vals[q] == v, conn, (0, 0, h, w))
            for p in comp:
                label[p] = len(zones)
            zones.append(comp)
    return zones


def _touches_padding(pixels: Iterable[Coord], f: GridImage, conn: Connectivity) -> bool:
    return any(not f.in_domain(q) for q in boundary(pixels, conn))


def flat_local_max_components(f: GridImage, n: int, conn: Connectivity) -> list[PixelSet]:
    """Flat zones with exactly n pixels that are local maximum sets of f.

    Only meaningful when f has no local maximum set smaller than n; then every
    local maximum set of size n is flat.
    """
    out = []
    for zone in flat_zones(f, conn):
        if len(zone) != n:
            continue
        v = f.at(next(iter(zone)))
        if v == f.padding and _touches_padding(zone, f, conn):
            continue
        if max(f.at(q) for q in boundary(zone, conn)) < v:
            out.append(zone)
    return sorted(out, key=min)


def flat_local_min_components(f: GridImage, n: int, conn: Connectivity) -> list[PixelSet]:
    return flat_local_max_components(-f, n, conn)
