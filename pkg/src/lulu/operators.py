"""The LULU smoothers L_n, U_n and their compositions on grid images.

``L_n(f)(x)`` is the largest level t whose upper threshold component
through x holds more than n pixels, i.e. an area opening with area n + 1.
The production path computes it with a union-find over pixels sorted by
decreasing value; :func:`apply_Ln_walk` is a slower per-pixel version built
on :func:`maximal_local_max_set`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .connectivity import (
    Connectivity,
    GridImage,
    PixelSet,
    boundary,
    maximal_local_max_set,
)


class Op(str, enum.Enum):
    Ln = "ln"
    Un = "un"
    LnUn = "lnun"  # L_n after U_n
    UnLn = "unln"  # U_n after L_n


@dataclass(frozen=True)
class OperatorKind:
    op: Op
    n: int

    def __post_init__(self):
        object.__setattr__(self, "op", Op(self.op))
        if self.n < 1:
            raise ValueError(f"operator size must be >= 1, got {self.n}")

    def __str__(self) -> str:
        return {Op.Ln: "L{n}", Op.Un: "U{n}", Op.LnUn: "L{n}U{n}", Op.UnLn: "U{n}L{n}"}[self.op].format(n=self.n)


def _find(parent: list, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def area_open(f: GridImage, area: int, conn: Connectivity) -> GridImage:
    """Grayscale area opening: flatten upper level components smaller than ``area``.

    Pixels outside the domain belong to an infinite level set, so a ring of
    padding pixels of width ``conn.reach`` is given unlimited area.
    """
    ring = conn.reach
    vals = f.padded(ring)
    ph, pw = vals.shape
    flat = vals.ravel().tolist()
    size = ph * pw
    big = size + area + 1

    interior = np.zeros((ph, pw), dtype=bool)
    interior[ring:ph - ring, ring:pw - ring] = True
    interior = interior.ravel().tolist()

    offsets = [dr * pw + dc for dr, dc in conn.sorted_offsets()]
    offsets_rc = conn.sorted_offsets()

    # stable descending order: ties keep raster order
    order = np.argsort(-vals.ravel(), kind="stable").tolist()
    parent = list(range(size))
    areas = [1 if interior[p] else big for p in range(size)]
    done = [False] * size

    for p in order:
        r, c = divmod(p, pw)
        fp = flat[p]
        for (dr, dc), off in zip(offsets_rc, offsets):
            rr, cc = r + dr, c + dc
            if rr < 0 or rr >= ph or cc < 0 or cc >= pw:
                continue
            q = p + off
            if not done[q]:
                continue
            rq = _find(parent, q)
            if rq == p:
                continue
            if flat[rq] == fp or areas[rq] < area:
                areas[p] += areas[rq]
                parent[rq] = p
            else:
                areas[p] = max(areas[p], area)
        done[p] = True

    out = [0] * size
    for p in reversed(order):
        q = parent[p]
        out[p] = flat[p] if q == p else out[q]
    res = np.array(out, dtype=np.int64).reshape(ph, pw)
    return GridImage(res[ring:ph - ring, ring:pw - ring], f.padding)


def apply_Ln(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    if n < 1:
        raise ValueError("n must be >= 1")
    return area_open(f, n + 1, conn)


def apply_Un(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    return -apply_Ln(-f, n, conn)


def apply(kind: OperatorKind, f: GridImage, conn: Connectivity) -> GridImage:
    n = kind.n
    if kind.op is Op.Ln:
        return apply_Ln(f, n, conn)
    if kind.op is Op.Un:
        return apply_Un(f, n, conn)
    if kind.op is Op.LnUn:
        return apply_Ln(apply_Un(f, n, conn), n, conn)
    return apply_Un(apply_Ln(f, n, conn), n, conn)


def apply_Ln_walk(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    """L_n by lowering each pixel of its largest small local maximum set."""
    out = f.values.copy()
    for r in range(f.height):
        for c in range(f.width):
            v = maximal_local_max_set(f, (r, c), n, conn)
            if v is not None:
                out[r, c] = max(f.at(q) for q in boundary(v, conn))
    return GridImage(out, f.padding)


def apply_Un_walk(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    return -apply_Ln_walk(-f, n, conn)


def find_local_extremum_set(f: GridImage, n: int, conn: Connectivity,
                            polarity: str = "max") -> Optional[PixelSet]:
    """Some local maximum (``polarity='max'``) or minimum set with at most n pixels, if any.

    Any such set contains a strict upper (lower) threshold component of size
    <= n, and L_n lowers exactly those pixels, so comparing with L_n finds one.
    """
    if polarity not in ("max", "min"):
        raise ValueError("polarity must be 'max' or 'min'")
    g = f if polarity == "max" else -f
    lowered = apply_Ln(g, n, conn)
    hits = np.argwhere(lowered.values < g.values)
    if len(hits) == 0:
        return None
    x = tuple(int(v) for v in hits[0])
    return maximal_local_max_set(g, x, n, conn)


def has_local_extremum_set_up_to(f: GridImage, n: int, conn: Connectivity,
                                 polarity: str = "max") -> bool:
    if n < 1:
        return False
    return find_local_extremum_set(f, n, conn, polarity) is not None

