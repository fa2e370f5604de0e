"""Slow definitional implementations used to validate the fast operators.

Everything here evaluates the max-min / min-max formulas literally over
enumerated connected sets. Enumeration is exponential, hence the guardrails.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .connectivity import Bounds, Connectivity, Coord, GridImage, PixelSet, expand, is_connected

MAX_N = 6
MAX_PIXELS = 64


class GuardrailError(ValueError):
    pass


@dataclass(frozen=True)
class ConnectedSetFamily:
    base: Coord
    size: int
    members: tuple  # of PixelSet, sorted by their sorted pixel lists

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _check_guardrail(n: int, bounds: Bounds):
    area = (bounds[2] - bounds[0]) * (bounds[3] - bounds[1])
    if n > MAX_N or area > MAX_PIXELS:
        raise GuardrailError(
            f"brute-force enumeration limited to n <= {MAX_N} and domains of at most "
            f"{MAX_PIXELS} pixels (got n={n}, {area} pixels)")


def _inside(p: Coord, b: Bounds) -> bool:
    return b[0] <= p[0] < b[2] and b[1] <= p[1] < b[3]


@lru_cache(maxsize=None)
def _enumerate(x: Coord, size: int, offsets: tuple, region: Bounds) -> tuple:
    # Redelmeier-style growth: every pixel is offered to the untried set at
    # most once per branch, so each connected set is produced exactly once.
    found = []

    def grow(current: list, untried: list, seen: set):
        if len(current) == size:
            found.append(frozenset(current))
            return
        untried = list(untried)
        while untried:
            c = untried.pop()
            fresh = []
            for dr, dc in offsets:
                q = (c[0] + dr, c[1] + dc)
                if q not in seen and _inside(q, region):
                    fresh.append(q)
            current.append(c)
            grow(current, untried + fresh, seen | set(fresh))
            current.pop()

    if _inside(x, region):
        start = [(x[0] + dr, x[1] + dc) for dr, dc in offsets]
        start = [q for q in start if _inside(q, region)]
        grow([x], start, {x, *start})
    found.sort(key=sorted)
    return tuple(found)


def enumerate_connected_sets(x: Coord, size: int, conn: Connectivity, region: Bounds) -> tuple:
    """All connected sets of exactly ``size`` pixels that contain x and lie in ``region``."""
    return _enumerate(x, size, tuple(conn.sorted_offsets()), region)


def count_connected_sets(x: Coord, size: int, conn: Connectivity, region: Bounds) -> int:
    """Independent count by breadth-first growth of frozensets with deduplication."""
    level = {frozenset([x])} if _inside(x, region) else set()
    for _ in range(size - 1):
        nxt = set()
        for s in level:
            for (r, c) in s:
                for dr, dc in conn.offsets:
                    q = (r + dr, c + dc)
                    if q not in s and _inside(q, region):
                        nxt.add(s | {q})
        level = nxt
    return len(level)


def enumerate_Nn(x: Coord, n: int, conn: Connectivity, bounds: Bounds) -> ConnectedSetFamily:
    """N_n(x): connected (n+1)-sets through x within ``bounds`` plus a padding ring.

    The ring is n * reach wide, so no connected (n+1)-set through a pixel of
    ``bounds`` is cut off.
    """
    _check_guardrail(n, bounds)
    region = expand(bounds, n * conn.reach)
    return ConnectedSetFamily(x, n + 1, enumerate_connected_sets(x, n + 1, conn, region))


@lru_cache(maxsize=None)
def _family_index(x: Coord, n: int, conn: Connectivity, bounds: Bounds, ring: int) -> np.ndarray:
    # members of N_n(x) as rows of flat indices into the image padded by ``ring``
    family = enumerate_Nn(x, n, conn, bounds)
    if not len(family):
        raise GuardrailError(f"no connected {n + 1}-sets through {x} in the enumeration region")
    width = bounds[3] - bounds[1] + 2 * ring
    px = np.array([sorted(v) for v in family], dtype=np.int64) + ring
    return px[..., 0] * width + px[..., 1]


def _max_min(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    bounds = (0, 0, f.height, f.width)
    _check_guardrail(n, bounds)
    ring = n * conn.reach
    flat = f.padded(ring).ravel()
    out = np.empty_like(f.values)
    for r in range(f.height):
        for c in range(f.width):
            idx = _family_index((r, c), n, conn, bounds, ring)
            out[r, c] = flat[idx].min(axis=1).max()
    return GridImage(out, f.padding)


def Ln_bruteforce(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    """max over V in N_n(x) of min of f over V, for every domain pixel x."""
    return _max_min(f, n, conn)


def Un_bruteforce(f: GridImage, n: int, conn: Connectivity) -> GridImage:
    """min over V in N_n(x) of max of f over V (the max-min of -f, negated)."""
    return -_max_min(-f, n, conn)


def sequence_Ln(xs, n: int) -> list[int]:
    """Classical L_n of a zero-extended sequence: max over windows of window minima."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = len(xs)
    ext = [0] * n + list(xs) + [0] * n
    out = []
    for i in range(m):
        k = i + n
        out.append(max(min(ext[j:j + n + 1]) for j in range(k - n, k + 1)))
    return out


def sequence_Un(xs, n: int) -> list[int]:
    if n < 1:
        raise ValueError("n must be >= 1")
    m = len(xs)
    ext = [0] * n + list(xs) + [0] * n
    out = []
    for i in range(m):
        k = i + n
        out.append(min(max(ext[j:j + n + 1]) for j in range(k - n, k + 1)))
    return out


def local_extremum_sets_bruteforce(f: GridImage, n: int, conn: Connectivity,
                                   polarity: str = "max") -> list[PixelSet]:
    """Every local maximum (minimum) set of f with at most n pixels, by exhaustion.

    Sets meeting the padding are never local extremum sets (their adjacency
    holds more padding pixels of equal value), so only domain subsets are tried.
    """
    bounds = (0, 0, f.height, f.width)
    _check_guardrail(n, bounds)
    g = f if polarity == "max" else -f
    found = set()
    for r in range(f.height):
        for c in range(f.width):
            for k in range(1, n + 1):
                for v in enumerate_connected_sets((r, c), k, conn, bounds):
                    if v in found:
                        continue
                    adj = {(p[0] + dr, p[1] + dc) for p in v for dr, dc in conn.offsets} - v
                    if max(g.at(q) for q in adj) < min(g.at(p) for p in v):
                        found.add(v)
    return sorted(found, key=sorted)


def check_family(family: ConnectedSetFamily, conn: Connectivity) -> bool:
    return all(family.base in v and len(v) == family.size and is_connected(v, conn)
               for v in family.members) and len(set(family.members)) == len(family.members)
