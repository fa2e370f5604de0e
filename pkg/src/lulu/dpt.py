"""Discrete pulse transform: f = sum of pulses + constant via F_n = U_n o L_n o F_{n-1}.

The fast path works on the graph of flat zones. Once F_{n-1}(f) has no local
extremum set smaller than n, the local maximum sets of size n are exactly the
flat zones of n pixels above all their neighbors, so L_n lowers each of them
to its highest neighbor and merges it with the neighbors at that level. U_n
then does the same for flat minima. :func:`dpt_decompose_reference` runs the
same iteration on whole images with the area-opening operators.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .connectivity import (
    Connectivity,
    GridImage,
    PixelSet,
    flat_local_max_components,
    flat_local_min_components,
    is_connected,
)
from .operators import apply_Ln, apply_Un, find_local_extremum_set


class Sequencing(str, enum.Enum):
    UL = "ul"  # U_n after L_n
    LU = "lu"  # L_n after U_n


class PreconditionError(ValueError):
    pass


@dataclass(eq=False)
class Pulse:
    """Constant ``amplitude`` on a connected support, zero elsewhere.

    ``pixels`` is an (k, 2) int array of (row, col) in lexicographic order.
    """

    pixels: np.ndarray
    amplitude: int
    layer: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((px[:, 1], px[:, 0]))
        self.pixels = px[order]
        self.amplitude = int(self.amplitude)
        if self.layer == 0:
            self.layer = len(self.pixels)

    @property
    def size(self) -> int:
        return len(self.pixels)

    @property
    def support(self) -> PixelSet:
        return frozenset(map(tuple, self.pixels.tolist()))

    @property
    def first_pixel(self) -> tuple[int, int]:
        return tuple(int(v) for v in self.pixels[0])

    def flat_index(self, width: int) -> np.ndarray:
        return self.pixels[:, 0] * width + self.pixels[:, 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pulse):
            return NotImplemented
        return (self.amplitude == other.amplitude and self.layer == other.layer
                and np.array_equal(self.pixels, other.pixels))

    def __repr__(self) -> str:
        return f"Pulse(layer={self.layer}, amplitude={self.amplitude}, pixels={self.pixels.tolist()})"


@dataclass
class DptDecomposition:
    connectivity: Connectivity
    height: int
    width: int
    layers: dict = field(default_factory=dict)  # size -> list[Pulse]
    residual: int = 0
    residual_image: Optional[GridImage] = None  # F_m(f) when truncated
    complete: bool = True
    meta: dict = field(default_factory=dict)

    def pulses(self) -> Iterable[Pulse]:
        for n in sorted(self.layers):
            yield from self.layers[n]

    @property
    def num_pulses(self) -> int:
        return sum(len(v) for v in self.layers.values())

    def add(self, pulse: Pulse):
        self.layers.setdefault(pulse.layer, []).append(pulse)

    def canonicalize(self):
        """Drop empty layers; order pulses by first pixel within each layer."""
        self.layers = {n: sorted(ps, key=lambda p: p.first_pixel)
                       for n, ps in sorted(self.layers.items()) if ps}
        return self


def _merge_zones(a: int, b: int, nbrs: list, members: list, size: list, alive: list,
                 buckets: dict, pad: int) -> int:
    """Fuse zones a and b (equal values); returns the surviving id."""
    if a == pad or (b != pad and size[a] > size[b]):
        a, b = b, a
    # a is absorbed into b
    for z in (a, b):
        if z != pad:
            buckets.get(size[z], set()).discard(z)
    for c in nbrs[a]:
        nb = nbrs[c]
        nb.discard(a)
        if c != b:
            nb.add(b)
            nbrs[b].add(c)
    nbrs[b].discard(a)
    nbrs[a] = set()
    alive[a] = False
    if b != pad:
        members[b].extend(members[a])
        size[b] += size[a]
        buckets.setdefault(size[b], set()).add(b)
    members[a] = None
    return b


def _zone_graph(f: GridImage, conn: Connectivity):
    h, w = f.shape
    vals = f.values
    idx = np.arange(h * w).reshape(h, w)
    src, dst, touches_pad = [], [], np.zeros((h, w), dtype=bool)
    for dr, dc in conn.sorted_offsets():
        r0, r1 = max(0, -dr), min(h, h - dr)
        c0, c1 = max(0, -dc), min(w, w - dc)
        # pixels whose neighbor in this direction lies outside the domain
        outside = np.ones((h, w), dtype=bool)
        if r0 < r1 and c0 < c1:
            outside[r0:r1, c0:c1] = False
            src.append(idx[r0:r1, c0:c1].ravel())
            dst.append(idx[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel())
        touches_pad |= outside
    src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    flatv = vals.ravel()
    same = flatv[src] == flatv[dst]
    graph = coo_matrix((np.ones(int(same.sum()), dtype=np.int8), (src[same], dst[same])),
                       shape=(h * w, h * w))
    nz, label = connected_components(graph, directed=False)
    return label, nz, src[~same], dst[~same], touches_pad.ravel()


def dpt_decompose(f: GridImage, conn: Optional[Connectivity] = None, max_n: Optional[int] = None,
                  sequencing: Sequencing = Sequencing.UL) -> DptDecomposition:
    """Full (or, with ``max_n``, truncated) discrete pulse decomposition of f."""
    conn = conn or Connectivity.four()
    sequencing = Sequencing(sequencing)
    h, w = f.shape
    npx = h * w
    label, nz, esrc, edst, touches_pad = _zone_graph(f, conn)
    flatv = f.values.ravel()
    p = f.padding

    pad = nz
    value = [0] * (nz + 1)
    first = np.full(nz, -1)
    first[label[::-1]] = np.arange(npx)[::-1]
    for z, v in enumerate(flatv[first].tolist()):
        value[z] = v
    value[pad] = p
    order = np.argsort(label, kind="stable")
    counts = np.bincount(label, minlength=nz)
    splits = np.cumsum(counts)[:-1]
    members = [m.tolist() for m in np.split(order, splits)] + [None]
    size = counts.tolist() + [math.inf]
    alive = [True] * (nz + 1)
    nbrs = [set() for _ in range(nz + 1)]

    la, lb = label[esrc], label[edst]
    pairs = np.unique(np.stack([la, lb], axis=1), axis=0) if len(la) else np.zeros((0, 2), dtype=np.int64)
    for a, b in pairs.tolist():
        nbrs[a].add(b)
    for z in np.unique(label[touches_pad]).tolist():
        nbrs[z].add(pad)
        nbrs[pad].add(z)

    buckets: dict = {}
    for z in range(nz):
        buckets.setdefault(size[z], set()).add(z)
    # zones at the padding level that reach outside are part of the padding zone
    for z in list(nbrs[pad]):
        if value[z] == p:
            _merge_zones(z, pad, nbrs, members, size, alive, buckets, pad)

    d = DptDecomposition(conn, h, w, residual=p)
    remaining = sum(1 for z in range(nz) if alive[z])
    limit = npx if max_n is None else min(max_n, npx)
    phases = ("max", "min") if sequencing is Sequencing.UL else ("min", "max")

    n = 0
    while remaining and n < limit:
        n += 1
        for phase in phases:
            cands = sorted(buckets.get(n, ()))
            for z in cands:
                if not alive[z] or size[z] != n:
                    continue
                v = value[z]
                nvals = [value[c] for c in nbrs[z]]
                if phase == "max":
                    target = max(nvals)
                    if target >= v:
                        continue
                else:
                    target = min(nvals)
                    if target <= v:
                        continue
                d.add(Pulse(np.column_stack(np.divmod(np.array(members[z]), w)), v - target, n))
                value[z] = target
                merge_with = [c for c in nbrs[z] if value[c] == target]
                for c in merge_with:
                    z = _merge_zones(z, c, nbrs, members, size, alive, buckets, pad)
                    remaining -= 1
    if remaining:
        d.complete = False
        res = np.empty(npx, dtype=np.int64)
        res[:] = p
        for z in range(nz):
            if alive[z]:
                res[members[z]] = value[z]
        d.residual_image = GridImage(res.reshape(h, w), p)
    d.meta["stages"] = n
    return d.canonicalize()


def extract_layer(g: GridImage, n: int, conn: Connectivity, check: bool = False,
                  sequencing: Sequencing = Sequencing.UL):
    """One stage on whole images: returns (pulses, smoothed) with smoothed = U_n(L_n(g))."""
    if check and n > 1:
        for polarity in ("max", "min"):
            bad = find_local_extremum_set(g, n - 1, conn, polarity)
            if bad is not None:
                raise PreconditionError(
                    f"input has a local {polarity}imum set of size {len(bad)} < {n}: {sorted(bad)}")
    sequencing = Sequencing(sequencing)
    pulses = []
    if sequencing is Sequencing.UL:
        lowered = apply_Ln(g, n, conn)
        smoothed = apply_Un(lowered, n, conn)
        stages = ((g, lowered, flat_local_max_components(g, n, conn)),
                  (lowered, smoothed, flat_local_min_components(lowered, n, conn)))
    else:
        raised = apply_Un(g, n, conn)
        smoothed = apply_Ln(raised, n, conn)
        stages = ((g, raised, flat_local_min_components(g, n, conn)),
                  (raised, smoothed, flat_local_max_components(raised, n, conn)))
    for before, after, comps in stages:
        for comp in comps:
            x = next(iter(comp))
            pulses.append(Pulse(sorted(comp), before.at(x) - after.at(x), n))
    return pulses, smoothed


def dpt_decompose_reference(f: GridImage, conn: Optional[Connectivity] = None,
                            max_n: Optional[int] = None, check: bool = False,
                            sequencing: Sequencing = Sequencing.UL) -> DptDecomposition:
    """Slow DPT that applies the image operators stage by stage."""
    conn = conn or Connectivity.four()
    h, w = f.shape
    d = DptDecomposition(conn, h, w, residual=f.padding)
    limit = h * w if max_n is None else min(max_n, h * w)
    g = f
    n = 0
    while n < limit and not np.all(g.values == g.padding):
        n += 1
        pulses, g = extract_layer(g, n, conn, check=check, sequencing=sequencing)
        for pulse in pulses:
            d.add(pulse)
    if not np.all(g.values == g.padding):
        d.complete = False
        d.residual_image = g
    d.meta["stages"] = n
    return d.canonicalize()


def pulse_image(pulses: Iterable[Pulse], height: int, width: int) -> np.ndarray:
    out = np.zeros(height * width, dtype=np.int64)
    for pulse in pulses:
        out[pulse.flat_index(width)] += pulse.amplitude
    return out.reshape(height, width)


@dataclass(frozen=True)
class PulseFilter:
    """Selects pulses by support size and sign; also decides on the residual."""

    min_size: int = 1
    max_size: Optional[int] = None
    sign: str = "both"  # pos | neg | both
    include_residual: bool = True

    def __post_init__(self):
        if self.sign not in ("pos", "neg", "both"):
            raise ValueError(f"sign must be pos, neg or both, got {self.sign!r}")
        if self.min_size < 0 or (self.max_size is not None and self.max_size < self.min_size):
            raise ValueError("size bounds must satisfy 0 <= min <= max")

    def __call__(self, pulse: Pulse) -> bool:
        if pulse.size < self.min_size:
            return False
        if self.max_size is not None and pulse.size > self.max_size:
            return False
        if self.sign == "pos":
            return pulse.amplitude > 0
        if self.sign == "neg":
            return pulse.amplitude < 0
        return True


ALL_PULSES = PulseFilter()

# size bands for partial reconstruction, selectable by name from the CLI
PRESETS = {
    "denoise": PulseFilter(min_size=21, include_residual=True),
    "small-features": PulseFilter(min_size=21, max_size=400, include_residual=False),
    "large-features": PulseFilter(min_size=30000, max_size=50000, include_residual=False),
}


def reconstruct(d: DptDecomposition, keep: Callable[[Pulse], bool] = ALL_PULSES,
                include_residual: Optional[bool] = None) -> GridImage:
    """Sum of the selected pulses, plus the residual when requested.

    ``include_residual`` defaults to the filter's own flag (True for plain callables).
    """
    if include_residual is None:
        include_residual = getattr(keep, "include_residual", True)
    out = pulse_image((p for p in d.pulses() if keep(p)), d.height, d.width)
    pad = 0
    if include_residual:
        if d.residual_image is not None:
            out = out + d.residual_image.values
            pad = d.residual_image.padding
        else:
            out = out + d.residual
            pad = d.residual
    return GridImage(out, pad)


def pulse_histogram(d: DptDecomposition) -> list[tuple[int, int]]:
    counts: dict = {}
    for pulse in d.pulses():
        counts[pulse.size] = counts.get(pulse.size, 0) + 1
    return sorted((k, v) for k, v in counts.items() if v)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    where: Optional[tuple] = None


@dataclass
class StructureReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'}  {c.name}"
            if not c.passed:
                line += f"  {c.detail}"
            out.append(line)
        return out


def verify_structure(d: DptDecomposition, original: Optional[GridImage] = None) -> StructureReport:
    """Checks the decomposition invariants; each failure names a first offending pixel."""
    h, w = d.height, d.width
    checks = []

    bad = None
    for pulse in d.pulses():
        if pulse.amplitude == 0:
            bad = pulse
            break
    checks.append(CheckResult("nonzero-amplitude", bad is None,
                              "" if bad is None else f"zero amplitude at {bad.first_pixel}",
                              None if bad is None else bad.first_pixel))

    bad = None
    for n, ps in d.layers.items():
        for pulse in ps:
            if pulse.size != n or pulse.layer != n:
                bad = (n, pulse)
                break
        if bad:
            break
    checks.append(CheckResult(
        "layer-size", bad is None,
        "" if bad is None else f"pulse at {bad[1].first_pixel} has {bad[1].size} pixels in layer {bad[0]}",
        None if bad is None else bad[1].first_pixel))

    bad = None
    for pulse in d.pulses():
        if not _support_connected(pulse, d.connectivity):
            bad = pulse
            break
    checks.append(CheckResult("connected-support", bad is None,
                              "" if bad is None else f"disconnected support at {bad.first_pixel}",
                              None if bad is None else bad.first_pixel))

    bad = None
    for n, ps in d.layers.items():
        seen = np.zeros(h * w, dtype=bool)
        for pulse in ps:
            idx = pulse.flat_index(w)
            hit = seen[idx]
            if hit.any():
                k = int(idx[np.argmax(hit)])
                bad = (n, divmod(k, w))
                break
            seen[idx] = True
        if bad:
            break
    checks.append(CheckResult("layer-disjoint", bad is None,
                              "" if bad is None else f"overlapping supports in layer {bad[0]} at {bad[1]}",
                              None if bad is None else bad[1]))

    checks.append(_check_nesting(d))

    if original is not None:
        rec = reconstruct(d, ALL_PULSES, include_residual=True)
        diff = np.argwhere(rec.values != original.values)
        ok = len(diff) == 0 and rec.padding == original.padding
        where = tuple(int(v) for v in diff[0]) if len(diff) else None
        detail = ""
        if not ok:
            detail = (f"reconstruction differs at {where}" if where is not None
                      else f"residual {rec.padding} != padding {original.padding}")
        checks.append(CheckResult("reconstruction", ok, detail, where))
    return StructureReport(checks)


def _support_connected(pulse: Pulse, conn: Connectivity) -> bool:
    if pulse.size <= 1:
        return True
    if pulse.size < 16 or conn.reach > 1:
        return is_connected(map(tuple, pulse.pixels.tolist()), conn)
    lo = pulse.pixels.min(axis=0)
    rel = pulse.pixels - lo
    mask = np.zeros(tuple(rel.max(axis=0) + 1), dtype=bool)
    mask[rel[:, 0], rel[:, 1]] = True
    structure = np.zeros((3, 3), dtype=bool)
    structure[1, 1] = True
    for dr, dc in conn.offsets:
        structure[1 + dr, 1 + dc] = True
    return ndimage.label(mask, structure=structure)[1] == 1


def _check_nesting(d: DptDecomposition) -> CheckResult:
    # owner[x] is the most recent (largest-layer) pulse containing x; with
    # layers disjoint, checking each new pulse against the owners of its
    # pixels covers every intersecting earlier pulse by transitivity.
    h, w = d.height, d.width
    owner = np.full(h * w, -1, dtype=np.int64)
    sizes = []
    for n in sorted(d.layers):
        for pulse in d.layers[n]:
            idx = pulse.flat_index(w)
            prev = owner[idx]
            prev = prev[prev >= 0]
            if len(prev):
                ids, cnt = np.unique(prev, return_counts=True)
                for pid, k in zip(ids.tolist(), cnt.tolist()):
                    if sizes[pid][1] == n:
                        continue  # same-layer overlap is the disjointness check's business
                    if k != sizes[pid][0]:
                        where = divmod(int(idx[np.argmax(owner[idx] == pid)]), w)
                        return CheckResult("nesting", False,
                                           f"layer-{sizes[pid][1]} pulse meets layer-{n} pulse at {where} "
                                           f"without being contained in it", where)
            owner[idx] = len(sizes)
            sizes.append((pulse.size, n))
    return CheckResult("nesting", True)
