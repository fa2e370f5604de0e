"""Discrete total variation on Z^2 and checks of its preservation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .connectivity import Connectivity, GridImage
from .dpt import DptDecomposition, Pulse
from .operators import OperatorKind, apply


def total_variation(f: GridImage) -> int:
    """Sum of absolute differences over all horizontal and vertical neighbor pairs of Z^2.

    Only pairs meeting the domain can differ, so a one-pixel padding ring suffices.
    """
    a = f.padded(1)
    return int(np.abs(np.diff(a, axis=0)).sum() + np.abs(np.diff(a, axis=1)).sum())


def boundary_edges(pixels: np.ndarray) -> int:
    """Number of axis neighbor pairs with exactly one pixel in the given set."""
    px = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    k = len(px)
    if k == 0:
        return 0
    if k == 1:
        return 4
    lo = px.min(axis=0)
    rel = px - lo + 1
    w = int(rel[:, 1].max()) + 2
    ids = rel[:, 0] * w + rel[:, 1]
    internal = np.isin(ids + 1, ids).sum() + np.isin(ids + w, ids).sum()
    return int(4 * k - 2 * internal)


def pulse_tv(pulse: Pulse) -> int:
    return abs(pulse.amplitude) * boundary_edges(pulse.pixels)


@dataclass
class TvReport:
    tv_input: int
    tv_operator_part: int
    tv_residual_part: int
    label: str = ""

    @property
    def preserved(self) -> bool:
        return self.tv_input == self.tv_operator_part + self.tv_residual_part

    def __str__(self) -> str:
        rel = "=" if self.preserved else "!="
        head = f"{self.label}: " if self.label else ""
        return (f"{head}TV {self.tv_input} {rel} {self.tv_operator_part} + {self.tv_residual_part}"
                f" ({'preserved' if self.preserved else 'NOT preserved'})")


def tv_split(f: GridImage, smoothed: GridImage, label: str = "") -> TvReport:
    return TvReport(total_variation(f), total_variation(smoothed), total_variation(f - smoothed), label)


def verify_preservation(f: GridImage, op: OperatorKind, conn: Connectivity) -> TvReport:
    return tv_split(f, apply(op, f, conn), str(op))


@dataclass
class DptTvReport:
    tv_input: int
    tv_pulses: int
    per_layer: dict = field(default_factory=dict)  # layer -> summed pulse TV
    residual_tv: int = 0

    @property
    def preserved(self) -> bool:
        return self.tv_input == self.tv_pulses + self.residual_tv

    def __str__(self) -> str:
        rel = "=" if self.preserved else "!="
        s = f"TV {self.tv_input} {rel} sum of pulse TV {self.tv_pulses}"
        if self.residual_tv:
            s += f" + residual TV {self.residual_tv}"
        if not self.preserved:
            budget = ", ".join(f"{n}:{v}" for n, v in sorted(self.per_layer.items()))
            s += f"; per-layer TV [{budget}]"
        return s


def verify_dpt_tv(d: DptDecomposition, f: GridImage, residual_image: Optional[GridImage] = None) -> DptTvReport:
    """TV(f) against the summed TV of all pulses (and of the residual when truncated)."""
    per_layer = {}
    for n, ps in d.layers.items():
        per_layer[n] = sum(pulse_tv(p) for p in ps)
    res = residual_image if residual_image is not None else d.residual_image
    residual_tv = total_variation(res) if res is not None else 0
    return DptTvReport(total_variation(f), sum(per_layer.values()), per_layer, residual_tv)
