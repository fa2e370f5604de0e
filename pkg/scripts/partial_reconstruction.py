"""Partial reconstructions of an image from pulses of selected sizes.

Decomposes a PGM (or the synthetic sea-like test image) once and writes one
reconstruction per size band, plus the pulse histogram. Bands default to the
denoise / small-features / large-features presets; large-features only
selects anything on images with more than 30000 pixels.

    python scripts/partial_reconstruction.py photo.pgm --out runs/photo
    python scripts/partial_reconstruction.py --band 1 20 --band 21 400 --out runs/sea
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from lulu.connectivity import Connectivity, GridImage
from lulu.dpt import PRESETS, PulseFilter, dpt_decompose, pulse_histogram, reconstruct
from lulu.io import read_pgm, write_histogram, write_pgm
from lulu.tv import total_variation


@dataclass
class ReconConfig:
    image: Optional[Path] = None
    out: Path = Path("runs/partial")
    connectivity: str = "4"
    bands: list = field(default_factory=list)  # (min, max) pairs; empty = presets


def sea_like(height=240, width=320, seed=7) -> GridImage:
    """Smooth swell plus fine ripples and speckle, 8-bit."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width]
    swell = 60 * np.sin(x / 23.0 + 0.4 * np.sin(y / 17.0)) + 35 * np.cos(y / 31.0)
    ripple = 18 * np.sin(x / 3.1 + y / 4.3)
    img = 120 + swell + ripple + rng.normal(0, 10, (height, width))
    return GridImage(np.clip(img, 0, 255).astype(np.int64))


def filters(cfg: ReconConfig) -> dict:
    if not cfg.bands:
        return dict(PRESETS)
    return {f"size{lo}-{hi}": PulseFilter(lo, hi, include_residual=False) for lo, hi in cfg.bands}


def run(cfg: ReconConfig):
    f = read_pgm(cfg.image) if cfg.image else sea_like()
    d = dpt_decompose(f, Connectivity.from_name(cfg.connectivity))
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_pgm(f, cfg.out / "input.pgm")
    write_histogram(pulse_histogram(d), cfg.out / "histogram.csv")
    print(f"{f.height}x{f.width}: {d.num_pulses} pulses, TV {total_variation(f)}")
    for name, keep in filters(cfg).items():
        part = reconstruct(d, keep)
        meta = write_pgm(part, cfg.out / f"{name}.pgm", mode="offset")
        n = sum(1 for p in d.pulses() if keep(p))
        print(f"{name:>16}: {n:>7} pulses, range [{part.values.min()}, {part.values.max()}], "
              f"TV {total_variation(part)}, offset {meta['offset']}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("image", nargs="?", type=Path, default=None)
    ap.add_argument("--out", type=Path, default=Path("runs/partial"))
    ap.add_argument("--connectivity", "-c", choices=["4", "8"], default="4")
    ap.add_argument("--band", nargs=2, type=int, action="append", dest="bands", default=[],
                    metavar=("MIN", "MAX"))
    cfg = ReconConfig(**vars(ap.parse_args()))
    run(cfg)


if __name__ == "__main__":
    main()
