"""Regenerate the small PGM fixtures under tests/fixtures (deterministic)."""

from pathlib import Path

import numpy as np

from lulu.connectivity import GridImage
from lulu.io import write_pgm

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def fixtures() -> dict:
    rng = np.random.default_rng(20090101)
    spike = np.zeros((3, 3), int)
    spike[1, 1] = 5
    two = np.zeros((4, 4), int)
    two[1, 1], two[1, 2] = 8, 3
    yy, xx = np.mgrid[0:24, 0:24]
    rings = ((np.hypot(yy - 11.5, xx - 11.5) // 3) % 2 * 120 + 40).astype(int)
    checker = ((yy[:12, :12] // 2 + xx[:12, :12] // 2) % 2 * 200).astype(int)
    sy, sx = np.mgrid[0:48, 0:64]
    sea = 110 + 50 * np.sin(sx / 5.0 + 0.3 * np.sin(sy / 4.0)) + 30 * np.cos(sy / 7.0)
    sea = np.clip(sea + rng.normal(0, 12, sea.shape), 0, 255).astype(int)
    blobs = rng.integers(0, 4, (32, 32)) * 60
    return {
        "spike": spike,
        "two_pulse": two,
        "constant": np.full((5, 7), 42),
        "zeros": np.zeros((6, 6), int),
        "gradient": np.add.outer(np.arange(16), np.arange(16)) * 7,
        "rings": rings,
        "checker": checker,
        "sea_like": sea,
        "blobs": blobs,
        "noise": rng.integers(0, 256, (24, 32)),
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, vals in fixtures().items():
        write_pgm(GridImage(vals), OUT / f"{name}.pgm")
        print(OUT / f"{name}.pgm", vals.shape)


if __name__ == "__main__":
    main()
