"""PGM rasters, JSON-lines pulse dumps and CSV histograms."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .connectivity import Connectivity, GridImage
from .dpt import DptDecomposition, Pulse, verify_structure


class PgmError(ValueError):
    pass


class PulseFormatError(ValueError):
    pass


@dataclass
class PgmImage:
    width: int
    height: int
    maxval: int
    samples: np.ndarray  # (height, width), row-major

    def __post_init__(self):
        if not 0 < self.maxval <= 65535:
            raise PgmError(f"maxval {self.maxval} outside 1..65535")
        if self.samples.shape != (self.height, self.width):
            raise PgmError(f"sample array shape {self.samples.shape} != ({self.height}, {self.width})")
        if self.samples.size and (self.samples.min() < 0 or self.samples.max() > self.maxval):
            raise PgmError("samples must lie in [0, maxval]")


def _header_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens after the magic number."""
    pos = 2
    tokens = []
    while len(tokens) < count:
        if pos >= len(data):
            raise PgmError(f"truncated header at byte {pos}")
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tok = data[start:pos]
            if not tok.isdigit():
                raise PgmError(f"expected an unsigned integer at byte {start}, got {tok[:16]!r}")
            tokens.append((int(tok), start))
    return tokens, pos


def parse_pgm(data: bytes) -> PgmImage:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"not a PGM file: magic {magic!r} at byte 0 (expected P2 or P5)")
    tokens, pos = _header_tokens(data, 3)
    (w, wpos), (h, hpos), (maxval, mpos) = tokens
    if w < 1:
        raise PgmError(f"width must be positive (byte {wpos})")
    if h < 1:
        raise PgmError(f"height must be positive (byte {hpos})")
    if not 0 < maxval <= 65535:
        raise PgmError(f"maxval {maxval} out of range 1..65535 at byte {mpos}")
    count = w * h
    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise PgmError(f"missing whitespace after maxval at byte {pos}")
        pos += 1
        depth = 1 if maxval < 256 else 2
        need = count * depth
        payload = data[pos:pos + need]
        if len(payload) < need:
            raise PgmError(f"truncated P5 payload at byte {pos}: expected {need} bytes, got {len(payload)}")
        dtype = np.uint8 if depth == 1 else np.dtype(">u2")
        samples = np.frombuffer(payload, dtype=dtype).astype(np.int64).reshape(h, w)
    else:
        body = data[pos:]
        parts = body.split()
        if len(parts) < count:
            raise PgmError(f"truncated P2 payload after byte {pos}: expected {count} samples, got {len(parts)}")
        try:
            samples = np.array([int(t) for t in parts[:count]], dtype=np.int64).reshape(h, w)
        except ValueError as exc:
            raise PgmError(f"non-integer sample in P2 payload after byte {pos}") from exc
    if samples.size and samples.max() > maxval:
        k = int(np.argmax(samples.ravel() > maxval))
        raise PgmError(f"sample {k} value {int(samples.ravel()[k])} exceeds maxval {maxval}")
    return PgmImage(w, h, maxval, samples)


def read_pgm(path) -> GridImage:
    return GridImage(read_pgm_raw(path).samples, 0)


def read_pgm_raw(path) -> PgmImage:
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(img: PgmImage, plain: bool = False) -> bytes:
    header = f"{'P2' if plain else 'P5'}\n{img.width} {img.height}\n{img.maxval}\n".encode("ascii")
    if plain:
        rows = [" ".join(str(int(v)) for v in row) for row in img.samples]
        return header + ("\n".join(rows) + "\n").encode("ascii")
    dtype = np.uint8 if img.maxval < 256 else np.dtype(">u2")
    return header + img.samples.astype(dtype).tobytes()


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_pgm(f: GridImage, path, mode: str = "clip", maxval: Optional[int] = None,
              plain: bool = False) -> dict:
    """Write f as PGM. Returns metadata: ``{"maxval", "offset", "clipped"}``.

    ``clip`` clamps into [0, maxval]; ``offset`` adds -min(f) when f has
    negative values and raises maxval as needed, losslessly. A JSON sidecar is written next to the file
    whenever the offset or the clip count is nonzero.
    """
    vals = f.values
    offset = 0
    clipped = 0
    if mode == "offset":
        lo = int(vals.min())
        offset = -lo if lo < 0 else 0
        vals = vals + offset
        top = int(vals.max())
        maxval = max(255 if maxval is None else maxval, top)
        if maxval > 65535:
            raise PgmError(f"value range {top} exceeds 65535 even after offset")
    elif mode == "clip":
        if maxval is None:
            maxval = 255
        clipped = int(np.count_nonzero((vals < 0) | (vals > maxval)))
        vals = np.clip(vals, 0, maxval)
    else:
        raise ValueError(f"mode must be 'clip' or 'offset', got {mode!r}")
    meta = {"maxval": int(maxval), "offset": offset, "clipped": clipped}
    Path(path).write_bytes(encode_pgm(PgmImage(f.width, f.height, int(maxval), vals), plain))
    side = sidecar_path(path)
    if offset or clipped:
        side.write_text(json.dumps({"mode": mode, **meta}, sort_keys=True) + "\n")
    elif side.exists():
        side.unlink()
    return meta


def read_sidecar(path) -> Optional[dict]:
    side = sidecar_path(path)
    if not side.exists():
        return None
    return json.loads(side.read_text())


def residual_path(path) -> Path:
    return Path(str(path) + ".residual.pgm")


def write_pulses(d: DptDecomposition, path, extra: Optional[dict] = None):
    """One header line, then one JSON object per pulse in ascending layer, first-pixel order."""
    d.canonicalize()
    header = {
        "width": d.width,
        "height": d.height,
        "connectivity": d.connectivity.describe(),
        "residual": d.residual,
        "complete": d.complete,
    }
    if extra:
        header.update(extra)
    if d.residual_image is not None:
        res_path = residual_path(path)
        meta = write_pgm(d.residual_image, res_path, mode="offset", maxval=None)
        header["residual_image"] = os.path.basename(res_path)
        header["residual_offset"] = meta["offset"]
        header["residual_padding"] = d.residual_image.padding
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for pulse in d.pulses():
            fh.write(json.dumps({"n": pulse.layer, "amp": pulse.amplitude,
                                 "pixels": pulse.pixels.tolist()}, separators=(",", ":")) + "\n")


def read_pulses(path, validate: bool = True) -> DptDecomposition:
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise PulseFormatError(f"{path}:1: empty file, expected a header line")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise PulseFormatError(f"{path}:1: header is not valid JSON ({exc.msg})") from exc
    for key in ("width", "height", "connectivity", "residual"):
        if key not in header:
            raise PulseFormatError(f"{path}:1: header lacks {key!r}")
    w, h = int(header["width"]), int(header["height"])
    try:
        conn = Connectivity.from_description(header["connectivity"])
    except ValueError as exc:
        raise PulseFormatError(f"{path}:1: {exc}") from exc
    d = DptDecomposition(conn, h, w, residual=int(header["residual"]),
                         complete=bool(header.get("complete", True)))
    d.meta = {k: v for k, v in header.items()
              if k not in ("width", "height", "connectivity", "residual", "complete")}
    if "residual_image" in header:
        res = read_pgm(path.parent / header["residual_image"])
        vals = res.values - int(header.get("residual_offset", 0))
        d.residual_image = GridImage(vals, int(header.get("residual_padding", d.residual)))

    prev_key = None
    layer_masks: dict = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            n, amp, pixels = int(obj["n"]), int(obj["amp"]), obj["pixels"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PulseFormatError(f"{path}:{lineno}: malformed pulse record ({exc})") from exc
        px = np.asarray(pixels, dtype=np.int64)
        if px.ndim != 2 or px.shape[1] != 2 or len(px) == 0:
            raise PulseFormatError(f"{path}:{lineno}: pixels must be a nonempty list of [row, col] pairs")
        if px[:, 0].min() < 0 or px[:, 0].max() >= h or px[:, 1].min() < 0 or px[:, 1].max() >= w:
            raise PulseFormatError(f"{path}:{lineno}: pixel outside the {h}x{w} domain")
        if len({tuple(p) for p in px.tolist()}) != len(px):
            raise PulseFormatError(f"{path}:{lineno}: duplicate pixel in support")
        pulse = Pulse(px, amp, n)
        if validate:
            if amp == 0:
                raise PulseFormatError(f"{path}:{lineno}: zero amplitude")
            if pulse.size != n:
                raise PulseFormatError(f"{path}:{lineno}: layer {n} pulse has {pulse.size} pixels")
            key = (n, pulse.first_pixel)
            if prev_key is not None and key < prev_key:
                raise PulseFormatError(f"{path}:{lineno}: records not in ascending (n, first pixel) order")
            prev_key = key
            mask = layer_masks.setdefault(n, np.zeros(h * w, dtype=bool))
            idx = pulse.flat_index(w)
            if mask[idx].any():
                k = int(idx[np.argmax(mask[idx])])
                raise PulseFormatError(
                    f"{path}:{lineno}: support overlaps another layer-{n} pulse at {divmod(k, w)}; "
                    "same-layer supports must be disjoint")
            mask[idx] = True
        d.add(pulse)
    d.canonicalize()
    if validate:
        report = verify_structure(d)
        for check in report.checks:
            if not check.passed:
                reason = {
                    "nesting": "a smaller support meeting a larger one must lie inside it",
                    "connected-support": "pulse supports must be connected",
                }.get(check.name, check.name)
                raise PulseFormatError(f"{path}: {reason}: {check.detail}")
    return d


def write_histogram(hist, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["size", "count"])
        for size, count in sorted(hist):
            writer.writerow([int(size), int(count)])


def read_histogram(path) -> list[tuple[int, int]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["size", "count"]:
        raise ValueError(f"{path}: expected a 'size,count' header")
    return [(int(a), int(b)) for a, b in rows[1:]]
