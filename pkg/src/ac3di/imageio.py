"""PFM float maps, PGM previews, and scene bundles on disk.

PFM layout: ``Pf\\n<width> <height>\\n-1.0\\n`` followed by little-endian float32
samples, bottom row first. PGM previews are binary ``P5`` with maxval 255.
A scene bundle is a directory holding ``intensity.pfm``, ``depth.pfm`` and ``meta.json``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SizeError
from .forward import Scene


def write_pfm(path, img) -> None:
    img = np.asarray(img)
    if img.ndim != 2:
        raise SizeError(f"PFM writer takes a 2-D map, got shape {img.shape}")
    h, w = img.shape
    data = np.flipud(img).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(data.tobytes())


def _read_token(fh) -> bytes:
    tok = b""
    while True:
        c = fh.read(1)
        if not c:
            return tok
        if c.isspace():
            if tok:
                return tok
            continue
        tok += c


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM; returns float64 rows top-first."""
    with open(path, "rb") as fh:
        magic = _read_token(fh)
        if magic != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM (magic {magic!r})")
        w = int(_read_token(fh))
        h = int(_read_token(fh))
        scale = float(_read_token(fh))
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(fh.read(), dtype=dtype)
    if data.size != w * h:
        raise ValueError(f"{path}: expected {w * h} samples, found {data.size}")
    return np.flipud(data.reshape(h, w)).astype(np.float64)


def write_pgm(path, img, vmax: float | None = None) -> None:
    """8-bit preview scaled from [0, vmax] (default the image maximum)."""
    img = np.asarray(img, dtype=np.float64)
    top = float(img.max(initial=0.0)) if vmax is None else float(vmax)
    scaled = np.zeros(img.shape) if top <= 0 else np.clip(img / top, 0, 1) * 255
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.rint(scaled).astype(np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if _read_token(fh) != b"P5":
            raise ValueError(f"{path}: not a binary PGM")
        w = int(_read_token(fh))
        h = int(_read_token(fh))
        maxval = int(_read_token(fh))
        dtype = np.uint8 if maxval < 256 else ">u2"
        data = np.frombuffer(fh.read(), dtype=dtype)
    return data[: w * h].reshape(h, w)


def read_map(path) -> np.ndarray:
    """PFM as floats, PGM as raw sample values."""
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path).astype(np.float64)
    return read_pfm(path)


def write_scene_bundle(out_dir, scene: Scene, meta: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_pfm(out / "intensity.pfm", scene.intensity)
    write_pfm(out / "depth.pfm", scene.depth)
    meta = {"side": scene.side, "intensity_units": "photons per pixel per dwell",
            "depth_units": "m", **meta}
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    write_pgm(out / "intensity_preview.pgm", scene.intensity)
    write_pgm(out / "depth_preview.pgm", scene.depth)


def read_scene_bundle(path) -> tuple[Scene, dict]:
    p = Path(path)
    meta = json.loads((p / "meta.json").read_text())
    scene = Scene(read_pfm(p / "intensity.pfm"), read_pfm(p / "depth.pfm"))
    if meta.get("side") != scene.side:
        raise SizeError(f"{p}: meta side {meta.get('side')} does not match maps ({scene.side})")
    return scene, meta
