"""Synthetic test scenes.

All maps are rounded to float32-representable values so that a PFM round trip
is lossless. Intensities are scaled so that a half-on pattern collects
``photons_per_pattern`` photons on average (0.5 Mcps at a 1 ms dwell by default).
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .forward import Scene
from .hadamard import is_power_of_two

KINDS = ("steps", "spheres", "planes")


def _finish(albedo: np.ndarray, depth: np.ndarray, photons_per_pattern: float) -> Scene:
    total = albedo.sum()
    inten = albedo * (2.0 * photons_per_pattern / total) if total > 0 else albedo
    return Scene(inten.astype(np.float32).astype(np.float64),
                 depth.astype(np.float32).astype(np.float64))


def steps(side, rng, plateaus=4, grid=64, depths=None, albedos=None, layout="rects",
          photons_per_pattern=500.0):
    """Piecewise-constant plateaus whose edges lie on a ``grid x grid`` lattice."""
    grid = min(int(grid), side)
    cell = side // grid
    plateaus = int(plateaus)
    if depths is None:
        depths = rng.uniform(2.0, 5.0, size=plateaus)
    if albedos is None:
        albedos = rng.uniform(0.3, 1.0, size=plateaus)
    if len(depths) != plateaus or len(albedos) != plateaus:
        raise UsageError("depths and albedos need one entry per plateau")
    label = np.zeros((grid, grid), dtype=int)
    if layout == "halves":
        for k in range(1, plateaus):
            label[:, k * grid // plateaus:] = k
    elif layout == "rects":
        for k in range(1, plateaus):
            r0, c0 = rng.integers(0, grid - 1, size=2)
            r1 = rng.integers(r0 + 1, min(grid, r0 + 1 + grid // 2) + 1)
            c1 = rng.integers(c0 + 1, min(grid, c0 + 1 + grid // 2) + 1)
            label[r0:r1, c0:c1] = k
    else:
        raise UsageError(f"unknown steps layout {layout!r}")
    label = np.kron(label, np.ones((cell, cell), dtype=int))
    return _finish(np.asarray(albedos, float)[label], np.asarray(depths, float)[label],
                   photons_per_pattern)


def spheres(side, rng, n_spheres=3, background_m=3.0, near_m=2.5, width_m=0.55,
            radius_m=(0.05, 0.09), ambient=0.35, background_albedo=0.5,
            photons_per_pattern=500.0):
    """Lambertian spheres in front of a flat background, orthographic view.

    The camera looks along +z from the origin; ``width_m`` is the lateral extent
    of the field of view. Every sphere front lies in ``[near_m, background_m]``.
    """
    pitch = width_m / side
    coords = (np.arange(side) + 0.5) * pitch
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    depth = np.full((side, side), float(background_m))
    albedo = np.full((side, side), float(background_albedo))
    for _ in range(int(n_spheres)):
        r = rng.uniform(*radius_m)
        cx, cy = rng.uniform(r, width_m - r, size=2)
        cz = rng.uniform(near_m + r, background_m)
        a = rng.uniform(0.6, 1.0)
        rho2 = (xx - cx) ** 2 + (yy - cy) ** 2
        inside = rho2 < r * r
        h = np.sqrt(np.maximum(r * r - rho2, 0.0))
        front = cz - h
        hit = inside & (front < depth)
        depth[hit] = front[hit]
        cos = h / r
        albedo[hit] = a * (ambient + (1 - ambient) * cos[hit])
    return _finish(albedo, depth, photons_per_pattern)


def planes(side, rng, n_planes=3, near_m=2.0, far_m=4.0, photons_per_pattern=500.0):
    """Tilted planes separated by straight lines through the image."""
    u = (np.arange(side) + 0.5) / side
    yy, xx = np.meshgrid(u, u, indexing="ij")
    label = np.zeros((side, side), dtype=int)
    for k in range(1, int(n_planes)):
        theta = rng.uniform(0, np.pi)
        offset = rng.uniform(0.3, 0.7)
        label[(np.cos(theta) * (xx - 0.5) + np.sin(theta) * (yy - 0.5)) + 0.5 > offset] = k
    depth = np.empty((side, side))
    albedo = np.empty((side, side))
    for k in range(int(n_planes)):
        base = rng.uniform(near_m + 0.5, far_m - 0.5)
        gx, gy = rng.uniform(-0.5, 0.5, size=2)
        sel = label == k
        depth[sel] = np.clip(base + gx * (xx[sel] - 0.5) + gy * (yy[sel] - 0.5), near_m, far_m)
        albedo[sel] = rng.uniform(0.3, 1.0)
    return _finish(albedo, depth, photons_per_pattern)


_GENERATORS = {"steps": steps, "spheres": spheres, "planes": planes}


def scene_gen(kind: str, side: int, params: dict | None = None, seed: int = 0):
    """Build a synthetic scene; returns ``(scene, meta)`` with the generator settings."""
    if kind not in _GENERATORS:
        raise UsageError(f"unknown scene kind {kind!r}; choose from {', '.join(KINDS)}")
    if not is_power_of_two(side):
        raise UsageError(f"side must be a power of two, got {side}")
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    try:
        scene = _GENERATORS[kind](side, rng, **params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {kind}: {exc}") from None
    meta = {"kind": kind, "seed": seed, "params": params}
    return scene, meta
