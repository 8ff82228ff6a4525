"""Synthetic phantoms, coil sensitivity models, and k-space simulation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coilstack import CoilStack
from .fourier import fftc
from .geometry import Grid, SamplingMask

# (x0, y0, a, b, angle_deg, intensity) on [-1, 1]^2; the classic head
# phantom: skull shell, brain, two slanted ventricles, and small lesions.
SHEPP_LOGAN_ELLIPSES = (
    (0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
)


@dataclass
class PhantomSpec:
    """Description of a synthetic object supported inside the grid.

    ``kind`` selects the generator: ``"shepp_logan"`` (the ellipse
    phantom above, scaled to occupy the central half of the grid),
    ``"disks"`` (sum of the ``(x1, x2, radius, intensity)`` entries), or
    ``"file"`` (a stored single-coil image stack).  ``phase_ramp``
    multiplies the object by ``exp(1j*(g1*x1 + g2*x2))`` to make it
    genuinely complex.
    """

    kind: str = "shepp_logan"
    n: int = 64
    m: int = 64
    disks: list = field(default_factory=list)
    phase_ramp: Optional[tuple] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("shepp_logan", "disks", "file"):
            raise ValueError("unknown phantom kind")
        if self.kind == "file" and not self.path:
            raise ValueError("file phantoms need a path")
        for x1, x2, radius, intensity in self.disks:
            if radius <= 0:
                raise ValueError("disk radii must be positive")
            if not np.isfinite(intensity):
                raise ValueError("disk intensities must be finite")
            if max(abs(x1), abs(x2)) + radius >= 0.5:
                raise ValueError("disks must lie strictly inside the grid")

    @classmethod
    def from_json(cls, path) -> "PhantomSpec":
        with open(path) as fh:
            doc = json.load(fh)
        if "phase_ramp" in doc and doc["phase_ramp"] is not None:
            doc["phase_ramp"] = tuple(doc["phase_ramp"])
        if "disks" in doc:
            doc["disks"] = [tuple(d) for d in doc["disks"]]
        return cls(**doc)


@dataclass
class CoilModel:
    """Ring of Gaussian receive profiles with per-coil phase ramps.

    Coil ``j`` sits at angle ``2*pi*j/coils`` on a ring of the given
    radius; its magnitude is a Gaussian of the given width around that
    point and its phase a linear ramp along the outward direction,
    scaled by ``phase_coef``.  ``uniform`` replaces everything with
    constant unit sensitivities.
    """

    coils: int = 8
    ring_radius: float = 0.32
    width: float = 0.45
    phase_coef: float = 6.0
    uniform: bool = False

    def __post_init__(self):
        if self.coils < 1:
            raise ValueError("need at least one coil")
        if self.width <= 0:
            raise ValueError("width must be positive")

    @classmethod
    def from_json(cls, path) -> "CoilModel":
        with open(path) as fh:
            return cls(**json.load(fh))


def make_phantom(spec: PhantomSpec) -> np.ndarray:
    """Rasterize ``spec`` to a complex ``(n, m)`` image."""
    grid = Grid(n=spec.n, m=spec.m)
    x2 = grid.x2()[:, None]
    x1 = grid.x1()[None, :]
    if spec.kind == "file":
        stack = CoilStack.load(spec.path)
        if stack.coils != 1 or stack.maps != 1:
            raise ValueError("file phantoms must be single-coil, single-map")
        return stack.data[0, 0].copy()
    if spec.kind == "disks":
        image = np.zeros((spec.n, spec.m), dtype=np.complex128)
        for cx1, cx2, radius, intensity in spec.disks:
            image += intensity * ((x1 - cx1) ** 2 + (x2 - cx2) ** 2 <= radius**2)
    else:
        # Ellipses live on [-1, 1]^2, so scale grid coordinates by 2 to
        # keep the support inside the central half of the unit square.
        image = np.zeros((spec.n, spec.m), dtype=np.complex128)
        u, v = 2.0 * x1, 2.0 * x2
        for ex, ey, ea, eb, ang, intensity in SHEPP_LOGAN_ELLIPSES:
            th = np.deg2rad(ang)
            xr = (u - ex) * np.cos(th) + (v - ey) * np.sin(th)
            yr = -(u - ex) * np.sin(th) + (v - ey) * np.cos(th)
            image += intensity * ((xr / ea) ** 2 + (yr / eb) ** 2 <= 1.0)
    if spec.phase_ramp is not None:
        g1, g2 = spec.phase_ramp
        image = image * np.exp(1j * (g1 * x1 + g2 * x2))
    return image


def make_coil_maps(model: CoilModel, grid: Grid) -> CoilStack:
    """Sensitivity maps of ``model`` on ``grid`` as a single-map stack."""
    x2 = grid.x2()[:, None]
    x1 = grid.x1()[None, :]
    maps = np.empty((model.coils, grid.n, grid.m), dtype=np.complex128)
    for j in range(model.coils):
        if model.uniform:
            maps[j] = 1.0
            continue
        th = 2.0 * np.pi * j / model.coils
        cx1 = model.ring_radius * np.cos(th)
        cx2 = model.ring_radius * np.sin(th)
        mag = np.exp(
            -((x1 - cx1) ** 2 + (x2 - cx2) ** 2) / (2.0 * model.width**2)
        )
        phase = model.phase_coef * (np.cos(th) * x1 + np.sin(th) * x2)
        maps[j] = mag * np.exp(1j * phase)
    return CoilStack.from_images(maps, kind="sensitivity")


def simulate_kspace(
    image: np.ndarray,
    sens: CoilStack,
    mask: SamplingMask,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> CoilStack:
    """Coil-by-coil k-space of ``image`` under ``mask``.

    Each coil sees ``fftc(s_j * image)``; complex white noise of total
    standard deviation ``noise_sigma`` per sample is added to acquired
    lines only, and missing lines are exact zeros.
    """
    image = np.asarray(image, dtype=np.complex128)
    if image.ndim != 2:
        raise ValueError("image must be 2-d")
    if sens.kind != "sensitivity" or sens.maps != 1:
        raise ValueError("expected single-map sensitivities")
    if (sens.n, sens.m) != image.shape:
        raise ValueError("sensitivities do not match the image grid")
    if mask.n != image.shape[0]:
        raise ValueError("mask length must match image rows")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    kspace = fftc(sens.data[:, 0] * image[None, :, :], axes=(1, 2))
    acquired = mask.acquired
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        shape = (sens.coils, int(acquired.sum()), image.shape[1])
        scale = noise_sigma / np.sqrt(2.0)
        noise = rng.normal(scale=scale, size=shape) + 1j * rng.normal(
            scale=scale, size=shape
        )
        kspace[:, acquired, :] += noise
    kspace[:, ~acquired, :] = 0.0
    return CoilStack.from_images(kspace, kind="kspace")
