"""Sampling geometry: grids, k-space line masks, and frequency bands.

Images are arrays of shape ``(n, m)``.  Axis 0 is the undersampled
direction: k-space lines run parallel to axis 1 and are kept or dropped
whole.  Axis 1 indexes the ``m`` image columns that later become
independent one-dimensional systems.

Line ``j`` of centered k-space carries the angular frequency
``2*pi*(j - n//2)`` and owns the frequency interval of width ``2*pi``
around it, so a run of missing lines ``a..b`` becomes one band with
center ``2*pi*((a + b)/2 - n//2)`` and half-width ``pi*(b - a + 1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

LINE_SPACING = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on the unit square ``[-1/2, 1/2)^2``."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise ValueError("grid dimensions must be at least 2")

    def x2(self) -> np.ndarray:
        """Sample positions along axis 0 (the undersampled direction)."""
        return -0.5 + np.arange(self.n) / self.n

    def x1(self) -> np.ndarray:
        """Sample positions along axis 1 (the column direction)."""
        return -0.5 + np.arange(self.m) / self.m


def line_frequencies(n: int) -> np.ndarray:
    """Angular frequency carried by each of the ``n`` k-space lines."""
    return LINE_SPACING * (np.arange(n) - n // 2)


def acs_block(n: int, acs: int) -> np.ndarray:
    """Indices of the centered auto-calibration block of ``acs`` lines."""
    if acs < 0 or acs > n:
        raise ValueError("acs must lie in [0, n]")
    lo = n // 2 - acs // 2
    return np.arange(lo, lo + acs)


@dataclass(frozen=True)
class SamplingMask:
    """Which k-space lines were acquired, plus the calibration count.

    Parameters
    ----------
    acquired : numpy.ndarray
        Boolean vector of length ``n``; ``True`` marks an acquired line.
    acs : int
        Number of lines in the centered auto-calibration block.  The
        block must be fully acquired.
    """

    acquired: np.ndarray
    acs: int = 0

    def __post_init__(self):
        arr = np.asarray(self.acquired, dtype=bool)
        object.__setattr__(self, "acquired", arr)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("acquired must be a nonempty 1-d boolean array")
        if not arr.any():
            raise ValueError("at least one line must be acquired")
        if not (0 <= self.acs <= arr.size):
            raise ValueError("acs must lie in [0, n]")
        if not arr[acs_block(arr.size, self.acs)].all():
            raise ValueError("auto-calibration block must be acquired")
        arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.acquired.size

    @property
    def num_acquired(self) -> int:
        return int(self.acquired.sum())

    @property
    def scan_time(self) -> float:
        """Fraction of lines acquired relative to a full scan."""
        return self.num_acquired / self.n

    def acquired_indices(self) -> np.ndarray:
        return np.flatnonzero(self.acquired)

    def missing_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.acquired)

    def save(self, path) -> None:
        """Write the mask as JSON ``{"n", "acs", "acquired"}``."""
        doc = {
            "n": self.n,
            "acs": self.acs,
            "acquired": [int(j) for j in self.acquired_indices()],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SamplingMask":
        with open(path) as fh:
            doc = json.load(fh)
        n = int(doc["n"])
        idx = np.asarray(doc["acquired"], dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("acquired indices out of range")
        acquired = np.zeros(n, dtype=bool)
        acquired[idx] = True
        return cls(acquired=acquired, acs=int(doc["acs"]))


def make_accelerated_mask(n: int, rate: int, acs: int) -> SamplingMask:
    """Every ``rate``-th line starting at 0, plus the calibration block."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if int(rate) != rate or rate < 1:
        raise ValueError("rate must be a positive integer")
    acquired = np.zeros(n, dtype=bool)
    acquired[:: int(rate)] = True
    acquired[acs_block(n, acs)] = True
    return SamplingMask(acquired=acquired, acs=acs)


def make_random_mask(n: int, scan_time: float, acs: int, seed: int) -> SamplingMask:
    """Uniformly random lines at a target scan time.

    The calibration block is always included; the remaining budget
    ``round(scan_time * n) - acs_block_size`` is drawn without
    replacement from the other lines.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < scan_time <= 1.0:
        raise ValueError("scan_time must lie in (0, 1]")
    total = int(round(scan_time * n))
    block = acs_block(n, acs)
    if total < block.size or total < 1:
        raise ValueError("scan time budget smaller than the calibration block")
    acquired = np.zeros(n, dtype=bool)
    acquired[block] = True
    pool = np.flatnonzero(~acquired)
    extra = total - block.size
    if extra > pool.size:
        raise ValueError("scan time budget exceeds available lines")
    rng = np.random.default_rng(seed)
    acquired[rng.choice(pool, size=extra, replace=False)] = True
    return SamplingMask(acquired=acquired, acs=acs)


@dataclass(frozen=True)
class BandSet:
    """Disjoint frequency bands, each a ``(center, half_width)`` pair."""

    bands: tuple

    def __post_init__(self):
        bands = tuple(
            (float(c), float(w)) for c, w in sorted(self.bands, key=lambda cw: cw[0])
        )
        for c, w in bands:
            if not (np.isfinite(c) and np.isfinite(w)):
                raise ValueError("band parameters must be finite")
            if w <= 0:
                raise ValueError("band half-widths must be positive")
        for (c0, w0), (c1, w1) in zip(bands, bands[1:]):
            if c0 + w0 > c1 - w1 + 1e-9:
                raise ValueError("bands must be disjoint")
        object.__setattr__(self, "bands", bands)

    def __len__(self) -> int:
        return len(self.bands)

    def __iter__(self):
        return iter(self.bands)


def mask_to_bands(mask: SamplingMask) -> BandSet:
    """Bands covering the missing lines of ``mask``.

    Each maximal run of consecutive missing lines ``a..b`` maps to the
    band with center ``2*pi*((a + b)/2 - n//2)`` and half-width
    ``pi*(b - a + 1)``.  A fully sampled mask gives an empty set.
    """
    missing = mask.missing_indices()
    n0 = mask.n // 2
    bands = []
    start = prev = None
    for j in missing:
        if start is None:
            start = prev = j
        elif j == prev + 1:
            prev = j
        else:
            bands.append(_run_to_band(start, prev, n0))
            start = prev = j
    if start is not None:
        bands.append(_run_to_band(start, prev, n0))
    return BandSet(bands=tuple(bands))


def _run_to_band(a: int, b: int, n0: int) -> tuple:
    center = LINE_SPACING * ((a + b) / 2.0 - n0)
    half_width = np.pi * (b - a + 1)
    return (center, half_width)


def rasterize_bands(bands: BandSet, n: int) -> np.ndarray:
    """Line indices covered by ``bands`` on an ``n``-line grid.

    Inverse of :func:`mask_to_bands` for on-grid bands; off-grid or
    out-of-range bands raise ``ValueError``.
    """
    n0 = n // 2
    covered = np.zeros(n, dtype=bool)
    for c, w in bands:
        a = (c - w + np.pi) / LINE_SPACING + n0
        count = w / np.pi
        if abs(a - round(a)) > 1e-6 or abs(count - round(count)) > 1e-6:
            raise ValueError("band does not align with the line grid")
        a = int(round(a))
        b = a + int(round(count)) - 1
        if a < 0 or b >= n:
            raise ValueError("band outside the line grid")
        if covered[a : b + 1].any():
            raise ValueError("bands overlap on the line grid")
        covered[a : b + 1] = True
    return np.flatnonzero(covered)
