"""Container for per-coil complex arrays and its on-disk format.

A :class:`CoilStack` holds one complex ``(coils, maps, n, m)`` array.
``maps`` is 1 for measured data and simulated sensitivities; calibration
tools that emit several sensitivity maps per coil use ``maps > 1``.

File format: a single JSON header line ``{"n", "m", "coils", "maps",
"kind"}`` terminated by ``\\n``, followed by the raw array as
little-endian float64 interleaved real/imaginary pairs in C order.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

KINDS = ("kspace", "image", "sensitivity")


@dataclass
class CoilStack:
    """Complex per-coil data on a common grid.

    Parameters
    ----------
    data : numpy.ndarray
        Complex array of shape ``(coils, maps, n, m)``.
    kind : str
        One of ``"kspace"``, ``"image"``, ``"sensitivity"``.
    """

    data: np.ndarray
    kind: str

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 4:
            raise ValueError("data must have shape (coils, maps, n, m)")
        if any(s < 1 for s in arr.shape):
            raise ValueError("all dimensions must be positive")
        self.data = np.ascontiguousarray(arr, dtype=np.complex128)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")

    @property
    def coils(self) -> int:
        return self.data.shape[0]

    @property
    def maps(self) -> int:
        return self.data.shape[1]

    @property
    def n(self) -> int:
        return self.data.shape[2]

    @property
    def m(self) -> int:
        return self.data.shape[3]

    @classmethod
    def from_images(cls, images: np.ndarray, kind: str) -> "CoilStack":
        """Wrap a ``(coils, n, m)`` array as a single-map stack."""
        images = np.asarray(images)
        if images.ndim != 3:
            raise ValueError("images must have shape (coils, n, m)")
        return cls(data=images[:, None, :, :], kind=kind)

    def take_coils(self, indices) -> "CoilStack":
        """New stack restricted to the given coil indices (in order)."""
        idx = np.asarray(indices, dtype=int)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("need at least one coil index")
        if idx.min() < 0 or idx.max() >= self.coils:
            raise ValueError("coil index out of range")
        return CoilStack(data=self.data[idx].copy(), kind=self.kind)

    def take_maps(self, count: int) -> "CoilStack":
        """New stack keeping the first ``count`` maps per coil."""
        if not 1 <= count <= self.maps:
            raise ValueError("map count out of range")
        return CoilStack(data=self.data[:, :count].copy(), kind=self.kind)

    def save(self, path) -> None:
        """Write header line plus raw payload; the write is atomic."""
        header = {
            "n": self.n,
            "m": self.m,
            "coils": self.coils,
            "maps": self.maps,
            "kind": self.kind,
        }
        payload = json.dumps(header).encode() + b"\n"
        payload += np.ascontiguousarray(self.data, dtype="<c16").tobytes()
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path) -> "CoilStack":
        with open(path, "rb") as fh:
            raw = fh.read()
        cut = raw.find(b"\n")
        if cut < 0:
            raise ValueError("missing header line")
        header = json.loads(raw[:cut].decode())
        shape = tuple(int(header[k]) for k in ("coils", "maps", "n", "m"))
        body = raw[cut + 1 :]
        expected = int(np.prod(shape)) * 16
        if len(body) != expected:
            raise ValueError(
                f"payload holds {len(body)} bytes, header implies {expected}"
            )
        data = np.frombuffer(body, dtype="<c16").reshape(shape)
        return cls(data=data.astype(np.complex128), kind=str(header["kind"]))
