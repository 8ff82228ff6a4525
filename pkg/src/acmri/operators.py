"""Reduction of line-undersampled 2-D k-space to per-column 1-D systems.

Dropping whole k-space lines only mixes samples along axis 0, so after
an inverse transform along axis 1 each image column satisfies its own
one-dimensional equation ``g = A f``.  ``A`` can be built two ways:

* analytically, as ``I`` minus the convolution kernel of the missing
  frequency bands sampled on the grid (Toeplitz);
* exactly, as the matrix of the acquire-then-zero-fill projection
  ``W^H diag(chi) W`` in the centered unitary DFT basis.

The second form reproduces the measured columns to machine precision
and is the default everywhere; the first exposes the band structure and
converges to it as ``n`` grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coilstack import CoilStack
from .fourier import dft_matrix, ifftc
from .geometry import BandSet, Grid, SamplingMask, mask_to_bands


def kernel_eval(bands: BandSet, x2) -> np.ndarray:
    """Convolution kernel of a band set at offsets ``x2``.

    For bands ``(c, w)`` the kernel is
    ``sum_b (w_b / pi) * exp(1j * c_b * x2) * sinc(w_b * x2)`` with the
    unnormalized sinc ``sin(t)/t``.  Accepts scalars or arrays; an empty
    band set gives zero.
    """
    x2 = np.asarray(x2, dtype=float)
    out = np.zeros(x2.shape, dtype=np.complex128)
    for c, w in bands:
        out += (w / np.pi) * np.exp(1j * c * x2) * np.sinc(w * x2 / np.pi)
    return out


@dataclass(frozen=True)
class FredholmMatrix:
    """A discretized 1-D system matrix plus its provenance.

    ``matrix`` is ``n x n`` complex; ``source`` records which
    discretization built it (``"analytic"`` or ``"dft"``).
    """

    matrix: np.ndarray
    source: str
    grid: Grid

    def __post_init__(self):
        arr = np.asarray(self.matrix, dtype=np.complex128)
        if arr.shape != (self.grid.n, self.grid.n):
            raise ValueError("matrix must be n x n for the grid")
        object.__setattr__(self, "matrix", arr)
        if self.source not in ("analytic", "dft"):
            raise ValueError("source must be 'analytic' or 'dft'")

    @property
    def n(self) -> int:
        return self.grid.n


def build_matrix_analytic(bands: BandSet, grid: Grid) -> FredholmMatrix:
    """``A[a, b] = delta_ab - kernel((a - b)/n) / n`` on the grid.

    Toeplitz by construction since the kernel depends only on the offset
    between sample positions.  Empty bands give the identity.
    """
    n = grid.n
    idx = np.arange(n)
    offsets = (idx[:, None] - idx[None, :]) / n
    matrix = np.eye(n, dtype=np.complex128) - kernel_eval(bands, offsets) / n
    return FredholmMatrix(matrix=matrix, source="analytic", grid=grid)


def build_matrix_dft(mask: SamplingMask, grid: Grid) -> FredholmMatrix:
    """Exact acquire-then-zero-fill projection ``W^H diag(chi) W``.

    Hermitian, idempotent, eigenvalues 0/1 with trace equal to the
    number of acquired lines.
    """
    if mask.n != grid.n:
        raise ValueError("mask length must match grid rows")
    w = dft_matrix(grid.n)
    chi = mask.acquired.astype(float)
    matrix = (w.conj().T * chi[None, :]) @ w
    return FredholmMatrix(matrix=matrix, source="dft", grid=grid)


def build_matrix(mask: SamplingMask, grid: Grid, source: str = "dft") -> FredholmMatrix:
    """Dispatch between the two discretizations by name."""
    if source == "dft":
        return build_matrix_dft(mask, grid)
    if source == "analytic":
        return build_matrix_analytic(mask_to_bands(mask), grid)
    raise ValueError("source must be 'analytic' or 'dft'")


def prepare_data(kspace: CoilStack, grid: Grid) -> CoilStack:
    """Zero-filled coil images from measured k-space.

    Applies the centered unitary inverse DFT over both grid axes; the
    result's column ``i`` is exactly ``A_dft @ f`` for the matching
    coil-weighted image column.
    """
    if kspace.kind != "kspace":
        raise ValueError("expected a kspace stack")
    if (kspace.n, kspace.m) != (grid.n, grid.m):
        raise ValueError("stack dimensions do not match the grid")
    images = ifftc(kspace.data, axes=(2, 3))
    return CoilStack(data=images, kind="image")


@dataclass(frozen=True)
class SliceSystem:
    """The stacked linear system of one image column.

    ``lhs`` is ``(n * coils, n * maps)`` complex: for coil ``j`` and map
    ``q``, block ``(j, q)`` is ``A @ diag(s_jq[:, column])``.  ``rhs``
    stacks the coil data columns in the same coil order.  ``sens`` keeps
    the ``(coils, maps, n)`` sensitivity columns for initial guesses.
    """

    lhs: np.ndarray
    rhs: np.ndarray
    column: int
    num_maps: int
    sens: Optional[np.ndarray] = None

    def __post_init__(self):
        lhs = np.asarray(self.lhs, dtype=np.complex128)
        rhs = np.asarray(self.rhs, dtype=np.complex128)
        if lhs.ndim != 2 or rhs.shape != (lhs.shape[0],):
            raise ValueError("lhs must be 2-d with matching rhs length")
        if lhs.shape[1] % self.num_maps:
            raise ValueError("column count must split evenly across maps")
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n(self) -> int:
        return self.lhs.shape[1] // self.num_maps


def slice_matrix(op: FredholmMatrix, sens: CoilStack, column: int) -> np.ndarray:
    """Stacked system matrix of one column for all coils and maps."""
    if sens.kind != "sensitivity":
        raise ValueError("expected a sensitivity stack")
    if sens.n != op.n:
        raise ValueError("sensitivity rows must match the operator")
    if not 0 <= column < sens.m:
        raise ValueError("column index out of range")
    cols = sens.data[:, :, :, column]
    blocks = [
        np.hstack([op.matrix * cols[j, q][None, :] for q in range(sens.maps)])
        for j in range(sens.coils)
    ]
    return np.vstack(blocks)


def assemble_slice(
    op: FredholmMatrix,
    sens: CoilStack,
    images: CoilStack,
    column: int,
) -> SliceSystem:
    """Build the per-column system ``lhs @ f = rhs`` from prepared data."""
    if images.kind != "image":
        raise ValueError("expected an image stack for the data")
    if images.maps != 1:
        raise ValueError("data stacks carry a single map per coil")
    if images.coils != sens.coils:
        raise ValueError("data and sensitivities disagree on coil count")
    if (images.n, images.m) != (sens.n, sens.m):
        raise ValueError("data and sensitivities disagree on grid size")
    lhs = slice_matrix(op, sens, column)
    rhs = images.data[:, 0, :, column].reshape(-1)
    return SliceSystem(
        lhs=lhs,
        rhs=rhs,
        column=column,
        num_maps=sens.maps,
        sens=sens.data[:, :, :, column].copy(),
    )


@dataclass(frozen=True)
class RealifiedSystem:
    """Real form of a complex system for real-valued optimizers.

    ``matrix = [[Re C, -Im C], [Im C, Re C]]`` acting on stacked
    ``[Re f; Im f]``, with ``rhs = [Re b; Im b]``.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    n: int
    num_maps: int


def realify(system: SliceSystem) -> RealifiedSystem:
    """Convert a complex slice system to its real block form."""
    c, b = system.lhs, system.rhs
    matrix = np.block([[c.real, -c.imag], [c.imag, c.real]])
    rhs = np.concatenate([b.real, b.imag])
    return RealifiedSystem(
        matrix=matrix, rhs=rhs, n=system.n, num_maps=system.num_maps
    )
