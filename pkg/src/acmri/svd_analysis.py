"""Singular-value stability analysis of the per-column systems.

The full measurement matrix is block diagonal over image columns, so
its SVD is the union of the per-column SVDs.  Everything here works on
that pooled spectrum: the condition number ``kappa``, the effective
null-space dimension ``null_dim`` (singular values below a threshold),
a truncated pseudoinverse, and the per-column right singular vectors of
the smallest singular value, which show where reconstruction is least
stable.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coilstack import CoilStack
from .geometry import Grid, SamplingMask
from .operators import build_matrix_dft, slice_matrix

DEFAULT_THRESHOLD = 0.01


@dataclass(frozen=True)
class SvdReport:
    """Pooled SVD summary of a block-diagonal system.

    ``sigma`` is the pooled spectrum in non-increasing order and
    ``block_sigma`` the per-block spectra.  ``null_dim`` counts pooled
    singular values strictly below ``t``; ``null_dim_argmin`` is the
    alternative form ``N - argmin_i |sigma_i - t|`` (1-based, first
    minimizer on ties).  ``rsv`` has one unit-norm column per block:
    the right singular vector of that block's smallest singular value,
    rotated so its largest-magnitude entry is real and positive.
    """

    sigma: np.ndarray
    block_sigma: tuple
    kappa: float
    null_dim: int
    null_dim_argmin: int
    t: float
    rsv: np.ndarray


def null_dim_count(sigma: np.ndarray, t: float) -> int:
    """Number of singular values strictly below ``t``."""
    return int(np.count_nonzero(np.asarray(sigma) < t))


def null_dim_argmin(sigma: np.ndarray, t: float) -> int:
    """``N - argmin_i |sigma_i - t|`` over the descending spectrum."""
    sigma = np.asarray(sigma)
    return sigma.size - (int(np.argmin(np.abs(sigma - t))) + 1)


def _normalize_phase(v: np.ndarray) -> np.ndarray:
    peak = v[np.argmax(np.abs(v))]
    if np.abs(peak) > 0:
        v = v * (np.conj(peak) / np.abs(peak))
    return v


def svd_blocks(blocks, t: float = DEFAULT_THRESHOLD) -> SvdReport:
    """Pooled SVD report for a list of same-width blocks.

    Parameters
    ----------
    blocks : sequence of numpy.ndarray
        Per-column matrices; all must share the same column count.
    t : float
        Threshold for the null-space dimension.

    Returns
    -------
    SvdReport
    """
    blocks = [np.asarray(b) for b in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    ncols = blocks[0].shape[1]
    if any(b.ndim != 2 or b.shape[1] != ncols for b in blocks):
        raise ValueError("all blocks must be 2-d with equal column counts")
    block_sigma = []
    rsv = np.empty((ncols, len(blocks)), dtype=np.complex128)
    for i, block in enumerate(blocks):
        _, s, vh = np.linalg.svd(block, full_matrices=False)
        block_sigma.append(s)
        rsv[:, i] = _normalize_phase(vh[-1].conj())
    pooled = np.sort(np.concatenate(block_sigma))[::-1]
    smallest = pooled[-1]
    kappa = float(pooled[0] / smallest) if smallest > 0 else np.inf
    return SvdReport(
        sigma=pooled,
        block_sigma=tuple(block_sigma),
        kappa=kappa,
        null_dim=null_dim_count(pooled, t),
        null_dim_argmin=null_dim_argmin(pooled, t),
        t=t,
        rsv=rsv,
    )


def pseudoinverse_apply(
    blocks,
    b: np.ndarray,
    rank: Optional[int] = None,
    threshold: Optional[float] = None,
) -> np.ndarray:
    """Apply the (optionally truncated) pseudoinverse of the block system.

    ``b`` concatenates the per-block data chunks.  Retained singular
    values contribute ``(u_i^H b / sigma_i) v_i``; ``rank`` keeps the
    largest ``rank`` pooled values, ``threshold`` keeps values strictly
    above it, and with neither given all positive values are kept (the
    exact pseudoinverse).  If truncation removes everything the zero
    vector is returned with a warning.
    """
    blocks = [np.asarray(b_, dtype=np.complex128) for b_ in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    b = np.asarray(b, dtype=np.complex128)
    rows = sum(blk.shape[0] for blk in blocks)
    if b.shape != (rows,):
        raise ValueError("data length must match stacked block rows")

    svds = [np.linalg.svd(blk, full_matrices=False) for blk in blocks]
    pooled = []
    for bi, (_, s, _) in enumerate(svds):
        pooled.extend((float(sv), bi, li) for li, sv in enumerate(s))
    pooled.sort(key=lambda rec: -rec[0])

    if rank is not None:
        if rank < 0:
            raise ValueError("rank must be nonnegative")
        retained = pooled[:rank]
    elif threshold is not None:
        retained = [rec for rec in pooled if rec[0] > threshold]
    else:
        retained = [rec for rec in pooled if rec[0] > 0]
    if not retained:
        warnings.warn("all singular values truncated; returning zeros")

    keep = [set() for _ in blocks]
    for _, bi, li in retained:
        keep[bi].add(li)

    out = np.zeros(sum(blk.shape[1] for blk in blocks), dtype=np.complex128)
    row = col = 0
    for bi, (blk, (u, s, vh)) in enumerate(zip(blocks, svds)):
        chunk = b[row : row + blk.shape[0]]
        coef = np.zeros(s.size, dtype=np.complex128)
        for li in keep[bi]:
            coef[li] = (u[:, li].conj() @ chunk) / s[li]
        out[col : col + blk.shape[1]] = vh.conj().T @ coef
        row += blk.shape[0]
        col += blk.shape[1]
    return out


@dataclass(frozen=True)
class SweepConfig:
    """One stability-sweep entry: a mask plus an optional coil subset."""

    label: str
    mask: SamplingMask
    coil_indices: Optional[tuple] = None
    num_maps: int = 1


@dataclass(frozen=True)
class SweepRow:
    label: str
    kappa: float
    null_dim: int
    t: float
    scan_time: float


def slice_blocks(
    mask: SamplingMask, sens: CoilStack, threads: int = 1
) -> list:
    """Per-column stacked system matrices for a mask/sensitivity pair."""
    grid = Grid(n=sens.n, m=sens.m)
    op = build_matrix_dft(mask, grid)
    columns = range(sens.m)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda i: slice_matrix(op, sens, i), columns))
    return [slice_matrix(op, sens, i) for i in columns]


def stability_sweep(
    configs,
    sens: CoilStack,
    t: float = DEFAULT_THRESHOLD,
    threads: int = 1,
    keep_reports: bool = False,
):
    """Pooled stability metrics for each configuration, in input order.

    Parameters
    ----------
    configs : sequence of SweepConfig
        Masks and coil subsets to evaluate against ``sens``.
    sens : CoilStack
        Sensitivity maps; subsets index into its coils.
    t : float
        Null-space threshold.
    threads : int
        Worker threads for per-column blocks; results are merged by
        column index so the output does not depend on scheduling.
    keep_reports : bool
        Also return the full :class:`SvdReport` per configuration.

    Returns
    -------
    list of SweepRow, or (rows, reports) when ``keep_reports``.
    """
    rows = []
    reports = []
    for cfg in configs:
        if cfg.mask.n != sens.n:
            raise ValueError(f"config {cfg.label!r}: mask does not match grid")
        sub = sens
        if cfg.coil_indices is not None:
            sub = sub.take_coils(list(cfg.coil_indices))
        if cfg.num_maps != sub.maps:
            sub = sub.take_maps(cfg.num_maps)
        report = svd_blocks(slice_blocks(cfg.mask, sub, threads=threads), t=t)
        rows.append(
            SweepRow(
                label=cfg.label,
                kappa=report.kappa,
                null_dim=report.null_dim,
                t=t,
                scan_time=cfg.mask.scan_time,
            )
        )
        if keep_reports:
            reports.append(report)
    if keep_reports:
        return rows, reports
    return rows
