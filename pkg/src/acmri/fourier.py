"""Centered, unitary discrete Fourier transforms.

All k-space handling in this package goes through these helpers so that
the indexing convention stays in one place: after ``fftc`` the row with
array index ``j`` holds the angular frequency ``2*pi*(j - n//2)``, i.e.
the zero-frequency line sits at index ``n//2``.
"""

from __future__ import annotations

import numpy as np


def fftc(x: np.ndarray, axes=None) -> np.ndarray:
    """Centered unitary FFT over the given axes (default: all)."""
    if axes is None:
        axes = tuple(range(x.ndim))
    elif np.isscalar(axes):
        axes = (axes,)
    return np.fft.fftshift(
        np.fft.fftn(np.fft.ifftshift(x, axes=axes), axes=axes, norm="ortho"),
        axes=axes,
    )


def ifftc(x: np.ndarray, axes=None) -> np.ndarray:
    """Inverse of :func:`fftc`."""
    if axes is None:
        axes = tuple(range(x.ndim))
    elif np.isscalar(axes):
        axes = (axes,)
    return np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(x, axes=axes), axes=axes, norm="ortho"),
        axes=axes,
    )


def dft_matrix(n: int) -> np.ndarray:
    """Unitary centered DFT as an ``n x n`` matrix.

    ``dft_matrix(n) @ f`` equals ``fftc(f)`` for a length-``n`` vector, so
    ``W.conj().T @ W = I`` and row ``j`` probes frequency index ``j - n//2``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return fftc(np.eye(n), axes=0)
