"""Image-quality metrics over a region of interest.

Both metrics compare real (magnitude) images and only look at pixels
inside the ROI: the relative Euclidean error, and the mean structural
similarity over all 3x3 windows centered in the ROI.  Images are used
as-is; callers who want the usual [0, 1] intensity range normalize
before calling (the command-line driver divides by the truth's max).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SSIM_C1 = 0.0001
SSIM_C2 = 0.0009


@dataclass(frozen=True)
class Roi:
    """Boolean membership image marking the evaluation region."""

    inside: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.inside, dtype=bool)
        if arr.ndim != 2:
            raise ValueError("roi must be a 2-d boolean image")
        if not arr.any():
            raise ValueError("roi must be nonempty")
        arr.setflags(write=False)
        object.__setattr__(self, "inside", arr)


def default_roi(reference: np.ndarray, fraction: float = 0.05) -> Roi:
    """Support of ``reference``: pixels above ``fraction`` of its max.

    The thresholded set is morphologically closed with a 3x3 structuring
    element so thin interior gaps (e.g. between tissue classes) do not
    punch holes in the region.
    """
    from scipy.ndimage import binary_closing

    reference = np.abs(np.asarray(reference))
    peak = reference.max()
    if peak <= 0:
        raise ValueError("reference image is identically zero")
    mask = reference > fraction * peak
    closed = binary_closing(mask, structure=np.ones((3, 3), dtype=bool))
    # closing can only add pixels inside the support hull; keep the
    # original pixels too in case the border erodes on tiny images
    return Roi(inside=closed | mask)


def rel_error(truth: np.ndarray, est: np.ndarray, roi: Roi) -> float:
    """Relative Euclidean error of ``est`` against ``truth`` on the ROI."""
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    if truth.shape != est.shape or truth.shape != roi.inside.shape:
        raise ValueError("images and roi must share one shape")
    ref = truth[roi.inside]
    denom = np.linalg.norm(ref)
    if denom == 0:
        raise ValueError("truth restricted to the roi has zero norm")
    return float(np.linalg.norm(est[roi.inside] - ref) / denom)


def ssim_window(
    x: np.ndarray, y: np.ndarray, c1: float = SSIM_C1, c2: float = SSIM_C2
) -> float:
    """Structural similarity of two equal-size square patches.

    Means, variances, and the covariance use population (1/N^2)
    normalization.  The constants keep the ratio defined for constant
    patches.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("patches must be square and equal-size")
    if x.shape[0] < 2:
        raise ValueError("patches must be at least 2x2")
    mx, my = x.mean(), y.mean()
    vx = ((x - mx) ** 2).mean()
    vy = ((y - my) ** 2).mean()
    cxy = ((x - mx) * (y - my)).mean()
    return float(
        ((2 * mx * my + c1) * (2 * cxy + c2))
        / ((mx * mx + my * my + c1) * (vx + vy + c2))
    )


def ssim_mean(
    truth: np.ndarray,
    est: np.ndarray,
    roi: Roi,
    window: int = 3,
    c1: float = SSIM_C1,
    c2: float = SSIM_C2,
) -> float:
    """Mean SSIM over all windows whose center lies in the ROI.

    Windows that would extend past the image border are skipped rather
    than padded.  The window size must be odd.
    """
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    if truth.shape != est.shape or truth.shape != roi.inside.shape:
        raise ValueError("images and roi must share one shape")
    if window % 2 == 0 or window < 2:
        raise ValueError("window must be odd and >= 3")
    half = window // 2
    n, m = truth.shape
    if n < window or m < window:
        raise ValueError("image smaller than the window")

    win_t = np.lib.stride_tricks.sliding_window_view(truth, (window, window))
    win_e = np.lib.stride_tricks.sliding_window_view(est, (window, window))
    centers = roi.inside[half : n - half, half : m - half]
    if not centers.any():
        raise ValueError("roi contains no interior window centers")
    xt = win_t[centers].reshape(-1, window * window)
    xe = win_e[centers].reshape(-1, window * window)
    mx = xt.mean(axis=1)
    my = xe.mean(axis=1)
    vx = ((xt - mx[:, None]) ** 2).mean(axis=1)
    vy = ((xe - my[:, None]) ** 2).mean(axis=1)
    cxy = ((xt - mx[:, None]) * (xe - my[:, None])).mean(axis=1)
    scores = ((2 * mx * my + c1) * (2 * cxy + c2)) / (
        (mx * mx + my * my + c1) * (vx + vy + c2)
    )
    return float(scores.mean())
