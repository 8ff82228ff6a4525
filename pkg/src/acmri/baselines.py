"""Comparison reconstructions sharing the 2-D forward model.

Three methods: zero-filled root-sum-square, Tikhonov-regularized
least squares solved by conjugate gradient on the normal equations,
and 2-D smoothed-TV regularized least squares solved with the same
quasi-Newton contract as the slice solver.  All consume masked k-space
plus sensitivities and return the solver's ``ReconResult``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .coilstack import CoilStack
from .fourier import fftc, ifftc
from .geometry import Grid, SamplingMask
from .operators import prepare_data
from .solver import ReconResult, sos_combine

METHODS = ("zero_fill", "tikhonov", "tv2d")


@dataclass(frozen=True)
class BaselineSpec:
    method: str = "zero_fill"
    alpha: float = 0.0
    beta: float = 0.01
    max_iter: int = 200
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


def _check_shapes(f_maps: np.ndarray, sens: CoilStack, mask: SamplingMask):
    if sens.kind != "sensitivity":
        raise ValueError("expected a sensitivity stack")
    if f_maps.shape != (sens.maps, sens.n, sens.m):
        raise ValueError("map images must have shape (maps, n, m)")
    if mask.n != sens.n:
        raise ValueError("mask length must match the grid rows")


def forward_2d(f_maps: np.ndarray, sens: CoilStack, mask: SamplingMask) -> CoilStack:
    """Masked per-coil k-space of the map images.

    Coil ``j`` sees the centered 2-D DFT of ``sum_q s_jq * F_q`` with
    missing lines zeroed.
    """
    f_maps = np.asarray(f_maps, dtype=np.complex128)
    _check_shapes(f_maps, sens, mask)
    combined = (sens.data * f_maps[None, :, :, :]).sum(axis=1)
    kspace = fftc(combined, axes=(1, 2))
    kspace[:, ~mask.acquired, :] = 0.0
    return CoilStack.from_images(kspace, kind="kspace")


def adjoint_2d(kspace: CoilStack, sens: CoilStack, mask: SamplingMask) -> np.ndarray:
    """Adjoint of :func:`forward_2d` (verified by inner-product tests)."""
    if kspace.kind != "kspace" or kspace.maps != 1:
        raise ValueError("expected a single-map kspace stack")
    if (kspace.coils, kspace.n, kspace.m) != (sens.coils, sens.n, sens.m):
        raise ValueError("kspace and sensitivities disagree on shape")
    masked = kspace.data[:, 0].copy()
    masked[:, ~mask.acquired, :] = 0.0
    images = ifftc(masked, axes=(1, 2))
    return (np.conj(sens.data) * images[:, None, :, :]).sum(axis=0)


def _cg_hermitian(apply_op, rhs, max_iter, tol, callback=None):
    """Conjugate gradient for a Hermitian positive (semi)definite map.

    Returns ``(x, iterations, converged, failed)``; a non-finite
    residual stops the iteration and marks failure instead of raising.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    target = tol * np.sqrt(float(np.vdot(rhs, rhs).real))
    if np.sqrt(rs) <= target:
        return x, 0, True, False
    for it in range(1, max_iter + 1):
        op_p = apply_op(p)
        denom = float(np.vdot(p, op_p).real)
        if not np.isfinite(denom) or denom <= 0:
            return x, it - 1, False, not np.isfinite(denom)
        step = rs / denom
        x = x + step * p
        r = r - step * op_p
        rs_new = float(np.vdot(r, r).real)
        if not np.isfinite(rs_new):
            return x, it, False, True
        if callback is not None:
            callback(x)
        if np.sqrt(rs_new) <= target:
            return x, it, True, False
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, max_iter, False, False


def _tikhonov(data, sens, mask, spec, callback=None):
    b = data.data.copy()
    b[:, :, ~mask.acquired, :] = 0.0
    b = CoilStack(data=b, kind="kspace")
    rhs = adjoint_2d(b, sens, mask)

    def apply_normal(f_maps):
        back = adjoint_2d(forward_2d(f_maps, sens, mask), sens, mask)
        return back + spec.alpha * f_maps

    x, iterations, converged, failed = _cg_hermitian(
        apply_normal, rhs, spec.max_iter, spec.tolerance, callback=callback
    )
    return x, {
        "method": "tikhonov",
        "iterations": iterations,
        "converged": converged,
        "failed": failed,
    }


def _tv2d_value_grad(f_maps, beta):
    total = 0.0
    grad = np.zeros_like(f_maps)
    for part in (f_maps.real, f_maps.imag):
        d0 = np.diff(part, axis=1)
        d1 = np.diff(part, axis=2)
        total += float((d0 * d0).sum() + (d1 * d1).sum())
    value = float(np.sqrt(total + beta * beta))
    for take, put in ((np.real, 1.0), (np.imag, 1j)):
        part = take(f_maps)
        d0 = np.diff(part, axis=1)
        d1 = np.diff(part, axis=2)
        g = np.zeros(part.shape)
        g[:, 1:, :] += d0 / value
        g[:, :-1, :] -= d0 / value
        g[:, :, 1:] += d1 / value
        g[:, :, :-1] -= d1 / value
        grad += put * g
    return value, grad


def tv2d_objective(
    z: np.ndarray,
    data_masked: CoilStack,
    sens: CoilStack,
    mask: SamplingMask,
    alpha: float,
    beta: float,
):
    """Value/gradient of the 2-D TV-regularized objective in stacked
    real form (used by the optimizer and the gradient tests)."""
    shape = (sens.maps, sens.n, sens.m)
    half = z.size // 2
    f_maps = (z[:half] + 1j * z[half:]).reshape(shape)
    residual = forward_2d(f_maps, sens, mask).data - data_masked.data
    value = float((np.abs(residual) ** 2).sum())
    back = adjoint_2d(
        CoilStack(data=residual, kind="kspace"), sens, mask
    )
    grad_c = 2.0 * back
    if alpha > 0:
        tv, tv_grad = _tv2d_value_grad(f_maps, beta)
        value += alpha * tv
        grad_c += alpha * tv_grad
    flat = grad_c.reshape(-1)
    return value, np.concatenate([flat.real, flat.imag])


def _tv2d(data, sens, mask, spec):
    b = data.data.copy()
    b[:, :, ~mask.acquired, :] = 0.0
    b = CoilStack(data=b, kind="kspace")
    x0c = adjoint_2d(b, sens, mask).reshape(-1)
    x0 = np.concatenate([x0c.real, x0c.imag])

    failure = {}

    def fun(z):
        value, grad = tv2d_objective(z, b, sens, mask, spec.alpha, spec.beta)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise _NonFinite
        return value, grad

    try:
        result = minimize(
            fun,
            np.nan_to_num(x0, posinf=0.0, neginf=0.0),
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": spec.max_iter,
                "maxcor": 10,
                "gtol": spec.tolerance,
                "ftol": 1e-14,
            },
        )
    except _NonFinite:
        z = np.nan_to_num(x0, posinf=0.0, neginf=0.0)
        failure = {"failed": True, "iterations": 0, "converged": False}
    else:
        z = result.x
        failure = {
            "failed": False,
            "iterations": int(result.nit),
            "converged": bool(result.success),
        }
    half = z.size // 2
    f_maps = (z[:half] + 1j * z[half:]).reshape(sens.maps, sens.n, sens.m)
    return f_maps, {"method": "tv2d", **failure}


class _NonFinite(RuntimeError):
    pass


def reconstruct_baseline(
    data: CoilStack,
    sens: CoilStack,
    mask: SamplingMask,
    spec: BaselineSpec,
    callback=None,
) -> ReconResult:
    """Run one baseline on masked k-space data.

    ``callback``, if given, is forwarded to the Tikhonov CG iteration
    (one call per iterate) for convergence tracking.
    """
    if data.kind != "kspace":
        raise ValueError("baselines consume kspace data")
    if data.maps != 1:
        raise ValueError("data stacks carry a single map per coil")
    grid = Grid(n=data.n, m=data.m)
    if spec.method == "zero_fill":
        magnitude = sos_combine(prepare_data(data, grid))
        return ReconResult(
            magnitude=magnitude,
            map_images=None,
            diagnostics=({"method": "zero_fill", "failed": False},),
            method="zero_fill",
        )
    if (sens.n, sens.m) != (grid.n, grid.m) or sens.coils != data.coils:
        raise ValueError("data and sensitivities disagree on shape")
    if spec.method == "tikhonov":
        f_maps, diag = _tikhonov(data, sens, mask, spec, callback=callback)
    else:
        f_maps, diag = _tv2d(data, sens, mask, spec)
    magnitude = np.sqrt((np.abs(f_maps) ** 2).sum(axis=0))
    return ReconResult(
        magnitude=magnitude,
        map_images=f_maps,
        diagnostics=(diag,),
        method=spec.method,
    )
