"""Slow-rate hyper-parameter adjustment.

One pass over an ``L``-sample window estimates the AR spectrum, finds the
valley separating voluntary motion from tremor, splits the window with the
FFT high-pass at that frequency, and fits weights mapping the wavelet
approximations onto the voluntary part.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .signal import SignalWindow, WakeConfig, as_window
from .spectral import CutoffFrequency, detect_cutoff, sharp_highpass, yule_walker_psd
from .wavelet import basis_for, build_approximation_matrix

log = logging.getLogger(__name__)

GRAD_TOL = 1e-8
MAX_ITER = 500


class WeightFit(NamedTuple):
    weights: np.ndarray
    residual: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class HyperParameters:
    """Snapshot handed from the slow loop to the per-sample predictor."""

    weights: np.ndarray
    f_d: float
    voluntary_gt: np.ndarray
    tremor_gt: np.ndarray
    R: float
    window_start: int
    residual: float
    cutoff: Optional[CutoffFrequency] = None
    converged: bool = True
    version: int = 0
    # variance of the whole HPA window; scales the RTP noise covariances
    window_var: float = 1.0

    @property
    def levels(self):
        return self.weights.size


def rms_error(A, target, w):
    r = A @ w - target
    return float(np.sqrt(np.dot(r, r) / target.size))


def optimize_weights(A, voluntary_gt, warm_start=None, gtol: float = GRAD_TOL,
                     max_iter: int = MAX_ITER) -> WeightFit:
    """Minimise ``sqrt(mean((A w - gt)^2))`` over ``w`` by BFGS.

    Works on the mean squared residual, which has the same minimiser and a
    smooth gradient at zero residual. Because that objective is quadratic
    the line search is exact: along ``d`` the step is
    ``-(g . d) / (2/L * |A d|^2)``. Stops when the gradient infinity-norm
    drops below ``gtol`` times its natural scale (the larger of the initial
    gradient and the gradient at ``w = 0``).
    """
    A = np.asarray(A, dtype=float)
    gt = np.asarray(voluntary_gt, dtype=float)
    if A.ndim != 2 or A.shape[0] != gt.size:
        raise ValueError(f"shape mismatch: A {A.shape}, target {gt.shape}")
    L, J = A.shape
    if L < J:
        raise ValueError(f"need at least as many rows as weights, got {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(gt))):
        raise ValueError("non-finite input to weight optimisation")

    w = np.zeros(J) if warm_start is None else np.array(warm_start, dtype=float)
    if w.shape != (J,) or not np.all(np.isfinite(w)):
        w = np.zeros(J)
    scale = 2.0 / L
    r = A @ w - gt
    g = scale * (A.T @ r)
    # relative to the gradient size at w = 0 (or at the warm start if larger),
    # so rescaling A and the target together does not change the answer
    g_ref = max(float(np.max(np.abs(g))), scale * float(np.max(np.abs(A.T @ gt))))
    tol = gtol * g_ref if g_ref > 0 else 0.0
    H = np.eye(J)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) <= tol:
            converged = True
            it -= 1
            break
        d = -H @ g
        Ad = A @ d
        curv = scale * np.dot(Ad, Ad)
        slope = np.dot(g, d)
        if curv <= 0.0 or slope >= 0.0:
            # flat or non-descent direction: restart from steepest descent
            H = np.eye(J)
            d = -g
            Ad = A @ d
            curv = scale * np.dot(Ad, Ad)
            slope = np.dot(g, d)
            if curv <= 0.0:
                converged = True
                break
        alpha = -slope / curv
        s = alpha * d
        w = w + s
        r = r + alpha * Ad
        g_new = scale * (A.T @ r)
        y = g_new - g
        g = g_new
        sy = np.dot(s, y)
        if sy > 1e-300:
            rho = 1.0 / sy
            Hy = H @ y
            H = (H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                 + (rho * rho * np.dot(y, Hy) + rho) * np.outer(s, s))
    else:
        converged = np.max(np.abs(g)) <= tol
    if not converged:
        log.warning("weight optimisation stopped after %d iterations (|g|=%.3g)",
                    it, float(np.max(np.abs(g))))
    return WeightFit(w, rms_error(A, gt, w), bool(converged), it)


def split_window(window: SignalWindow, f_d: float):
    """Voluntary/tremor ground truth: high-pass above ``f_d`` and the remainder."""
    tremor = sharp_highpass(window, f_d).values
    return window.values - tremor, tremor


def run_hpa(window, config: WakeConfig, warm_start=None, version: int = 0) -> HyperParameters:
    """Execute one hyper-parameter adjustment over ``window``."""
    window = as_window(window)
    L = len(window)
    J = config.levels
    if L < max(2 ** J, config.ar_order + 1):
        raise ValueError(f"HPA window of length {L} too short for J={J}, p={config.ar_order}")
    psd = yule_walker_psd(window, config.ar_order, config.psd_grid_size)
    cut = detect_cutoff(psd, config.search_band(window.fs), fallback=config.cutoff_fallback)
    voluntary, tremor = split_window(window, cut.f_d)
    A = build_approximation_matrix(window, basis_for(config.wavelet_name), J)
    fit = optimize_weights(A, voluntary, warm_start)
    return HyperParameters(
        weights=fit.weights,
        f_d=cut.f_d,
        voluntary_gt=voluntary,
        tremor_gt=tremor,
        R=float(np.var(tremor)),
        window_start=window.start_index,
        residual=fit.residual,
        cutoff=cut,
        converged=fit.converged,
        version=version,
        window_var=float(np.var(window.values)),
    )
