"""Fast-rate prediction: a Kalman pass over the last ``2^J`` samples.

The state is the row of the wavelet approximation matrix (one value per
level), it evolves as a random walk (``F = I``), and the observation is
``z(k) = w . x(k) + b(k) + noise`` with ``w`` and ``R`` from the latest
hyper-parameter snapshot and ``b(k)`` the tremor part of the window.

The filter restarts on every call from the first approximation row with
``P0 = var * I`` and process noise ``Q = q_scale * var * I``, where ``var``
is the variance of the snapshot's analysis window. Tying both to the
snapshot rather than the short window keeps the prediction linear in the
window for fixed hyper-parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _accel
from .hpa import HyperParameters
from .signal import WakeConfig, as_window
from .spectral import sharp_highpass
from .wavelet import basis_for, build_approximation_matrix

# relative floor keeping S > 0 on degenerate (e.g. constant) windows
VARIANCE_FLOOR = 1e-12


class DegenerateModelError(ValueError):
    pass


@dataclass(frozen=True)
class KalmanModel:
    H: np.ndarray
    Q: np.ndarray
    R: float

    @property
    def dim(self):
        return self.H.size

    @classmethod
    def isotropic(cls, weights, q, R):
        w = np.asarray(weights, dtype=float)
        return cls(w, q * np.eye(w.size), float(R))


@dataclass(frozen=True)
class KalmanState:
    x: np.ndarray
    P: np.ndarray
    k: int = 0


def kalman_predict(state: KalmanState, model: KalmanModel) -> KalmanState:
    # F = I: the mean carries over and only the covariance grows
    return KalmanState(state.x, state.P + model.Q, state.k + 1)


def kalman_update(state: KalmanState, model: KalmanModel, z: float, bias: float) -> KalmanState:
    H = model.H
    PH = state.P @ H
    S = float(H @ PH) + model.R
    if not S > 0.0:
        raise DegenerateModelError(f"innovation variance S = {S} is not positive")
    r = z - float(H @ state.x) - bias
    K = PH / S
    P = state.P - np.outer(K, PH)
    P = 0.5 * (P + P.T)
    return KalmanState(state.x + K * r, P, state.k)


def filter_window_numpy(z, bias, H, x0, P0, q, R):
    """Run predict/update over every sample of ``z``; return the final state."""
    model = KalmanModel.isotropic(H, q, R)
    state = KalmanState(np.array(x0, dtype=float), np.array(P0, dtype=float), 0)
    for zk, bk in zip(z, bias):
        state = kalman_update(kalman_predict(state, model), model, zk, bk)
    return state.x, state.P


def _filter_window_loops(z, bias, H, x0, P0, q, R):
    J = H.size
    x = x0.copy()
    P = P0.copy()
    PH = np.empty(J)
    for k in range(z.size):
        for i in range(J):
            P[i, i] += q
        S = R
        hx = 0.0
        for i in range(J):
            acc = 0.0
            for j in range(J):
                acc += P[i, j] * H[j]
            PH[i] = acc
            S += H[i] * acc
            hx += H[i] * x[i]
        if not S > 0.0:
            return x, P, False
        r = z[k] - hx - bias[k]
        for i in range(J):
            x[i] += PH[i] / S * r
        for i in range(J):
            for j in range(i, J):
                v = 0.5 * ((P[i, j] - PH[i] * PH[j] / S) + (P[j, i] - PH[j] * PH[i] / S))
                P[i, j] = v
                P[j, i] = v
    return x, P, True


_filter_window_jit = _accel.njit(_filter_window_loops)


def filter_window(z, bias, H, x0, P0, q, R):
    """Dispatch to the compiled loop when numba is active, else numpy."""
    if _filter_window_jit is None:
        return filter_window_numpy(z, bias, H, x0, P0, q, R)
    x, P, ok = _filter_window_jit(
        np.ascontiguousarray(z, dtype=np.float64),
        np.ascontiguousarray(bias, dtype=np.float64),
        np.ascontiguousarray(H, dtype=np.float64),
        np.ascontiguousarray(x0, dtype=np.float64),
        np.ascontiguousarray(P0, dtype=np.float64),
        float(q),
        float(R),
    )
    if not ok:
        raise DegenerateModelError("innovation variance S is not positive")
    return x, P


@dataclass(frozen=True)
class RtpResult:
    v_pred: float
    last_bias: float
    state: KalmanState


def linear_trend(x):
    """Least-squares straight line through ``x`` evaluated at each sample."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return x.copy()
    t = np.arange(n) - 0.5 * (n - 1)
    slope = float(t @ x) / float(t @ t)
    return float(x.mean()) + slope * t


def rtp_bias(window, f_d, detrend=True):
    """Known tremor offset ``b(k)`` over the prediction window.

    The high-pass at ``f_d`` is applied after removing the window's linear
    trend, which is counted as voluntary motion.
    """
    w = as_window(window)
    if not detrend:
        return sharp_highpass(w, f_d).values
    return sharp_highpass(w.with_values(w.values - linear_trend(w.values)), f_d).values


def run_rtp(window, hp: HyperParameters, config: WakeConfig, bias=None) -> RtpResult:
    """One-sample-ahead voluntary prediction from the last ``2^J`` samples.

    ``bias`` overrides the per-step tremor offset (defaults to
    :func:`rtp_bias` of the window at ``hp.f_d``).
    """
    w = as_window(window)
    J = config.levels
    if len(w) != 2 ** J:
        raise ValueError(f"RTP window must have 2^J = {2 ** J} samples, got {len(w)}")
    if hp.weights.size != J:
        raise ValueError(f"weights have {hp.weights.size} entries, expected {J}")
    z = w.values
    A = build_approximation_matrix(w, basis_for(config.wavelet_name), J)
    b = rtp_bias(w, hp.f_d, config.bias_detrend) if bias is None else np.asarray(bias, dtype=float)
    var = hp.window_var
    floor = VARIANCE_FLOOR * max(var, np.finfo(float).tiny)
    q = config.q_scale * var
    R = max(hp.R, floor)
    P0 = max(var, floor) * np.eye(J)
    x, P = filter_window(z, b, hp.weights, A[0], P0, q, R)
    # final time update to k = 2^J + 1 (F = I leaves the mean unchanged)
    state = KalmanState(x, P + q * np.eye(J), z.size + 1)
    return RtpResult(float(hp.weights @ x), float(b[-1]), state)


def with_weights(hp: HyperParameters, weights) -> HyperParameters:
    return replace(hp, weights=np.asarray(weights, dtype=float))
