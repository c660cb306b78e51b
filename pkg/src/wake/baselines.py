"""Band-limited Fourier linear combiner baselines (BMFLC and E-BMFLC).

Both filters model the measurement as a weighted sum of sines and cosines
on a fixed frequency grid and adapt the weights by LMS. The tremor estimate
at sample ``n`` uses the weights learnt from samples before ``n``, so the
filters are causal; the voluntary estimate is ``m - tremor``.

E-BMFLC spans ``0..f_max`` and leaks its weights towards zero by a memory
factor ``lambda`` each step. Only grid frequencies at or above the split
``f_d`` contribute to its tremor estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _accel
from .signal import MotionSignal

# abort when |w|^2 exceeds this multiple of the input power
DIVERGENCE_RATIO = 1e6


class FlcDivergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FlcConfig:
    """Dictionary and adaptation settings.

    ``band`` is ``(f_min, f_max)`` in Hz; with ``full_band`` the dictionary
    starts at 0 Hz instead of ``f_min``. ``mu`` is the LMS gain and ``lam``
    the memory factor (1 disables forgetting).
    """

    band: tuple = (6.0, 14.0)
    step: float = 0.5
    mu: float = 0.01
    lam: float = 0.995
    full_band: bool = False

    def __post_init__(self):
        lo, hi = (float(b) for b in self.band)
        object.__setattr__(self, "band", (lo, hi))
        if not 0.0 <= lo < hi:
            raise ValueError(f"invalid band {self.band}")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"memory factor must lie in (0, 1], got {self.lam}")

    def frequencies(self):
        lo, hi = self.band
        if self.full_band:
            lo = 0.0
        n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
        return lo + self.step * np.arange(n)

    @property
    def n_weights(self):
        return 2 * self.frequencies().size

    def check(self, fs):
        if self.band[1] > fs / 2.0:
            raise ValueError(f"band {self.band} exceeds Nyquist {fs / 2.0}")
        return self


# Gains picked by a seeded grid search on the Signal1 analogue, each filter
# at its own optimum (BMFLC is flat for mu in [5e-4, 2e-3]).
BMFLC_DEFAULT = FlcConfig(mu=0.002)
EBMFLC_DEFAULT = FlcConfig(mu=0.01, lam=0.995, full_band=True)


def reference_vector(n, freqs, fs):
    """``[sin, cos]`` pairs per frequency at sample ``n``, interleaved."""
    ph = 2.0 * np.pi * np.asarray(freqs) * n / fs
    out = np.empty(2 * ph.size)
    out[0::2] = np.sin(ph)
    out[1::2] = np.cos(ph)
    return out


def _flc_numpy(x, freqs, fs, mu, lam, mask, limit):
    w = np.zeros(2 * freqs.size)
    sel = np.repeat(mask, 2)
    out = np.zeros(x.size)
    for n in range(x.size):
        xr = reference_vector(n, freqs, fs)
        contrib = w * xr
        y = contrib.sum()
        out[n] = contrib[sel].sum()
        w = lam * w + 2.0 * mu * (x[n] - y) * xr
        if w @ w > limit:
            return out, n
    return out, -1


def _flc_loops(x, freqs, fs, mu, lam, mask, limit):
    K = freqs.size
    w = np.zeros(2 * K)
    xr = np.empty(2 * K)
    out = np.zeros(x.size)
    for n in range(x.size):
        y = 0.0
        t = 0.0
        for k in range(K):
            ph = 2.0 * np.pi * freqs[k] * n / fs
            s = np.sin(ph)
            c = np.cos(ph)
            xr[2 * k] = s
            xr[2 * k + 1] = c
            v = w[2 * k] * s + w[2 * k + 1] * c
            y += v
            if mask[k]:
                t += v
        out[n] = t
        g = 2.0 * mu * (x[n] - y)
        e = 0.0
        for i in range(2 * K):
            w[i] = lam * w[i] + g * xr[i]
            e += w[i] * w[i]
        if e > limit:
            return out, n
    return out, -1


_flc_jit = _accel.njit(_flc_loops)


def _run(x, freqs, fs, mu, lam, mask):
    x = np.ascontiguousarray(x, dtype=np.float64)
    limit = DIVERGENCE_RATIO * max(float(np.mean(x * x)), np.finfo(float).tiny)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    kernel = _flc_numpy if _flc_jit is None else _flc_jit
    out, bad = kernel(x, freqs, float(fs), float(mu), float(lam), mask, limit)
    if bad >= 0:
        raise FlcDivergenceError(
            f"weights diverged at sample {bad} (|w|^2 > {DIVERGENCE_RATIO:g} x input power); "
            f"reduce mu (now {mu})"
        )
    return out


def bmflc_run(signal: MotionSignal, cfg: Optional[FlcConfig] = None) -> np.ndarray:
    """Tremor estimate of a band-limited LMS combiner over ``cfg.band``."""
    cfg = BMFLC_DEFAULT if cfg is None else cfg
    cfg.check(signal.fs)
    freqs = FlcConfig(cfg.band, cfg.step, cfg.mu, 1.0, False).frequencies()
    return _run(signal.samples, freqs, signal.fs, cfg.mu, 1.0, np.ones(freqs.size, bool))


def ebmflc_run(signal: MotionSignal, cfg: Optional[FlcConfig], f_d: float) -> np.ndarray:
    """Tremor estimate of the full-range combiner split at ``f_d``.

    The dictionary covers ``0..f_max`` when ``cfg.full_band`` is set (the
    usual case) and ``cfg.band`` otherwise; the tremor part sums the grid
    frequencies ``>= f_d``.
    """
    cfg = EBMFLC_DEFAULT if cfg is None else cfg
    cfg.check(signal.fs)
    if not 0.0 < f_d < cfg.band[1]:
        raise ValueError(f"split frequency {f_d} must lie in (0, {cfg.band[1]})")
    freqs = cfg.frequencies()
    mask = freqs >= f_d - 1e-9
    return _run(signal.samples, freqs, signal.fs, cfg.mu, cfg.lam, mask)


def voluntary_estimate(signal: MotionSignal, tremor) -> np.ndarray:
    return signal.samples - np.asarray(tremor, dtype=float)
