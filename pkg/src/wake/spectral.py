"""Autoregressive spectral estimation, valley detection and FFT high-pass."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .signal import SignalWindow, as_window

log = logging.getLogger(__name__)

DEFAULT_GRID = 1024
REFLECTION_TOL = 1e-12


class SpectralError(ValueError):
    pass


class NoValleyError(SpectralError):
    """The power curve has no interior minimum in the search band."""


@dataclass(frozen=True)
class ArModel:
    """AR fit ``x(n) + sum_u a_u x(n-u) = w(n)`` with ``var(w) = noise_variance``."""

    coefficients: np.ndarray
    noise_variance: float
    reflection: np.ndarray

    @property
    def order(self):
        return self.coefficients.size


@dataclass(frozen=True)
class PsdEstimate:
    frequencies: np.ndarray
    power: np.ndarray
    model: ArModel
    fs: float


@dataclass(frozen=True)
class CutoffFrequency:
    f_d: float
    valley_power: float
    search_band: tuple
    is_valley: bool = True


def autocorrelation(window, max_lag: int) -> np.ndarray:
    """Biased autocorrelation ``(1/L) sum_n x(n) x(n+tau)`` for ``tau = 0..max_lag``."""
    x = as_window(window).values
    L = x.size
    if max_lag < 0 or max_lag >= L:
        raise SpectralError(f"max_lag must lie in [0, {L - 1}], got {max_lag}")
    return np.array([np.dot(x[:L - tau], x[tau:]) for tau in range(max_lag + 1)]) / L


def levinson_durbin(autocorr, p: int) -> ArModel:
    """Solve the order-``p`` Yule-Walker equations by the Levinson-Durbin recursion."""
    r = np.asarray(autocorr, dtype=float)
    if p < 1:
        raise SpectralError("order p must be >= 1")
    if r.size < p + 1:
        raise SpectralError(f"need {p + 1} autocorrelation lags, got {r.size}")
    if not r[0] > 0:
        raise SpectralError(f"zero-lag autocorrelation must be positive, got {r[0]}")
    a = np.zeros(p)
    k = np.zeros(p)
    err = r[0]
    for m in range(p):
        acc = r[m + 1] + np.dot(a[:m], r[m:0:-1])
        km = -acc / err
        if abs(km) >= 1.0 - REFLECTION_TOL:
            raise SpectralError(f"singular Levinson step {m + 1}: |k| = {abs(km):.16g}")
        a[:m] = a[:m] + km * a[:m][::-1]
        a[m] = km
        k[m] = km
        err *= 1.0 - km * km
    return ArModel(a, float(err), k)


def ar_spectrum(model: ArModel, frequencies, fs: float) -> np.ndarray:
    """Evaluate ``sigma^2 / |1 + sum_u a_u exp(-j 2 pi f u / fs)|^2``."""
    f = np.asarray(frequencies, dtype=float)
    u = np.arange(1, model.order + 1)
    denom = 1.0 + np.exp(-2j * np.pi * np.outer(f / fs, u)) @ model.coefficients
    return model.noise_variance / np.abs(denom) ** 2


def yule_walker_psd(window, p: int, grid: int = DEFAULT_GRID) -> PsdEstimate:
    w = as_window(window)
    if len(w) <= p:
        raise SpectralError(f"window length {len(w)} must exceed AR order {p}")
    model = levinson_durbin(autocorrelation(w, p), p)
    freqs = np.linspace(0.0, w.fs / 2.0, grid)
    return PsdEstimate(freqs, ar_spectrum(model, freqs, w.fs), model, w.fs)


def detect_cutoff(psd: PsdEstimate, band, fallback: bool = True) -> CutoffFrequency:
    """Locate the valley separating the voluntary band from the tremor peak.

    The tremor peak is taken as the strongest interior local maximum of the
    power inside ``band`` (or the band maximum when there is none).
    Candidates are the interior local minima below that peak in frequency,
    i.e. between the low-frequency motion and the tremor; the deepest wins.
    With no candidate the band argmin is used (warning logged), or
    :class:`NoValleyError` is raised when ``fallback`` is off.
    """
    lo, hi = float(band[0]), float(band[1])
    f, pw = psd.frequencies, psd.power
    if lo >= hi:
        raise SpectralError(f"empty search band [{lo}, {hi}]")
    if lo < f[0] - 1e-12 or hi > f[-1] + 1e-12:
        raise SpectralError(f"band [{lo}, {hi}] outside PSD range [{f[0]}, {f[-1]}]")
    idx = np.flatnonzero((f >= lo) & (f <= hi))
    if idx.size == 0:
        raise SpectralError(f"no PSD grid point inside [{lo}, {hi}]")
    seg = pw[idx]
    if seg.size >= 3:
        maxima = np.flatnonzero((seg[1:-1] > seg[:-2]) & (seg[1:-1] >= seg[2:])) + 1
    else:
        maxima = np.empty(0, dtype=int)
    peak = int(maxima[np.argmax(seg[maxima])]) if maxima.size else int(np.argmax(seg))
    if peak >= 2:
        head = seg[:peak + 1]
        inner = np.flatnonzero((head[1:-1] < head[:-2]) & (head[1:-1] <= head[2:])) + 1
    else:
        inner = np.empty(0, dtype=int)
    if inner.size:
        best = inner[np.argmin(seg[inner])]
        return CutoffFrequency(float(f[idx[best]]), float(seg[best]), (lo, hi), True)
    if not fallback:
        raise NoValleyError(f"no valley in [{lo}, {hi}] Hz")
    best = int(np.argmin(seg))
    log.warning("no PSD valley in [%.3g, %.3g] Hz; using band minimum at %.3g Hz",
                lo, hi, f[idx[best]])
    return CutoffFrequency(float(f[idx[best]]), float(seg[best]), (lo, hi), False)


def highpass_mask(n: int, fs: float, f_d: float) -> np.ndarray:
    """Boolean mask over ``rfft`` bins keeping frequencies strictly above ``f_d``."""
    return np.fft.rfftfreq(n, 1.0 / fs) > f_d


def sharp_highpass(window, f_d: float, fs: float = None):
    """Zero every FFT bin with ``|f| <= f_d`` and transform back.

    The window is not tapered. Works on the one-sided spectrum, which is the
    symmetric two-sided mask applied to a real input, so the output is real.
    Returns the same type it was given (window or plain array); ``fs`` is
    only consulted for plain arrays.
    """
    w = as_window(window) if fs is None else as_window(window, fs=fs)
    if not 0.0 < f_d < w.fs / 2.0:
        raise SpectralError(f"cut-off {f_d} Hz must lie in (0, {w.fs / 2.0})")
    x = w.values
    spec = np.fft.rfft(x)
    spec[~highpass_mask(x.size, w.fs, f_d)] = 0.0
    y = np.fft.irfft(spec, n=x.size)
    if isinstance(window, SignalWindow):
        return window.with_values(y)
    return y
