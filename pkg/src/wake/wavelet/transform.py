"""Periodized multilevel DWT and per-level approximation reconstruction.

Each analysis stage computes ``c[i] = sum_k h[k] x[(2i + k) mod N]``
for the low- and high-pass filters, i.e. a circular correlation kept at
even positions. The stage matrix is orthogonal for even ``N``; odd inputs
are extended by repeating their last sample and trimmed on synthesis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..signal import SignalWindow, as_window
from .basis import WaveletBasis


class WaveletError(ValueError):
    pass


@dataclass(frozen=True)
class WaveletCoeffs:
    """Coefficients of a ``level``-stage decomposition.

    ``details[0]`` is the finest level (j = 1). ``lengths[j-1]`` is the
    length of the signal entering stage ``j``, so ``lengths[0]`` is the
    original length.
    """

    approx: np.ndarray
    details: Tuple[np.ndarray, ...]
    lengths: Tuple[int, ...]
    mode: str = "periodization"

    @property
    def level(self):
        return len(self.details)

    @property
    def original_length(self):
        return self.lengths[0]

    def replace_details(self, details):
        return WaveletCoeffs(self.approx, tuple(details), self.lengths, self.mode)


def _stage_index(n_even: int, K: int) -> np.ndarray:
    i = np.arange(n_even // 2)[:, None]
    k = np.arange(K)[None, :]
    return (2 * i + k) % n_even


def _analysis(x: np.ndarray, basis: WaveletBasis):
    if x.size % 2:
        x = np.append(x, x[-1])
    idx = _stage_index(x.size, basis.length)
    xs = x[idx]
    return xs @ basis.lo_d, xs @ basis.hi_d


def _synthesis(a: np.ndarray, d, basis: WaveletBasis, out_len: int) -> np.ndarray:
    n_even = 2 * a.size
    if out_len not in (n_even, n_even - 1):
        raise WaveletError(f"cannot synthesize length {out_len} from {a.size} coefficients")
    idx = _stage_index(n_even, basis.length)
    contrib = a[:, None] * basis.lo_d[None, :]
    if d is not None:
        contrib = contrib + d[:, None] * basis.hi_d[None, :]
    y = np.bincount(idx.ravel(), weights=contrib.ravel(), minlength=n_even)
    return y[:out_len]


def max_level(n: int) -> int:
    """Deepest decomposition allowed for a length-``n`` window (``n >= 2^J``)."""
    return int(np.floor(np.log2(n))) if n >= 1 else 0


def dwt(window, basis: WaveletBasis, J: int) -> WaveletCoeffs:
    x = as_window(window).values
    if J < 1:
        raise WaveletError("J must be >= 1")
    if x.size < 2 ** J:
        raise WaveletError(f"window of length {x.size} is shorter than 2^J = {2 ** J}")
    details: List[np.ndarray] = []
    lengths: List[int] = []
    a = x
    for _ in range(J):
        lengths.append(a.size)
        a, d = _analysis(a, basis)
        details.append(d)
    return WaveletCoeffs(a, tuple(details), tuple(lengths))


def _check_shapes(coeffs: WaveletCoeffs):
    J = coeffs.level
    if J < 1 or len(coeffs.lengths) != J:
        raise WaveletError("malformed coefficients: level/lengths mismatch")
    for j in range(J):
        expect = (coeffs.lengths[j] + 1) // 2
        if coeffs.details[j].size != expect:
            raise WaveletError(
                f"malformed coefficients: level {j + 1} detail has {coeffs.details[j].size}"
                f" values, expected {expect}"
            )
        if j + 1 < J and coeffs.lengths[j + 1] != expect:
            raise WaveletError(f"malformed coefficients: inconsistent length at level {j + 2}")
    if coeffs.approx.size != (coeffs.lengths[-1] + 1) // 2:
        raise WaveletError("malformed coefficients: approximation length mismatch")


def idwt(coeffs: WaveletCoeffs, basis: WaveletBasis, fs: float = None, start_index: int = 0):
    """Invert :func:`dwt`. Returns a :class:`SignalWindow` when ``fs`` is given, else an array."""
    _check_shapes(coeffs)
    a = coeffs.approx
    for j in range(coeffs.level - 1, -1, -1):
        a = _synthesis(a, coeffs.details[j], basis, coeffs.lengths[j])
    if fs is not None:
        return SignalWindow(a, start_index, fs)
    return a


def reconstruct_approximation(coeffs: WaveletCoeffs, j: int, basis: WaveletBasis) -> np.ndarray:
    """Level-``j`` approximation ``a_j``: inverse transform with details 1..j zeroed."""
    if not 1 <= j <= coeffs.level:
        raise WaveletError(f"level {j} outside 1..{coeffs.level}")
    details = [np.zeros_like(d) if lvl < j else d for lvl, d in enumerate(coeffs.details)]
    return idwt(coeffs.replace_details(details), basis)


def reconstruct_detail(coeffs: WaveletCoeffs, j: int, basis: WaveletBasis) -> np.ndarray:
    """Contribution of the level-``j`` detail coefficients alone."""
    if not 1 <= j <= coeffs.level:
        raise WaveletError(f"level {j} outside 1..{coeffs.level}")
    details = [d if lvl == j - 1 else np.zeros_like(d) for lvl, d in enumerate(coeffs.details)]
    zeroed = WaveletCoeffs(np.zeros_like(coeffs.approx), tuple(details), coeffs.lengths)
    return idwt(zeroed, basis)


def build_approximation_matrix(window, basis: WaveletBasis, J: int) -> np.ndarray:
    """Stack ``a_1 .. a_J`` as columns of an ``N x J`` (time-major) matrix.

    Rather than J full inverse transforms, each ``a_j`` is synthesized from
    the stage-``j`` approximation coefficients with zero details, which is
    the same vector by perfect reconstruction of the coarser stages.
    """
    x = as_window(window).values
    if J < 1:
        raise WaveletError("J must be >= 1")
    if x.size < 2 ** J:
        raise WaveletError(f"window of length {x.size} is shorter than 2^J = {2 ** J}")
    out = np.empty((x.size, J))
    lengths = []
    approx = []
    a = x
    for _ in range(J):
        lengths.append(a.size)
        a, _d = _analysis(a, basis)
        approx.append(a)
    for j in range(J):
        y = approx[j]
        for lvl in range(j, -1, -1):
            y = _synthesis(y, None, basis, lengths[lvl])
        out[:, j] = y
    return out


def approximation_operators(n: int, basis: WaveletBasis, J: int) -> np.ndarray:
    """Linear maps taking a length-``n`` window to each ``a_j``.

    Returns ``M`` of shape ``(J, n, n)`` with ``a_j = M[j-1] @ x``; useful
    when the same window length is decomposed many times.
    """
    eye = np.eye(n)
    M = np.empty((J, n, n))
    for col in range(n):
        M[:, :, col] = build_approximation_matrix(eye[col], basis, J).T
    return M
