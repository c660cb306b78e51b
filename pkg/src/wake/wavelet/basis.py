from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._coeffs import DEC_LO

SUPPORTED = tuple(DEC_LO)


class UnknownWaveletError(KeyError):
    pass


@dataclass(frozen=True)
class WaveletBasis:
    """Orthogonal two-channel filter bank (dyadic: scale 2, shift 1)."""

    name: str
    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray
    scale: int = 2
    shift: int = 1

    @property
    def length(self):
        return self.lo_d.size


def qmf(lo):
    """High-pass mirror filter ``h(k) = (-1)^k lo(len-1-k)``."""
    lo = np.asarray(lo, dtype=float)
    signs = np.where(np.arange(lo.size) % 2 == 0, 1.0, -1.0)
    return signs * lo[::-1]


def basis_for(name: str) -> WaveletBasis:
    key = name.strip().lower()
    if key == "db1":
        key = "haar"
    if key not in DEC_LO:
        raise UnknownWaveletError(
            f"unknown wavelet {name!r}; supported: {', '.join(SUPPORTED)}"
        )
    lo = np.array(DEC_LO[key])
    hi = qmf(lo)
    for arr in (lo, hi):
        arr.setflags(write=False)
    return WaveletBasis(key, lo, hi, lo[::-1].copy(), hi[::-1].copy())


def check_basis(basis: WaveletBasis, tol: float = 1e-10):
    """Return a dict of invariant residuals; raise if any exceeds ``tol``."""
    lo, hi = basis.lo_d, basis.hi_d
    K = lo.size
    res = {
        "qmf": float(np.max(np.abs(hi - qmf(lo)))),
        "dc_gain": float(abs(lo.sum() - np.sqrt(2.0))),
    }
    worst = 0.0
    for m in range(0, K // 2):
        dot = float(np.dot(lo[:K - 2 * m], lo[2 * m:]))
        worst = max(worst, abs(dot - (1.0 if m == 0 else 0.0)))
    res["orthogonality"] = worst
    bad = {k: v for k, v in res.items() if v > tol}
    if bad:
        raise ValueError(f"{basis.name} fails filter-bank invariants: {bad}")
    return res
