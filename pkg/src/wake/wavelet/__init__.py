from .basis import SUPPORTED, UnknownWaveletError, WaveletBasis, basis_for, check_basis, qmf
from .transform import (
    WaveletCoeffs,
    WaveletError,
    approximation_operators,
    build_approximation_matrix,
    dwt,
    idwt,
    reconstruct_approximation,
    reconstruct_detail,
)

__all__ = [
    "SUPPORTED",
    "UnknownWaveletError",
    "WaveletBasis",
    "WaveletCoeffs",
    "WaveletError",
    "approximation_operators",
    "basis_for",
    "build_approximation_matrix",
    "check_basis",
    "dwt",
    "idwt",
    "qmf",
    "reconstruct_approximation",
    "reconstruct_detail",
]
