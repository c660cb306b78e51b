"""Real-time separation of voluntary motion from tremor.

A slow loop re-estimates the split frequency and wavelet weights every few
seconds; a fast loop predicts the next voluntary sample with a Kalman
filter over the wavelet approximations of the most recent samples.
"""
from ._accel import use_numba
from .engine import RunResult, SampleOutput, WakeEngine, offline_ground_truth, process_signal
from .hpa import HyperParameters, optimize_weights, run_hpa
from .rtp import run_rtp
from .signal import (
    MotionSignal,
    SignalError,
    SignalWindow,
    WakeConfig,
    load_csv,
    make_window,
    save_run,
)
from .spectral import detect_cutoff, levinson_durbin, sharp_highpass, yule_walker_psd

__version__ = "0.1.0"

__all__ = [
    "HyperParameters",
    "MotionSignal",
    "RunResult",
    "SampleOutput",
    "SignalError",
    "SignalWindow",
    "WakeConfig",
    "WakeEngine",
    "detect_cutoff",
    "levinson_durbin",
    "load_csv",
    "make_window",
    "offline_ground_truth",
    "optimize_weights",
    "process_signal",
    "run_hpa",
    "run_rtp",
    "save_run",
    "sharp_highpass",
    "use_numba",
    "yule_walker_psd",
]
