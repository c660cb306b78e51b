"""Multi-rate streaming driver tying the slow HPA loop to per-sample RTP."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .hpa import HyperParameters, run_hpa
from .rtp import run_rtp
from .signal import MotionSignal, SignalError, SignalWindow, WakeConfig, write_columns
from .spectral import sharp_highpass

log = logging.getLogger(__name__)


class SampleOutput(NamedTuple):
    n: int
    m: float
    v_pred: float
    i_pred: float
    f_d_active: float
    hp_version: int


class HpaLogEntry(NamedTuple):
    n_hpa: int
    f_d: float
    e_L: float
    ok: bool


class WakeEngine:
    """Streaming tremor extractor.

    Feed one measurement at a time with :meth:`push_sample`. Nothing is
    emitted until ``L`` samples have arrived; from then on each call returns
    the voluntary prediction made at the previous step and the tremor
    obtained by subtracting it. Every ``L`` samples the hyper-parameters are
    re-estimated and swapped in as a whole snapshot.
    """

    def __init__(self, config: WakeConfig, fs: float):
        self.config = config.validate_for(fs)
        self.fs = float(fs)
        self.L = config.window_length(fs)
        self.N_rtp = config.rtp_length()
        self._buf = deque(maxlen=max(self.L, self.N_rtp))
        self.n = 0
        self.snapshot: Optional[HyperParameters] = None
        self.log: List[HpaLogEntry] = []
        self._pending: Optional[tuple] = None
        self._version = 0

    def _window(self, length):
        vals = np.fromiter(self._buf, dtype=float, count=len(self._buf))[-length:]
        return SignalWindow(vals, self.n - length, self.fs)

    def _run_hpa(self):
        window = self._window(self.L)
        warm = None if self.snapshot is None else self.snapshot.weights
        try:
            hp = run_hpa(window, self.config, warm_start=warm, version=self._version + 1)
        except (ValueError, ArithmeticError) as exc:
            log.warning("HPA at n=%d failed (%s); keeping previous snapshot", self.n - 1, exc)
            self.log.append(HpaLogEntry(self.n - 1, float("nan"), float("nan"), False))
            return
        self._version += 1
        # single attribute assignment: readers see either the old or new snapshot
        self.snapshot = hp
        self.log.append(HpaLogEntry(self.n - 1, hp.f_d, hp.residual, True))

    def _predict(self):
        hp = self.snapshot
        if hp is None:
            self._pending = None
            return
        res = run_rtp(self._window(self.N_rtp), hp, self.config)
        self._pending = (res.v_pred, hp.f_d, hp.version)

    def push_sample(self, m: float) -> Optional[SampleOutput]:
        m = float(m)
        if not np.isfinite(m):
            raise SignalError(f"non-finite sample at n={self.n}")
        out = None
        if self._pending is not None:
            v, f_d, version = self._pending
            out = SampleOutput(self.n, m, v, m - v, f_d, version)
        self._pending = None
        self._buf.append(m)
        self.n += 1
        if self.n < self.L:
            return out
        if self.n % self.L == 0:
            self._run_hpa()
            if self.config.strict_paper:
                return out
        self._predict()
        return out

    def f_d_history(self):
        return [e.f_d for e in self.log if e.ok]


@dataclass
class RunResult:
    """Per-sample outputs of a batch run plus the HPA log."""

    n: np.ndarray
    m: np.ndarray
    v_pred: np.ndarray
    i_pred: np.ndarray
    f_d_active: np.ndarray
    hp_version: np.ndarray
    log: List[HpaLogEntry] = field(default_factory=list)
    fs: float = 100.0
    warmup: int = 0

    def __len__(self):
        return self.n.size

    @property
    def f_d_history(self):
        return [e.f_d for e in self.log if e.ok]

    def save_log(self, path):
        write_log(self.log, path)


def write_log(entries, path):
    with open(path, "w") as fh:
        fh.write("n_hpa,f_d,e_L\n")
        for e in entries:
            fh.write(f"{e.n_hpa},{e.f_d:.17g},{e.e_L:.17g}\n")


def process_signal(signal: MotionSignal, config: WakeConfig) -> RunResult:
    """Stream a whole recording through a fresh :class:`WakeEngine`."""
    engine = WakeEngine(config, signal.fs)
    if len(signal) <= engine.L:
        raise SignalError(
            f"signal shorter than warm-up: {len(signal)} samples, need more than {engine.L}"
        )
    rows = []
    for m in signal.samples:
        out = engine.push_sample(m)
        if out is not None:
            rows.append(out)
    cols = list(zip(*rows)) if rows else [()] * 6
    return RunResult(
        n=np.array(cols[0], dtype=int),
        m=np.array(cols[1], dtype=float),
        v_pred=np.array(cols[2], dtype=float),
        i_pred=np.array(cols[3], dtype=float),
        f_d_active=np.array(cols[4], dtype=float),
        hp_version=np.array(cols[5], dtype=int),
        log=list(engine.log),
        fs=signal.fs,
        warmup=engine.L,
    )


def offline_ground_truth(signal: MotionSignal, f_d_history):
    """Whole-record split at the mean detected cut-off: ``(v_gt, i_gt)``."""
    hist = [f for f in f_d_history if np.isfinite(f)]
    if not hist:
        raise ValueError("f_d history is empty")
    i_gt = sharp_highpass(signal.samples, float(np.mean(hist)), fs=signal.fs)
    return signal.samples - i_gt, i_gt
