"""Synthetic tremor recordings, evaluation metrics and the comparison harness.

A synthetic record is ``s = s_v + s_w + s_t``: a slow sinusoid standing in
for voluntary motion, broadband noise built from sinusoids on a regular
frequency grid up to Nyquist, and tremor built the same way inside a band.
Noise and tremor sinusoids get uniform random amplitudes and phases.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .signal import MotionSignal, WakeConfig

log = logging.getLogger(__name__)

SNR_CAP_DB = 300.0

# Input SNR (dB) of the ten reference signals of the published comparison.
REFERENCE_SNR_DB = (7.5, 5.1, 0.3, -4.0, 4.6, 0.3, -4.9, 20.9, 15.1, 10.0)


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    fs: float = 100.0
    duration: float = 50.0
    voluntary_freq: float = 0.5
    voluntary_amp: float = 1.0
    voluntary_phase: float = 0.0
    noise_resolution: float = 0.1
    noise_amp_mean: float = 1.0
    noise_amp_var: float = 1.0 / 3.0
    tremor_band: tuple = (6.0, 14.0)
    tremor_resolution: float = 0.1
    tremor_amp_mean: float = 1.0
    tremor_amp_var: float = 1.0 / 3.0
    # When set, noise and tremor are rescaled so the input SNR hits this
    # value, with ``tremor_share`` of the disturbance power in the tremor.
    snr_db: Optional[float] = None
    tremor_share: float = 0.5
    seed: int = 0
    name: str = "synthetic"

    def __post_init__(self):
        band = tuple(float(b) for b in self.tremor_band)
        object.__setattr__(self, "tremor_band", band)
        if not (self.fs > 0 and self.duration > 0):
            raise ValueError("fs and duration must be positive")
        if not 0 <= self.voluntary_freq < 1.0:
            raise ValueError(f"voluntary frequency must be below 1 Hz, got {self.voluntary_freq}")
        if not 0 < band[0] < band[1] < self.fs / 2:
            raise ValueError(f"tremor band {band} must lie inside (0, fs/2)")
        for name in ("voluntary_amp", "noise_amp_mean", "tremor_amp_mean",
                     "noise_amp_var", "tremor_amp_var"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.noise_resolution <= 0 or self.tremor_resolution <= 0:
            raise ValueError("frequency resolutions must be positive")
        if not 0.0 <= self.tremor_share <= 1.0:
            raise ValueError("tremor_share must lie in [0, 1]")

    @property
    def n_samples(self):
        return int(round(self.duration * self.fs))

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = f"{v[0]}, {v[1]}"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kinds = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise ValueError(f"line {lineno}: unknown spec key {key!r}")
            kwargs[key] = _parse_spec_value(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        return cls.from_text(Path(path).read_text())


def _parse_spec_value(key, raw):
    if key == "name":
        return raw
    if key == "seed":
        return int(raw)
    if key == "tremor_band":
        parts = [p for p in raw.replace("[", " ").replace("]", " ").replace(",", " ").split() if p]
        return (float(parts[0]), float(parts[1]))
    if key == "snr_db":
        return None if raw.lower() in ("", "none") else float(raw)
    return float(raw)


@dataclass(frozen=True)
class SyntheticSignal:
    s: MotionSignal
    s_v: MotionSignal
    s_w: MotionSignal
    s_t: MotionSignal
    snr_in: float
    spec: SyntheticSpec


def power(x):
    x = np.asarray(x, dtype=float)
    return float(np.mean(x * x))


def _uniform_amplitudes(rng, n, mean, var):
    half = math.sqrt(3.0 * var)
    return rng.uniform(mean - half, mean + half, n)


def _sinusoid_sum(t, freqs, amps, phases):
    out = np.zeros_like(t)
    for f, a, ph in zip(freqs, amps, phases):
        if a != 0.0:
            out += a * np.sin(2.0 * np.pi * f * t + ph)
    return out


def _grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def generate(spec: SyntheticSpec) -> SyntheticSignal:
    """Build the three components of a synthetic record, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    t = np.arange(spec.n_samples) / spec.fs
    s_v = spec.voluntary_amp * np.sin(2.0 * np.pi * spec.voluntary_freq * t + spec.voluntary_phase)

    f_w = _grid(0.0, spec.fs / 2.0, spec.noise_resolution)
    a_w = _uniform_amplitudes(rng, f_w.size, spec.noise_amp_mean, spec.noise_amp_var)
    p_w = rng.uniform(0.0, 2.0 * np.pi, f_w.size)
    lo, hi = spec.tremor_band
    f_t = _grid(lo, hi, spec.tremor_resolution)
    a_t = _uniform_amplitudes(rng, f_t.size, spec.tremor_amp_mean, spec.tremor_amp_var)
    p_t = rng.uniform(0.0, 2.0 * np.pi, f_t.size)
    s_w = _sinusoid_sum(t, f_w, a_w, p_w)
    s_t = _sinusoid_sum(t, f_t, a_t, p_t)

    if spec.snr_db is not None:
        target = power(s_v) / 10.0 ** (spec.snr_db / 10.0)
        s_w = _rescale(s_w, (1.0 - spec.tremor_share) * target)
        s_t = _rescale(s_t, spec.tremor_share * target)

    s = s_v + s_w + s_t
    p_noise = power(s_w) + power(s_t)
    snr = snr_db(power(s_v), p_noise) if p_noise > 0 and power(s_v) > 0 else math.inf
    mk = lambda x, tag: MotionSignal(x, spec.fs, f"{spec.name}:{tag}")
    return SyntheticSignal(mk(s, "s"), mk(s_v, "s_v"), mk(s_w, "s_w"), mk(s_t, "s_t"), snr, spec)


def _rescale(x, target_power):
    p = power(x)
    if target_power == 0.0 or p == 0.0:
        return np.zeros_like(x)
    return x * math.sqrt(target_power / p)


def reference_specs(seed: int = 0, **overrides) -> List[SyntheticSpec]:
    """The ten benchmark signals, calibrated to the published input SNRs."""
    return [
        SyntheticSpec(snr_db=snr, seed=seed * 1000 + i + 1, name=f"Signal{i + 1}", **overrides)
        for i, snr in enumerate(REFERENCE_SNR_DB)
    ]


# -- metrics -----------------------------------------------------------------

def snr_db(signal_power: float, noise_power: float) -> float:
    if not (signal_power > 0 and noise_power > 0):
        raise MetricError(f"powers must be positive, got {signal_power}, {noise_power}")
    return 10.0 * math.log10(signal_power / noise_power)


def nrmse(v_gt, v_pred) -> float:
    """RMS error normalised by the range of the reference."""
    gt = np.asarray(v_gt, dtype=float)
    pr = np.asarray(v_pred, dtype=float)
    if gt.shape != pr.shape or gt.size < 2:
        raise MetricError("nrmse needs two equal-length vectors of at least 2 samples")
    span = float(gt.max() - gt.min())
    if span <= 0:
        raise MetricError("reference has zero range")
    return float(np.sqrt(np.mean((gt - pr) ** 2)) / span)


def prf(s_v, v_pred) -> float:
    """Power ratio factor in percent, aggregated as ``sum err^2 / sum s_v^2``."""
    ref = np.asarray(s_v, dtype=float)
    pr = np.asarray(v_pred, dtype=float)
    if ref.shape != pr.shape:
        raise MetricError("prf needs equal-length vectors")
    den = float(np.sum(ref * ref))
    if den <= 0:
        raise MetricError("reference has zero power")
    return float(np.sum((ref - pr) ** 2) / den * 100.0)


def snr_out(s_v, v_pred) -> float:
    """Output SNR of the voluntary estimate in dB, capped at 300 dB."""
    ref = np.asarray(s_v, dtype=float)
    err = power(ref - np.asarray(v_pred, dtype=float))
    sig = power(ref)
    if err == 0.0:
        return SNR_CAP_DB
    return min(snr_db(sig, err), SNR_CAP_DB)


# -- benchmark harness -------------------------------------------------------

RESULT_COLUMNS = ("signal", "snr_in", "method", "prf", "snr_out", "nrmse")
METHODS = ("wake", "bmflc", "ebmflc")


@dataclass(frozen=True)
class BenchmarkRow:
    signal: str
    snr_in: float
    method: str
    prf: float
    snr_out: float
    nrmse: float


@dataclass(frozen=True)
class MethodContext:
    """What a method sees besides the signal: the split and the warm-up."""

    f_d: float
    warmup: int
    config: WakeConfig


def _wake_method(sig, ctx, run=None):
    v = np.full(len(sig.s), np.nan)
    v[run.n] = run.v_pred
    return v


def _bmflc_method(sig, ctx):
    from .baselines import bmflc_run, voluntary_estimate
    return voluntary_estimate(sig.s, bmflc_run(sig.s))


def _ebmflc_method(sig, ctx):
    from .baselines import ebmflc_run, voluntary_estimate
    return voluntary_estimate(sig.s, ebmflc_run(sig.s, None, ctx.f_d))


def resolve_methods(methods):
    """Map names (or ``(name, callable)`` pairs) to callables.

    A callable takes ``(SyntheticSignal, MethodContext)`` and returns the
    voluntary estimate over the whole record.
    """
    builtin = {"bmflc": _bmflc_method, "ebmflc": _ebmflc_method, "wake": _wake_method}
    out = []
    for m in methods:
        if isinstance(m, str):
            name = m.strip().lower()
            if name not in builtin:
                raise KeyError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
            out.append((name, builtin[name]))
        else:
            name, fn = m
            out.append((str(name), fn))
    return out


def evaluate(sig: SyntheticSignal, name: str, v_pred, v_gt, idx) -> BenchmarkRow:
    v = np.asarray(v_pred, dtype=float)[idx]
    if not np.all(np.isfinite(v)):
        raise MetricError(f"{name} produced non-finite estimates inside the scored range")
    return BenchmarkRow(
        sig.spec.name, sig.snr_in, name,
        prf(sig.s_v.samples[idx], v),
        snr_out(sig.s_v.samples[idx], v),
        nrmse(v_gt[idx], v),
    )


def run_benchmark(signals, methods=METHODS, config: Optional[WakeConfig] = None) -> List[BenchmarkRow]:
    """Score every method on every signal.

    ``signals`` holds :class:`SyntheticSpec` or :class:`SyntheticSignal`
    items. WAKE always runs, since its mean detected cut-off defines the
    offline ground truth ``v_gt`` used by NRMSE and the E-BMFLC split.
    PRF and output SNR compare against the true ``s_v``. Scores cover
    samples from the end of the warm-up window onwards.
    """
    from .engine import offline_ground_truth, process_signal

    config = config or WakeConfig()
    table = resolve_methods(methods)
    rows = []
    for item in signals:
        sig = generate(item) if isinstance(item, SyntheticSpec) else item
        run = process_signal(sig.s, config)
        f_d = float(np.mean(run.f_d_history))
        v_gt, _ = offline_ground_truth(sig.s, run.f_d_history)
        idx = np.arange(run.warmup, len(sig.s))
        if config.strict_paper:
            idx = run.n
        ctx = MethodContext(f_d, run.warmup, config)
        for name, fn in table:
            if fn is _wake_method:
                v = _wake_method(sig, ctx, run)
            else:
                v = fn(sig, ctx)
            rows.append(evaluate(sig, name, v, v_gt, idx))
            log.info("%s %s nrmse=%.4f", sig.spec.name, name, rows[-1].nrmse)
    return rows


def write_results(rows: Sequence[BenchmarkRow], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([r.signal, f"{r.snr_in:.6g}", r.method,
                        f"{r.prf:.6g}", f"{r.snr_out:.6g}", f"{r.nrmse:.6g}"])


def read_results(path) -> List[BenchmarkRow]:
    with open(path, newline="") as fh:
        return [
            BenchmarkRow(d["signal"], float(d["snr_in"]), d["method"],
                         float(d["prf"]), float(d["snr_out"]), float(d["nrmse"]))
            for d in csv.DictReader(fh)
        ]


def wake_wins(rows: Sequence[BenchmarkRow], method: str = "wake"):
    """Signals on which ``method`` has NRMSE no worse than every other method.

    Returns ``(wins, contested)`` where ``contested`` counts signals scored
    by ``method`` and at least one competitor.
    """
    by_signal: Dict[str, Dict[str, float]] = {}
    for r in rows:
        by_signal.setdefault(r.signal, {})[r.method] = r.nrmse
    wins = contested = 0
    for scores in by_signal.values():
        if method not in scores or len(scores) < 2:
            continue
        contested += 1
        if all(scores[method] <= v for k, v in scores.items() if k != method):
            wins += 1
    return wins, contested


# -- dataset directories -----------------------------------------------------

COMPONENTS = ("s", "s_v", "s_w", "s_t")
MANIFEST = "manifest.csv"


def save_dataset(signals: Sequence[SyntheticSignal], out_dir) -> Path:
    """Write each component as ``<name>_<part>.csv`` plus a spec file and manifest."""
    from .signal import write_columns

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / MANIFEST).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["signal", "snr_in", "fs", "n_samples", "seed"])
        for sig in signals:
            name = sig.spec.name
            for part in COMPONENTS:
                write_columns(out / f"{name}_{part}.csv", {part: getattr(sig, part).samples},
                              fs=sig.spec.fs)
            (out / f"{name}.spec").write_text(sig.spec.to_text())
            w.writerow([name, repr(sig.snr_in), repr(sig.spec.fs), sig.spec.n_samples, sig.spec.seed])
    return out / MANIFEST


def load_dataset(in_dir) -> List[SyntheticSignal]:
    """Read back a directory written by :func:`save_dataset`."""
    from .signal import load_csv

    src = Path(in_dir)
    manifest = src / MANIFEST
    if not manifest.is_file():
        raise FileNotFoundError(f"no {MANIFEST} in {src}")
    out = []
    with manifest.open(newline="") as fh:
        for d in csv.DictReader(fh):
            name = d["signal"]
            spec_path = src / f"{name}.spec"
            spec = SyntheticSpec.from_file(spec_path) if spec_path.is_file() else SyntheticSpec(name=name)
            parts = {p: load_csv(src / f"{name}_{p}.csv", column=p, label=f"{name}:{p}")
                     for p in COMPONENTS}
            out.append(SyntheticSignal(parts["s"], parts["s_v"], parts["s_w"], parts["s_t"],
                                       float(d["snr_in"]), spec))
    return out
