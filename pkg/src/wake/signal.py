"""Signal containers, windowing, configuration and CSV interchange."""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

DEFAULT_FS = 100.0
# 17 significant digits round-trip every float64 exactly.
FLOAT_FMT = "{:.17g}"

_FS_HEADER = re.compile(r"#\s*fs\s*=\s*([^\s,]+)", re.IGNORECASE)


class SignalError(ValueError):
    """Raised for malformed signals, windows or input files."""


class InsufficientHistoryError(SignalError):
    pass


@dataclass(frozen=True)
class MotionSignal:
    """A uniformly sampled measurement ``m(n)`` and its sampling rate."""

    samples: np.ndarray
    fs: float
    label: str = ""

    def __post_init__(self):
        x = np.ascontiguousarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise SignalError("samples must be a non-empty 1-D vector")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise SignalError(f"non-finite sample at index {bad}")
        if not (self.fs > 0 and math.isfinite(self.fs)):
            raise SignalError(f"sampling rate must be positive, got {self.fs}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.fs


@dataclass(frozen=True)
class SignalWindow:
    """A contiguous slice of a signal with its absolute start index."""

    values: np.ndarray
    start_index: int
    fs: float

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1:
            raise SignalError("window values must be 1-D")
        if self.start_index < 0:
            raise SignalError("start_index must be >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def end_index(self):
        return self.start_index + self.values.size - 1

    def with_values(self, values):
        return SignalWindow(values, self.start_index, self.fs)


def as_window(x, fs=DEFAULT_FS, start_index=0):
    """Wrap an array (or pass a window through) so kernels accept either."""
    if isinstance(x, SignalWindow):
        return x
    return SignalWindow(np.asarray(x, dtype=float), start_index, fs)


@dataclass(frozen=True)
class WakeConfig:
    """Tunable parameters of the tremor-extraction pipeline.

    Defaults follow the parameter study of the method: a 5 s analysis
    window, five decomposition levels, AR order 17 and the ``sym3`` basis.
    ``cutoff_search_band`` of ``None`` resolves to ``[1.5, fs/4]`` Hz.

    ``q_scale`` sets the Kalman process noise relative to the variance of
    the prediction window. ``bias_detrend`` removes the least-squares line
    from that window before the high-pass that yields the tremor offset;
    without it a ``2^J``-sample FFT mask can only strip the mean at typical
    rates, and the prediction lags by half a window.
    """

    window_seconds: float = 5.0
    levels: int = 5
    ar_order: int = 17
    wavelet_name: str = "sym3"
    q_scale: float = 0.3
    psd_grid_size: int = 1024
    cutoff_search_band: Optional[tuple] = None
    cutoff_fallback: bool = True
    strict_paper: bool = False
    bias_detrend: bool = True

    def __post_init__(self):
        if self.levels < 1:
            raise SignalError("levels must be >= 1")
        if self.ar_order < 1:
            raise SignalError("ar_order must be >= 1")
        if self.window_seconds <= 0:
            raise SignalError("window_seconds must be positive")
        if self.q_scale < 0:
            raise SignalError("q_scale must be >= 0")
        if self.psd_grid_size < 2:
            raise SignalError("psd_grid_size must be >= 2")
        if self.cutoff_search_band is not None:
            lo, hi = (float(b) for b in self.cutoff_search_band)
            if not (0 <= lo < hi):
                raise SignalError(f"invalid cutoff band {self.cutoff_search_band}")
            object.__setattr__(self, "cutoff_search_band", (lo, hi))

    def window_length(self, fs):
        L = int(round(self.window_seconds * fs))
        if L < 2 ** self.levels:
            raise SignalError(f"window length {L} shorter than 2^J = {2 ** self.levels}")
        if L < self.ar_order + 1:
            raise SignalError(f"window length {L} must exceed AR order {self.ar_order}")
        return L

    def rtp_length(self):
        return 2 ** self.levels

    def search_band(self, fs):
        if self.cutoff_search_band is None:
            band = (1.5, fs / 4.0)
        else:
            band = self.cutoff_search_band
        if band[1] > fs / 2.0:
            raise SignalError(f"cutoff band {band} exceeds Nyquist {fs / 2.0}")
        return band

    def validate_for(self, fs):
        self.window_length(fs)
        self.search_band(fs)
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key == "J":
                key = "levels"
            elif key == "p":
                key = "ar_order"
            if key not in known:
                raise SignalError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        """Read a line-based ``key = value`` file; ``#`` starts a comment."""
        values = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SignalError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls.from_mapping(values)

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = f"{v[0]}, {v[1]}"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes):
        return replace(self, **changes)


def _coerce(key, raw):
    if not isinstance(raw, str):
        return raw
    s = raw.strip()
    if key in ("levels", "ar_order", "psd_grid_size"):
        return int(s)
    if key in ("window_seconds", "q_scale"):
        return float(s)
    if key in ("cutoff_fallback", "strict_paper", "bias_detrend"):
        low = s.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise SignalError(f"bad boolean for {key}: {raw!r}")
    if key == "cutoff_search_band":
        if s.lower() in ("", "none", "auto"):
            return None
        parts = [p for p in re.split(r"[,\s\[\]]+", s) if p]
        if len(parts) != 2:
            raise SignalError(f"cutoff_search_band needs two values, got {raw!r}")
        return (float(parts[0]), float(parts[1]))
    return s


def make_window(signal: MotionSignal, n: int, length: int) -> SignalWindow:
    """Return samples ``n-length+1 .. n`` of ``signal``."""
    if length < 1:
        raise SignalError("window length must be >= 1")
    if n >= len(signal):
        raise SignalError(f"sample index {n} beyond signal of length {len(signal)}")
    start = n - length + 1
    if start < 0:
        raise InsufficientHistoryError(
            f"window of length {length} ending at n={n} needs {length - 1} samples of history"
        )
    return SignalWindow(signal.samples[start:n + 1], start, signal.fs)


def load_csv(path, column: Union[int, str] = 0, fs: Optional[float] = None,
             label: Optional[str] = None) -> MotionSignal:
    """Read one channel of an ``index_or_time,ch0[,ch1,...]`` file.

    The sampling rate comes from a ``# fs=<Hz>`` comment line unless ``fs``
    is given, which takes precedence. A non-numeric first data line is
    treated as a column-name header, and ``column`` may then be a name.
    ``column`` as an integer counts data columns, excluding the index.
    """
    path = Path(path)
    header_fs = None
    names = None
    values = []
    col_idx = None
    with path.open(newline="") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _FS_HEADER.search(line)
                if m:
                    try:
                        header_fs = float(m.group(1))
                    except ValueError:
                        raise SignalError(f"{path}:{lineno}: bad fs header {line!r}") from None
                continue
            cells = [c.strip() for c in next(csv.reader([line]))]
            if names is None and not values and not _is_number(cells[0]):
                names = cells
                continue
            if col_idx is None:
                col_idx = _resolve_column(column, names, len(cells), path)
            if len(cells) <= col_idx:
                raise SignalError(
                    f"{path}:{lineno}: malformed row, expected at least {col_idx + 1} fields"
                )
            try:
                v = float(cells[col_idx])
            except ValueError:
                raise SignalError(f"{path}:{lineno}: malformed value {cells[col_idx]!r}") from None
            if not math.isfinite(v):
                raise SignalError(f"{path}:{lineno}: non-finite value {cells[col_idx]!r}")
            values.append(v)
    rate = fs if fs is not None else header_fs
    if rate is None:
        raise SignalError(f"{path}: missing sampling rate (no '# fs=' header and no override)")
    if not values:
        raise SignalError(f"{path}: no data rows")
    return MotionSignal(np.array(values), rate, label if label is not None else path.stem)


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def _resolve_column(column, names, ncells, path):
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if names is None or column not in names:
            raise SignalError(f"{path}: no column named {column!r}")
        return names.index(column)
    idx = int(column)
    if idx < 0:
        raise SignalError(f"column index must be >= 0, got {idx}")
    # data columns start after the index/time column
    return idx + 1


RUN_COLUMNS = ("n", "m", "v_pred", "i_pred", "f_d_active")


def save_run(result, path, fs: Optional[float] = None):
    """Write per-sample outputs as CSV with columns ``n,m,v_pred,i_pred,f_d_active``.

    ``result`` is anything with those attributes or keys holding equal-length
    sequences (for instance :class:`wake.engine.RunResult`). The file carries
    a ``# fs=`` header so :func:`load_csv` can read any column back by name.
    """
    cols = [np.asarray(_get(result, name)) for name in RUN_COLUMNS]
    n = cols[0].size
    if any(c.size != n for c in cols):
        raise SignalError("result columns must have equal length")
    if fs is None:
        fs = getattr(result, "fs", None)
    path = Path(path)
    with path.open("w", newline="") as fh:
        if fs is not None:
            fh.write(f"# fs={FLOAT_FMT.format(float(fs))}\n")
        fh.write(",".join(RUN_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(str(int(row[0])) + "," + ",".join(FLOAT_FMT.format(float(v)) for v in row[1:]) + "\n")


def _get(obj, name):
    if isinstance(obj, Mapping):
        return obj[name]
    return getattr(obj, name)


def write_columns(path, columns: Mapping[str, Sequence[float]], fs: Optional[float] = None,
                  index_name: str = "n"):
    """Write named float columns with a leading integer index column."""
    arrays = {k: np.asarray(v, dtype=float) for k, v in columns.items()}
    lengths = {a.size for a in arrays.values()}
    if len(lengths) > 1:
        raise SignalError("columns must have equal length")
    n = lengths.pop() if lengths else 0
    with Path(path).open("w", newline="") as fh:
        if fs is not None:
            fh.write(f"# fs={FLOAT_FMT.format(float(fs))}\n")
        fh.write(",".join([index_name, *arrays]) + "\n")
        for i in range(n):
            fh.write(str(i) + "," + ",".join(FLOAT_FMT.format(a[i]) for a in arrays.values()) + "\n")


def write_signal(path, signal: MotionSignal, name: str = "m"):
    write_columns(path, {name: signal.samples}, fs=signal.fs)

