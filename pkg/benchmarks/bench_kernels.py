"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the selection flag
``WAKE_DISABLE_NUMBA`` is read at import time.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from wake import _accel
from wake.baselines import bmflc_run
from wake.engine import process_signal
from wake.hpa import run_hpa
from wake.rtp import filter_window, run_rtp
from wake.signal import MotionSignal, WakeConfig
from wake.synthbench import SyntheticSpec, generate

repeat = int(sys.argv[1])
cfg = WakeConfig()
sig = generate(SyntheticSpec(duration=20.0, snr_db=7.5, seed=3))
x = sig.s.samples
head = MotionSignal(x[:2000], sig.s.fs)
hp = run_hpa(x[:500], cfg)
r = np.random.default_rng(0)
z, b, h = r.standard_normal(32), r.standard_normal(32), r.standard_normal(5)

def best(fn, n):
    fn()
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        out.append((time.perf_counter() - t0) / n)
    return min(out)

def rtp_sweep():
    for k in range(500, 700):
        run_rtp(x[k - 32:k], hp, cfg)

res = {
    "numba": _accel.use_numba(),
    "filter_window (32 samples, J=5)": best(lambda: filter_window(z, b, h, np.zeros(5), np.eye(5), 1e-3, 0.1), 200),
    "run_rtp per sample": best(rtp_sweep, 1) / 200,
    "BMFLC over 2000 samples": best(lambda: bmflc_run(head), 1),
    "engine over 2000 samples": best(lambda: process_signal(head, cfg), 1),
}
json.dump(res, sys.stdout)
"""


def run_backend(disable, repeat):
    env = dict(os.environ, WAKE_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    fast, slow = run_backend(False, args.repeat), run_backend(True, args.repeat)
    if not fast.pop("numba"):
        print("numba unavailable: both columns use the numpy path")
    slow.pop("numba")
    print(f"{'kernel':34s} {'numba':>12s} {'numpy':>12s} {'speed-up':>9s}")
    for key in fast:
        a, b = fast[key], slow[key]
        print(f"{key:34s} {a * 1e3:10.3f}ms {b * 1e3:10.3f}ms {b / a:8.1f}x")


if __name__ == "__main__":
    main()
