"""Command-line front end: ``wake synth|run|compare|eval|psd|filter``.

Exit status is 0 on success, 2 for bad input (unreadable files, invalid
flags or config, signals too short) and 1 for anything unexpected.
``WAKE_SEED`` and ``WAKE_FS`` override the default seed and sampling rate.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .signal import DEFAULT_FS, SignalError, WakeConfig, load_csv, save_run, write_columns

log = logging.getLogger("wake")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _env_number(name, kind, fallback):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return fallback
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"environment variable {name}={raw!r} is not a valid {kind.__name__}") from None


def _config_flags(p):
    d = WakeConfig()
    g = p.add_argument_group("pipeline settings (override --config)")
    g.add_argument("--config", type=Path, help="key = value file with WakeConfig fields")
    g.add_argument("--window-seconds", type=float, help=f"HPA window length in s (default: {d.window_seconds})")
    g.add_argument("--levels", type=int, help=f"wavelet levels J (default: {d.levels})")
    g.add_argument("--ar-order", type=int, help=f"AR model order p (default: {d.ar_order})")
    g.add_argument("--wavelet", help=f"wavelet basis name (default: {d.wavelet_name})")
    g.add_argument("--q-scale", type=float, help=f"Kalman process-noise scale (default: {d.q_scale})")
    g.add_argument("--psd-grid-size", type=int, help=f"PSD grid points (default: {d.psd_grid_size})")
    g.add_argument("--no-bias-detrend", action="store_true",
                   help="high-pass the raw prediction window for the tremor offset "
                        f"(default: detrend first, bias_detrend={d.bias_detrend})")
    g.add_argument("--strict-paper", action="store_true",
                   help="skip prediction on HPA ticks, leaving output gaps (default: off)")


def _build_config(args) -> WakeConfig:
    cfg = WakeConfig.from_file(args.config) if args.config else WakeConfig()
    changes = {
        "window_seconds": args.window_seconds,
        "levels": args.levels,
        "ar_order": args.ar_order,
        "wavelet_name": args.wavelet,
        "q_scale": args.q_scale,
        "psd_grid_size": args.psd_grid_size,
    }
    changes = {k: v for k, v in changes.items() if v is not None}
    if args.no_bias_detrend:
        changes["bias_detrend"] = False
    if args.strict_paper:
        changes["strict_paper"] = True
    return cfg.replace(**changes) if changes else cfg


def _input_flags(p):
    p.add_argument("--input", "-i", type=Path, required=True, help="CSV with an index column and data columns")
    p.add_argument("--column", default="0", help="data column index (after the index) or name (default: 0)")
    p.add_argument("--fs", type=float, help=f"sampling rate in Hz; beats the file header (default: header, else $WAKE_FS, else {DEFAULT_FS:g})")


def _load_input(args):
    fs = args.fs
    try:
        return load_csv(args.input, column=args.column, fs=fs)
    except SignalError as exc:
        if "missing sampling rate" not in str(exc):
            raise
    return load_csv(args.input, column=args.column, fs=_env_number("WAKE_FS", float, DEFAULT_FS))


# -- subcommands -------------------------------------------------------------

def cmd_synth(args):
    from .synthbench import SyntheticSpec, generate, reference_specs, save_dataset

    seed = args.seed if args.seed is not None else _env_number("WAKE_SEED", int, 0)
    fs = args.fs if args.fs is not None else _env_number("WAKE_FS", float, DEFAULT_FS)
    if args.spec:
        try:
            spec = SyntheticSpec.from_file(args.spec)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad spec file {args.spec}: {exc}") from None
        if args.seed is not None or "WAKE_SEED" in os.environ:
            spec = _replace_spec(spec, seed=seed)
        specs = [spec]
    else:
        specs = reference_specs(seed=seed, fs=fs)
    signals = [generate(s) for s in specs]
    manifest = save_dataset(signals, args.out)
    for sig in signals:
        print(f"{sig.spec.name}: {len(sig.s)} samples, snr_in={sig.snr_in:.3f} dB")
    print(f"wrote {manifest}")
    return EXIT_OK


def _replace_spec(spec, **kw):
    from dataclasses import replace
    return replace(spec, **kw)


def cmd_run(args):
    from .engine import offline_ground_truth, process_signal
    from .synthbench import nrmse

    sig = _load_input(args)
    cfg = _build_config(args)
    res = process_signal(sig, cfg)
    save_run(res, args.out)
    log_path = args.log or Path(args.out).with_suffix(".log.csv")
    res.save_log(log_path)
    v_gt, _ = offline_ground_truth(sig, res.f_d_history)
    score = nrmse(v_gt[res.n], res.v_pred)
    print(f"rows={len(res)} hpa_runs={len(res.log)} mean_f_d={np.mean(res.f_d_history):.4f} Hz")
    print(f"nrmse={score:.6f}")
    if args.reference:
        from .synthbench import prf, snr_out
        ref = load_csv(args.reference, column=args.reference_column, fs=sig.fs)
        if len(ref) != len(sig):
            raise UsageError("reference and input differ in length")
        s_v = ref.samples[res.n]
        print(f"prf={prf(s_v, res.v_pred):.6f} snr_out={snr_out(s_v, res.v_pred):.6f}")
    return EXIT_OK


def cmd_compare(args):
    from .synthbench import (load_dataset, reference_specs, resolve_methods, run_benchmark,
                             wake_wins, write_results)

    methods = [m for m in args.methods.split(",") if m.strip()]
    try:
        resolve_methods(methods)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    cfg = _build_config(args)
    if args.dataset:
        signals = load_dataset(args.dataset)
    else:
        seed = args.seed if args.seed is not None else _env_number("WAKE_SEED", int, 0)
        signals = reference_specs(seed=seed, fs=_env_number("WAKE_FS", float, DEFAULT_FS))
    rows = run_benchmark(signals, methods, cfg)
    if args.out:
        write_results(rows, args.out)
    print("signal,snr_in,method,prf,snr_out,nrmse")
    for r in rows:
        print(f"{r.signal},{r.snr_in:.2f},{r.method},{r.prf:.3f},{r.snr_out:.3f},{r.nrmse:.4f}")
    if args.assert_wake_wins is not None:
        wins, contested = wake_wins(rows)
        print(f"wake NRMSE wins: {wins}/{contested}")
        if wins < args.assert_wake_wins:
            print(f"error: wake won {wins} signals, required {args.assert_wake_wins}", file=sys.stderr)
            return EXIT_INTERNAL
    return EXIT_OK


def cmd_eval(args):
    from .synthbench import nrmse, prf, snr_out

    truth = load_csv(args.truth, column=args.truth_column, fs=DEFAULT_FS)
    pred = load_csv(args.pred, column=args.pred_column, fs=DEFAULT_FS)
    idx = np.arange(len(truth))
    if args.index_column:
        idx = load_csv(args.pred, column=args.index_column, fs=DEFAULT_FS).samples.astype(int)
    elif len(pred) != len(truth):
        raise UsageError("prediction and truth differ in length; pass --index-column n for engine output")
    if idx.size != len(pred) or idx.min() < 0 or idx.max() >= len(truth):
        raise UsageError("prediction index falls outside the truth signal")
    gt = truth.samples[idx]
    print(f"nrmse={nrmse(gt, pred.samples):.6f}")
    print(f"prf={prf(gt, pred.samples):.6f}")
    print(f"snr_out={snr_out(gt, pred.samples):.6f}")
    return EXIT_OK


def cmd_psd(args):
    from .signal import SignalWindow
    from .spectral import detect_cutoff, yule_walker_psd

    sig = _load_input(args)
    cfg = _build_config(args)
    L = cfg.window_length(sig.fs) if args.length is None else args.length
    if args.start < 0 or args.start + L > len(sig):
        raise UsageError(f"window [{args.start}, {args.start + L}) outside signal of {len(sig)} samples")
    win = SignalWindow(sig.samples[args.start:args.start + L], args.start, sig.fs)
    psd = yule_walker_psd(win, cfg.ar_order, cfg.psd_grid_size)
    cut = detect_cutoff(psd, cfg.search_band(sig.fs), fallback=cfg.cutoff_fallback)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"# fs={sig.fs:.17g}\nfrequency,power\n")
            for f, pw in zip(psd.frequencies, psd.power):
                fh.write(f"{f:.17g},{pw:.17g}\n")
    kind = "valley" if cut.is_valley else "band minimum"
    print(f"f_d={cut.f_d:.6f} Hz ({kind}, band {cut.search_band[0]:g}-{cut.search_band[1]:g} Hz)")
    return EXIT_OK


def cmd_filter(args):
    from .spectral import sharp_highpass

    sig = _load_input(args)
    if not 0 <= args.cutoff <= sig.fs / 2:
        raise UsageError(f"cutoff must lie in [0, {sig.fs / 2:g}] Hz")
    tremor = sharp_highpass(sig.samples, args.cutoff, fs=sig.fs)
    write_columns(args.out, {"voluntary": sig.samples - tremor, "tremor": tremor}, fs=sig.fs)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="wake", description="Wavelet/Kalman tremor extraction toolkit")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic recordings")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--spec", type=Path, help="key = value SyntheticSpec file")
    src.add_argument("--snr-table", action="store_true",
                     help="the ten reference signals (default when --spec is absent)")
    p.add_argument("--seed", type=int, help="base seed (default: $WAKE_SEED, else 0)")
    p.add_argument("--fs", type=float, help=f"sampling rate for reference signals (default: $WAKE_FS, else {DEFAULT_FS:g})")
    p.add_argument("--out", "-o", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="stream a recording through the engine")
    _input_flags(p)
    p.add_argument("--out", "-o", type=Path, required=True, help="per-sample output CSV")
    p.add_argument("--log", type=Path, help="HPA log CSV (default: <out>.log.csv)")
    p.add_argument("--reference", type=Path, help="optional CSV holding the true voluntary motion")
    p.add_argument("--reference-column", default="0", help="column of --reference (default: 0)")
    _config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="benchmark methods on synthetic data")
    p.add_argument("--methods", default="wake,bmflc,ebmflc", help="comma list (default: wake,bmflc,ebmflc)")
    p.add_argument("--dataset", type=Path, help="directory from 'wake synth' (default: generate the reference set)")
    p.add_argument("--seed", type=int, help="seed when generating (default: $WAKE_SEED, else 0)")
    p.add_argument("--out", "-o", type=Path, help="results CSV")
    p.add_argument("--assert-wake-wins", type=int, metavar="K",
                   help="exit 1 unless wake has the lowest NRMSE on at least K signals")
    _config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("eval", help="score a voluntary estimate against a reference")
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--truth-column", default="0", help="(default: 0)")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--pred-column", default="v_pred", help="(default: v_pred)")
    p.add_argument("--index-column", default=None,
                   help="column of --pred holding sample indices into --truth (default: none, e.g. 'n')")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("psd", help="AR spectrum and cut-off of one window")
    _input_flags(p)
    p.add_argument("--start", type=int, default=0, help="first sample of the window (default: 0)")
    p.add_argument("--length", type=int, help="window length in samples (default: window_seconds * fs)")
    p.add_argument("--out", "-o", type=Path, help="CSV of frequency,power")
    _config_flags(p)
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("filter", help="split a recording with the sharp high-pass")
    _input_flags(p)
    p.add_argument("--cutoff", type=float, required=True, help="split frequency in Hz")
    p.add_argument("--out", "-o", type=Path, required=True)
    p.set_defaults(func=cmd_filter)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, SignalError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
