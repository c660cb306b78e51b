import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wake.signal import WakeConfig
from wake.synthbench import (
    REFERENCE_SNR_DB,
    BenchmarkRow,
    MetricError,
    SyntheticSpec,
    generate,
    load_dataset,
    nrmse,
    power,
    prf,
    read_results,
    reference_specs,
    run_benchmark,
    save_dataset,
    snr_db,
    snr_out,
    wake_wins,
    write_results,
)


class TestGenerate:
    def test_zero_disturbance(self):
        s = generate(SyntheticSpec(noise_amp_mean=0, noise_amp_var=0, tremor_amp_mean=0, tremor_amp_var=0))
        np.testing.assert_array_equal(s.s.samples, s.s_v.samples)
        assert s.snr_in == np.inf

    def test_length_and_rate(self):
        s = generate(SyntheticSpec())
        assert len(s.s) == 5000 and s.s.fs == 100.0

    def test_tremor_band_energy(self):
        s = generate(SyntheticSpec(seed=3))
        P = np.abs(np.fft.rfft(s.s_t.samples)) ** 2
        f = np.fft.rfftfreq(len(s.s_t), 1 / 100.0)
        outside = P[(f < 6 - 0.05) | (f > 14 + 0.05)].sum()
        assert outside < 0.01 * P.sum()

    def test_noise_spans_full_range(self):
        s = generate(SyntheticSpec(seed=4))
        P = np.abs(np.fft.rfft(s.s_w.samples)) ** 2
        f = np.fft.rfftfreq(len(s.s_w), 1 / 100.0)
        assert P[f > 30].sum() > 0.2 * P.sum()

    def test_deterministic(self):
        a, b = generate(SyntheticSpec(seed=9)), generate(SyntheticSpec(seed=9))
        for part in ("s", "s_v", "s_w", "s_t"):
            assert getattr(a, part).samples.tobytes() == getattr(b, part).samples.tobytes()
        assert not np.array_equal(a.s_w.samples, generate(SyntheticSpec(seed=10)).s_w.samples)

    def test_decomposition(self):
        s = generate(SyntheticSpec(seed=1))
        np.testing.assert_array_equal(s.s.samples, s.s_v.samples + s.s_w.samples + s.s_t.samples)
        resid = s.s.samples - s.s_v.samples - s.s_w.samples - s.s_t.samples
        assert np.max(np.abs(resid)) <= 4 * np.spacing(np.abs(s.s.samples).max())

    def test_snr_recomputable(self):
        s = generate(SyntheticSpec(seed=2))
        p = power(s.s_w.samples) + power(s.s_t.samples)
        assert abs(snr_db(power(s.s_v.samples), p) - s.snr_in) < 1e-9

    def test_reference_calibration(self):
        specs = reference_specs()
        assert [s.name for s in specs] == [f"Signal{i}" for i in range(1, 11)]
        for spec, target in zip(specs, REFERENCE_SNR_DB):
            assert abs(generate(spec).snr_in - target) <= 0.5

    def test_tremor_share(self):
        s = generate(SyntheticSpec(snr_db=5.0, tremor_share=0.5, seed=5))
        assert power(s.s_t.samples) == pytest.approx(power(s.s_w.samples), rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(voluntary_freq=1.5), dict(tremor_band=(6, 60)),
                                    dict(noise_amp_mean=-1), dict(fs=0), dict(tremor_share=2)])
    def test_invalid_spec(self, kw):
        with pytest.raises(ValueError):
            SyntheticSpec(**kw)

    def test_spec_text_round_trip(self, tmp_path):
        spec = SyntheticSpec(snr_db=7.5, seed=11, name="x1", tremor_band=(5.0, 12.0))
        p = tmp_path / "a.spec"
        p.write_text("# my spec\n" + spec.to_text())
        assert SyntheticSpec.from_file(p) == spec
        with pytest.raises(ValueError, match="unknown spec key"):
            SyntheticSpec.from_text("colour = red\n")


class TestMetrics:
    def test_snr_db(self):
        assert snr_db(2.0, 2.0) == 0.0
        assert snr_db(100.0, 1.0) == pytest.approx(20.0)
        with pytest.raises(MetricError):
            snr_db(0.0, 1.0)

    @given(st.floats(0.1, 10), st.floats(0.1, 10))
    def test_snr_monotone(self, a, b):
        if a < b:
            assert snr_db(a, 1.0) < snr_db(b, 1.0)

    def test_nrmse_examples(self, rng):
        gt = rng.standard_normal(50)
        assert nrmse(gt, gt) == 0.0
        assert nrmse(gt, gt + 0.3) == pytest.approx(0.3 / np.ptp(gt), rel=1e-12)
        with pytest.raises(MetricError):
            nrmse(np.ones(5), np.zeros(5))
        with pytest.raises(MetricError):
            nrmse(gt, gt[:-1])

    @given(st.integers(0, 2 ** 31), st.floats(-100, 100).filter(lambda c: abs(c) > 1e-3))
    def test_nrmse_scale_invariant(self, seed, c):
        r = np.random.default_rng(seed)
        gt, pr = r.standard_normal(40), r.standard_normal(40)
        assert nrmse(c * gt, c * pr) == pytest.approx(nrmse(gt, pr), abs=1e-12)

    def test_prf(self, rng):
        s_v = rng.standard_normal(30)
        assert prf(s_v, s_v) == 0.0
        assert prf(s_v, np.zeros(30)) == pytest.approx(100.0)
        with pytest.raises(MetricError):
            prf(np.zeros(3), np.ones(3))

    def test_snr_out(self, rng):
        s_v = rng.standard_normal(30)
        assert snr_out(s_v, s_v) == 300.0
        assert snr_out(s_v, 0.9 * s_v) == pytest.approx(20.0)


def short_specs(n=2):
    return [SyntheticSpec(duration=12.0, snr_db=snr, seed=100 + i, name=f"S{i}")
            for i, snr in enumerate([7.5, 20.9][:n])]


class TestBenchmark:
    def test_table_shape_and_determinism(self):
        a = run_benchmark(short_specs())
        b = run_benchmark(short_specs())
        assert a == b
        assert [(r.signal, r.method) for r in a] == [
            (s, m) for s in ("S0", "S1") for m in ("wake", "bmflc", "ebmflc")]

    def test_single_method(self):
        rows = run_benchmark(short_specs(1), ["wake"])
        assert len(rows) == 1 and rows[0].method == "wake"

    def test_unknown_method(self):
        with pytest.raises(KeyError, match="unknown method"):
            run_benchmark(short_specs(1), ["kalman9000"])

    def test_oracle_method(self):
        clean = SyntheticSpec(duration=10.0, noise_amp_mean=0, noise_amp_var=0,
                              tremor_amp_mean=0, tremor_amp_var=0, name="clean")
        rows = run_benchmark([clean], [("oracle", lambda sig, ctx: sig.s_v.samples)])
        r = rows[0]
        assert r.prf == 0.0 and r.snr_out == 300.0 and r.nrmse < 1e-12

    def test_strict_mode_scores_emitted_rows(self):
        rows = run_benchmark(short_specs(1), ["wake", "bmflc"], WakeConfig(strict_paper=True))
        assert len(rows) == 2 and all(np.isfinite(r.nrmse) for r in rows)

    def test_results_csv(self, tmp_path):
        rows = [BenchmarkRow("Signal1", 7.5, "wake", 2.5, 16.0, 0.05),
                BenchmarkRow("Signal1", 7.5, "bmflc", 16.0, 7.8, 0.13)]
        p = tmp_path / "r.csv"
        write_results(rows, p)
        assert p.read_text().splitlines()[0] == "signal,snr_in,method,prf,snr_out,nrmse"
        assert read_results(p) == rows

    def test_wake_wins(self):
        rows = [BenchmarkRow("a", 0, "wake", 0, 0, 0.1), BenchmarkRow("a", 0, "bmflc", 0, 0, 0.2),
                BenchmarkRow("b", 0, "wake", 0, 0, 0.3), BenchmarkRow("b", 0, "bmflc", 0, 0, 0.2),
                BenchmarkRow("c", 0, "wake", 0, 0, 0.3)]
        assert wake_wins(rows) == (1, 2)

    def test_dataset_round_trip(self, tmp_path):
        sigs = [generate(s) for s in short_specs()]
        save_dataset(sigs, tmp_path / "d")
        back = load_dataset(tmp_path / "d")
        for a, b in zip(sigs, back):
            assert a.spec == b.spec and a.snr_in == b.snr_in
            for part in ("s", "s_v", "s_w", "s_t"):
                np.testing.assert_array_equal(getattr(a, part).samples, getattr(b, part).samples)
        assert run_benchmark(back, ["wake"]) == run_benchmark(sigs, ["wake"])

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path)
