import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import lstsq_objective
from wake.hpa import optimize_weights, rms_error, run_hpa, split_window
from wake.signal import SignalWindow, WakeConfig
from wake.synthbench import generate, nrmse, reference_specs
from wake.wavelet import basis_for, build_approximation_matrix

FS = 100.0
CFG = WakeConfig()


def objective(A, b, w):
    r = A @ w - b
    return float(r @ r)


class TestOptimizeWeights:
    def test_identity_system(self):
        b = np.array([1.0, -2.0, 3.5, 0.25, 7.0])
        fit = optimize_weights(np.eye(5), b)
        np.testing.assert_allclose(fit.weights, b, atol=1e-8)
        assert fit.converged

    def test_planted_solution(self, rng):
        A = rng.standard_normal((256, 5))
        w0 = np.array([1.0, -2.0, 0.0, 3.0, 0.5])
        np.testing.assert_allclose(optimize_weights(A, A @ w0).weights, w0, atol=1e-6)

    def test_duplicate_columns(self, rng):
        A = rng.standard_normal((200, 5))
        A[:, 3] = A[:, 1]
        b = rng.standard_normal(200)
        best, _ = lstsq_objective(A, b)
        fit = optimize_weights(A, b)
        assert objective(A, b, fit.weights) == pytest.approx(best, rel=1e-6)

    def test_residual_matches_definition(self, rng):
        A = rng.standard_normal((64, 3))
        b = rng.standard_normal(64)
        fit = optimize_weights(A, b)
        assert fit.residual == pytest.approx(np.sqrt(np.mean((A @ fit.weights - b) ** 2)), rel=1e-12)
        assert fit.residual == rms_error(A, b, fit.weights)

    @given(st.integers(0, 2 ** 31), st.floats(1e-3, 1e3))
    def test_scale_equivariance(self, seed, c):
        r = np.random.default_rng(seed)
        A = r.standard_normal((50, 4))
        b = r.standard_normal(50)
        w1 = optimize_weights(A, b).weights
        w2 = optimize_weights(c * A, c * b).weights
        np.testing.assert_allclose(w2, w1, atol=1e-6 * max(1, np.max(np.abs(w1))))

    @given(st.integers(0, 2 ** 31))
    def test_warm_start_never_worse(self, seed):
        r = np.random.default_rng(seed)
        A = r.standard_normal((80, 5))
        b = r.standard_normal(80)
        cold = optimize_weights(A, b)
        warm = optimize_weights(A, b, warm_start=r.standard_normal(5) * 10)
        assert objective(A, b, warm.weights) <= objective(A, b, cold.weights) + 1e-8

    def test_bad_input(self):
        with pytest.raises(ValueError):
            optimize_weights(np.ones((3, 5)), np.ones(3))
        with pytest.raises(ValueError):
            optimize_weights(np.ones((5, 2)), np.ones(4))
        A = np.ones((5, 2))
        A[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            optimize_weights(A, np.ones(5))

    def test_iteration_cap_flags(self, rng):
        A = rng.standard_normal((40, 5)) @ np.diag([1, 1e-3, 1e3, 1, 1])
        fit = optimize_weights(A, rng.standard_normal(40), max_iter=1)
        assert not fit.converged and fit.iterations == 1


def tone_window(n=500, f=0.5):
    return SignalWindow(np.sin(2 * np.pi * f * np.arange(n) / FS), 0, FS)


class TestRunHpa:
    def test_tone_plus_tremor(self, rng):
        t = np.arange(500) / FS
        v = np.sin(2 * np.pi * 0.5 * t)
        tremor = sum(0.02 * np.sin(2 * np.pi * f * t + rng.uniform(0, 6)) for f in np.arange(6, 14, 0.5))
        hp = run_hpa(SignalWindow(v + tremor, 0, FS), CFG)
        assert nrmse(v, hp.voluntary_gt) < 0.05
        assert 1.5 <= hp.f_d <= 6.0

    def test_snapshot_invariants(self, rng):
        sig = generate(reference_specs()[0])
        w = SignalWindow(sig.s.samples[:500], 0, FS)
        hp = run_hpa(w, CFG, version=3)
        np.testing.assert_array_equal(hp.voluntary_gt, w.values - hp.tremor_gt)
        assert hp.R == pytest.approx(np.var(hp.tremor_gt), rel=1e-12)
        A = build_approximation_matrix(w, basis_for(CFG.wavelet_name), CFG.levels)
        assert hp.residual == pytest.approx(np.sqrt(np.mean((A @ hp.weights - hp.voluntary_gt) ** 2)), abs=1e-10)
        assert hp.version == 3 and hp.levels == 5 and hp.window_start == 0
        assert hp.window_var == pytest.approx(np.var(w.values))

    def test_constant_window(self):
        hp = run_hpa(SignalWindow(np.full(500, 2.0), 0, FS), CFG)
        assert np.max(np.abs(hp.tremor_gt)) < 1e-9
        np.testing.assert_allclose(hp.voluntary_gt, 2.0, atol=1e-9)
        assert hp.residual < 1e-6

    def test_high_snr_window(self):
        sig = generate(reference_specs()[7])
        x = sig.s.samples[:500]
        hp = run_hpa(SignalWindow(x, 0, FS), CFG)
        assert hp.residual / np.ptp(hp.voluntary_gt) < 0.05

    def test_split_complementary(self, rng):
        w = SignalWindow(rng.standard_normal(100), 0, FS)
        v, i = split_window(w, 5.0)
        np.testing.assert_allclose(v + i, w.values, atol=1e-14)

    def test_short_window(self):
        with pytest.raises(ValueError, match="too short"):
            run_hpa(np.ones(16), CFG)
