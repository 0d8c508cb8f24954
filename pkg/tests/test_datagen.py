import numpy as np
import pytest

from packnap.datagen import (ArmaConfig, ArmaState, arma_step, generate_stream,
                             synthesize_weights, write_stream_csv)
from packnap.errors import NumericError


CFG = ArmaConfig()


class TestArmaStep:
    def test_zero_everything_stays_zero(self):
        x, state = arma_step(ArmaState(), CFG, np.zeros(3))
        assert np.array_equal(x, np.zeros(3))
        assert np.array_equal(state.x_prev, np.zeros(3))

    def test_first_step_passes_innovation_through(self):
        u = np.array([1.0, 0.0, 0.0])
        x, state = arma_step(ArmaState(), CFG, u)
        assert np.array_equal(x, u)
        assert np.array_equal(state.u_prev, u)

    def test_matches_direct_recurrence(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            state = ArmaState(x_prev=rng.standard_normal(3), x_prev2=rng.standard_normal(3),
                              u_prev=rng.standard_normal(3), u_prev2=rng.standard_normal(3))
            u = rng.standard_normal(3)
            x, _ = arma_step(state, CFG, u)
            direct = (u + CFG.phi1 @ state.x_prev + CFG.phi2 @ state.x_prev2
                      + CFG.theta1 @ state.u_prev + CFG.theta2 @ state.u_prev2)
            assert np.max(np.abs(x - direct)) <= 1e-12

    def test_lag_shift(self):
        rng = np.random.default_rng(1)
        state = ArmaState(x_prev=rng.standard_normal(3), u_prev=rng.standard_normal(3))
        u = rng.standard_normal(3)
        x, nxt = arma_step(state, CFG, u)
        assert np.array_equal(nxt.x_prev, x)
        assert np.array_equal(nxt.x_prev2, state.x_prev)
        assert np.array_equal(nxt.u_prev, u)
        assert np.array_equal(nxt.u_prev2, state.u_prev)

    def test_rejects_non_finite(self):
        with pytest.raises(NumericError):
            arma_step(ArmaState(), CFG, np.array([np.nan, 0, 0]))
        bad = ArmaState(x_prev=np.array([np.inf, 0, 0]))
        with pytest.raises(NumericError):
            arma_step(bad, CFG, np.zeros(3))


class TestSynthesizeWeights:
    def test_zero_inputs_give_all_twos(self):
        A = synthesize_weights(np.zeros(3), np.zeros(3), np.zeros(12), CFG)
        assert A.shape == (3, 4)
        assert np.array_equal(A, np.full((3, 4), 2.0))

    def test_extreme_negative_saturates_at_floor(self):
        # push the pre-clip vector far below the floor through delta
        A = synthesize_weights(np.zeros(3), np.full(3, -1e7), np.zeros(12), CFG)
        assert np.array_equal(A, np.ones((3, 4)))

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.standard_normal(3)
            delta = rng.standard_normal(3)
            eps = rng.standard_normal(12)
            raw = CFG.g @ (x + delta / 4.0) + (CFG.b @ x) * eps
            direct = (np.maximum(-100.0, raw) / 100.0 + 2.0).reshape(3, 4)
            got = synthesize_weights(x, delta, eps, CFG)
            assert np.max(np.abs(got - direct)) <= 1e-12

    def test_row_major_reshape(self):
        # make exactly one pre-clip component land away from the pack
        rng = np.random.default_rng(3)
        x = rng.standard_normal(3)
        eps = np.zeros(12)
        eps[6] = 5.0
        A = synthesize_weights(x, np.zeros(3), eps, CFG)
        flat = CFG.g @ x + (CFG.b @ x) * eps
        expect = np.maximum(-100.0, flat) / 100.0 + 2.0
        assert A[1, 2] == expect[6]  # element 6 -> row 1, column 2

    def test_entries_at_least_one(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            A = synthesize_weights(10 * rng.standard_normal(3), rng.standard_normal(3),
                                   rng.standard_normal(12), CFG)
            assert (A >= 1.0).all()


class TestGenerateStream:
    def test_zero_horizon(self):
        assert generate_stream(CFG, 0, 0) == []

    def test_determinism(self):
        s1 = generate_stream(CFG, 123, 50)
        s2 = generate_stream(CFG, 123, 50)
        assert len(s1) == len(s2) == 50
        for a, b in zip(s1, s2):
            assert a.t == b.t
            assert np.array_equal(a.x, b.x)
            assert np.array_equal(a.A, b.A)

    def test_different_seeds_differ(self):
        s1 = generate_stream(CFG, 1, 5)
        s2 = generate_stream(CFG, 2, 5)
        assert not np.array_equal(s1[0].x, s2[0].x)

    def test_noise_free_config_is_constant_twos(self):
        quiet = ArmaConfig(sigma_u=np.zeros((3, 3)))
        stream = generate_stream(quiet, 7, 20)
        for d in stream:
            assert np.array_equal(d.x, np.zeros(3))
        # delta/eps still drawn but multiplied into zero-amplitude terms only
        # through G @ (delta/4), which is not zero; suppress them explicitly
        silent = ArmaConfig(sigma_u=np.zeros((3, 3)), g=np.zeros((12, 3)))
        for d in generate_stream(silent, 7, 20):
            assert np.array_equal(d.A, np.full((3, 4), 2.0))

    def test_long_stream_statistics_fixture(self):
        stream = generate_stream(CFG, 2024, 10000)
        A = np.stack([d.A for d in stream])
        assert A.min() >= 1.0
        assert 1.5 <= A.mean() <= 2.5
        # frozen regression value for this seed
        assert A.mean() == pytest.approx(2.0007701520006256, abs=1e-12)

    def test_burn_in_shifts_the_stream(self):
        plain = generate_stream(CFG, 5, 10)
        burned = generate_stream(CFG, 5, 10, burn_in=3)
        assert burned[0].t == 0
        assert not np.array_equal(plain[0].x, burned[0].x)

    def test_csv_export_round_trip_format(self, tmp_path):
        stream = generate_stream(CFG, 9, 4)
        path = tmp_path / "stream.csv"
        write_stream_csv(stream, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == ("t,x1,x2,x3,a11,a12,a13,a14,a21,a22,a23,a24,a31,a32,a33,a34")
        assert len(lines) == 5
        cells = lines[1].split(",")
        assert cells[0] == "0"
        assert float(cells[4]) == stream[0].A[0, 0]


class TestConfigValidation:
    def test_rejects_asymmetric_sigma(self):
        bad = np.array([[1.0, 0.2, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(ValueError):
            ArmaConfig(sigma_u=bad)

    def test_rejects_indefinite_sigma(self):
        bad = np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(ValueError):
            ArmaConfig(sigma_u=bad)

    def test_default_constants(self):
        assert CFG.phi1[0, 0] == 0.5 and CFG.phi1[0, 1] == -0.9
        assert CFG.g[0, 0] == 2.5 * 0.8
        assert CFG.b[0, 1] == -7.5
        assert CFG.clip_floor == -100.0 and CFG.scale == 100.0
        assert CFG.shift == 2.0 and CFG.delta_scale == 0.25
