import numpy as np
import pytest

from stovk.errors import DimensionMismatch, RankOutOfRange
from stovk.kernels import ScalarKernel
from stovk.koopman import build_forecast, fit_koopman, forecast_at, koopman_apply
from stovk.sampling import TrajectoryPairs, halton_points, make_trajectory_pairs


def identity_pairs(n, seed=0):
    states = halton_points(n, 1, seed=seed).points[:, 0]
    return TrajectoryPairs(states=states, advanced=states.copy(), dt=0.05)


class TestFitKoopman:
    def test_identity_dynamics_gives_projector(self):
        model = fit_koopman(identity_pairs(40), ScalarKernel(0.2))
        assert np.array_equal(model.gram, model.gram_adv)
        assert np.max(np.abs(model.operator @ model.operator - model.operator)) <= 1e-6
        mods = np.abs(model.spectrum.eigenvalues)
        assert np.all((mods <= 1e-6) | (np.abs(mods - 1.0) <= 1e-6))

    def test_fixed_point_pairs(self):
        pairs = TrajectoryPairs(states=np.array([0.0, 0.5]), advanced=np.array([0.0, 0.5]), dt=0.05)
        model = fit_koopman(pairs, ScalarKernel(0.3))
        np.testing.assert_allclose(model.spectrum.eigenvalues, [1.0, 1.0], atol=1e-9)

    def test_leading_eigenvalue_near_one(self):
        model = fit_koopman(make_trajectory_pairs(200, 0.05, seed=42), ScalarKernel(0.2))
        assert abs(abs(model.spectrum.eigenvalues[0]) - 1.0) <= 0.05

    def test_gram_psd_and_operator_shape(self):
        model = fit_koopman(make_trajectory_pairs(60, 0.05, seed=1), ScalarKernel(0.2))
        assert np.linalg.eigvalsh(model.gram).min() >= -1e-8
        assert model.operator.shape == (60, 60)

    def test_spectrum_satisfies_residual_contract(self):
        model = fit_koopman(make_trajectory_pairs(80, 0.05, seed=2), ScalarKernel(0.2))
        bound = 1e-6 * np.linalg.norm(model.operator, "fro")
        for k in range(len(model)):
            v = model.spectrum.eigenvectors[:, k]
            assert np.linalg.norm(model.operator @ v - model.spectrum.eigenvalues[k] * v) <= bound

    def test_requires_two_pairs(self):
        pairs = TrajectoryPairs(states=np.array([0.3]), advanced=np.array([0.31]), dt=0.05)
        with pytest.raises(ValueError):
            fit_koopman(pairs, ScalarKernel(0.2))


class TestKoopmanApply:
    def test_constant_observable_maps_near_one(self):
        model = fit_koopman(make_trajectory_pairs(200, 0.05, seed=42), ScalarKernel(0.2))
        out = koopman_apply(model, np.ones(200))
        assert np.max(np.abs(out - 1.0)) <= 0.05

    def test_sine_observable_tracks_flow(self):
        pairs = make_trajectory_pairs(200, 0.05, seed=42)
        model = fit_koopman(pairs, ScalarKernel(0.2))
        out = koopman_apply(model, np.sin(2 * np.pi * pairs.states))
        truth = np.sin(2 * np.pi * pairs.advanced)
        assert np.max(np.abs(out - truth)) <= 0.05

    def test_identity_dynamics_projection_idempotent(self):
        model = fit_koopman(identity_pairs(50, seed=3), ScalarKernel(0.2))
        g = np.cos(2 * np.pi * model.centers)
        once = koopman_apply(model, g)
        twice = koopman_apply(model, once)
        assert np.max(np.abs(twice - once)) <= 1e-6
        # output is the orthogonal projection of g onto range(G)
        projector = model.gram @ model.gram_pinv
        np.testing.assert_allclose(once, projector @ g, atol=1e-8)

    def test_vector_valued_samples(self):
        pairs = make_trajectory_pairs(100, 0.05, seed=4)
        model = fit_koopman(pairs, ScalarKernel(0.2))
        obs = np.column_stack([np.sin(2 * np.pi * pairs.states), np.cos(2 * np.pi * pairs.states)])
        out = koopman_apply(model, obs)
        assert out.shape == (100, 2)

    def test_sample_count_mismatch(self):
        model = fit_koopman(make_trajectory_pairs(30, 0.05, seed=5), ScalarKernel(0.2))
        with pytest.raises(DimensionMismatch):
            koopman_apply(model, np.ones(29))


class TestForecast:
    def setup_method(self):
        self.pairs = make_trajectory_pairs(200, 0.05, seed=42)
        self.model = fit_koopman(self.pairs, ScalarKernel(0.2))
        angle = 2 * np.pi * self.pairs.states
        self.obs = np.column_stack([np.sin(angle), np.cos(angle)])

    def err0(self, rank):
        fc = build_forecast(self.model, self.obs, rank)
        values = forecast_at(fc, 0)
        return float(np.sqrt(np.mean(np.sum((values - self.obs) ** 2, axis=1))))

    def test_step0_is_rank_reconstruction(self):
        fc = build_forecast(self.model, self.obs, 8)
        recon = fc.basis @ fc.modes
        np.testing.assert_allclose(forecast_at(fc, 0), recon.real, atol=1e-12)

    def test_full_rank_step0_equals_projection_onto_gram_range(self):
        # numerically full-rank Gram: the eigenbasis spans range(G) exactly
        pairs = make_trajectory_pairs(20, 0.05, seed=6)
        model = fit_koopman(pairs, ScalarKernel(0.05))
        obs = np.column_stack([np.sin(2 * np.pi * pairs.states), np.cos(2 * np.pi * pairs.states)])
        fc = build_forecast(model, obs, 20)
        projection = model.gram @ (model.gram_pinv @ obs)
        assert np.max(np.abs(forecast_at(fc, 0) - projection)) <= 1e-6

    def test_full_rank_step0_near_projection_with_truncated_gram(self):
        # rank-deficient Gram: agreement is limited by the pseudoinverse
        # truncation cliff (directions straddling rel_tol * sigma_max), so
        # the comparison is meaningful only to ~1e-4 here
        pairs = identity_pairs(50, seed=6)
        model = fit_koopman(pairs, ScalarKernel(0.2))
        obs = np.column_stack([np.sin(2 * np.pi * pairs.states), np.cos(2 * np.pi * pairs.states)])
        fc = build_forecast(model, obs, 50)
        projection = model.gram @ (model.gram_pinv @ obs)
        assert np.max(np.abs(forecast_at(fc, 0) - projection)) <= 1e-4

    def test_error_non_increasing_in_rank(self):
        errors = [self.err0(r) for r in (1, 2, 4, 8, 16)]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))

    def test_near_constant_observable_rank_one(self):
        g = np.ones((200, 1)) + 1e-3 * np.sin(2 * np.pi * self.pairs.states)[:, None]
        fc = build_forecast(self.model, g, 1)
        start = forecast_at(fc, 0)
        for step in (1, 5, 20):
            assert np.max(np.abs(forecast_at(fc, step) - start)) <= 0.01

    def test_fixed_point_data_constant_forecast(self):
        pairs = TrajectoryPairs(states=np.array([0.0, 0.5]), advanced=np.array([0.0, 0.5]), dt=0.05)
        model = fit_koopman(pairs, ScalarKernel(0.3))
        obs = np.array([[1.0], [2.0]])
        fc = build_forecast(model, obs, 2)
        start = forecast_at(fc, 0)
        for step in (1, 3, 10):
            np.testing.assert_allclose(forecast_at(fc, step), start, atol=1e-8)

    def test_two_steps_track_repeated_application_rank_one(self):
        fc = build_forecast(self.model, self.obs, 1)
        recon = forecast_at(fc, 0)
        twice = koopman_apply(self.model, koopman_apply(self.model, recon))
        assert np.max(np.abs(forecast_at(fc, 2) - twice)) <= 0.05

    def test_imaginary_residual_small_when_pairs_kept_whole(self):
        # rank 3 retains the real leading eigenvalue plus one full conjugate pair
        fc = build_forecast(self.model, self.obs, 3)
        for step in range(10):
            forecast_at(fc, step)
        assert fc.max_imag_ratio <= 1e-6

    def test_rank_bounds(self):
        with pytest.raises(RankOutOfRange):
            build_forecast(self.model, self.obs, 0)
        with pytest.raises(RankOutOfRange):
            build_forecast(self.model, self.obs, 201)

    def test_negative_steps_rejected(self):
        fc = build_forecast(self.model, self.obs, 2)
        with pytest.raises(ValueError):
            forecast_at(fc, -1)
