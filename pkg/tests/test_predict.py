"""Predictive distribution tests."""

import numpy as np
import pytest

from bayescp.model import PriorConfig, TauPosterior, fit, reconstruct
from bayescp.predict import StudentTPrediction, predict_entry, predict_missing
from bayescp.synthetic import generate_synthetic
from bayescp.tensors import ObservationMask

from helpers import random_state


class TestPredictEntry:
    def test_dof_is_twice_noise_shape(self):
        rng = np.random.default_rng(0)
        state = random_state(rng, (4, 3, 5), 2)
        pred = predict_entry(state, (1, 2, 3))
        assert pred.dof == pytest.approx(2.0 * state.tau.a)

    def test_point_mass_factors_leave_noise_term_only(self):
        rng = np.random.default_rng(1)
        state = random_state(rng, (3, 3, 3), 2)
        for f in state.factors:
            f.cov = np.zeros_like(f.cov)
            f.refresh_quad()
        pred = predict_entry(state, (0, 1, 2))
        b_over_a = state.tau.b / state.tau.a
        assert 1.0 / pred.scale == pytest.approx(b_over_a, rel=1e-12)
        dof = pred.dof
        assert pred.variance == pytest.approx(dof / (dof - 2.0) * b_over_a)

    def test_mean_equals_reconstruction_entry(self):
        rng = np.random.default_rng(2)
        state = random_state(rng, (4, 5, 3), 3)
        recon = reconstruct(state)
        idx = (2, 4, 1)
        assert predict_entry(state, idx).mean == pytest.approx(recon[idx], rel=1e-12)

    def test_rank1_matrix_scalar_expansion(self):
        rng = np.random.default_rng(3)
        state = random_state(rng, (4, 4), 1)
        i, j = 1, 3
        a = state.factors[0].mean[i, 0]
        b = state.factors[1].mean[j, 0]
        v1 = state.factors[0].cov[i, 0, 0]
        v2 = state.factors[1].cov[j, 0, 0]
        expected_sinv = state.tau.b / state.tau.a + b * b * v1 + a * a * v2
        pred = predict_entry(state, (i, j))
        assert 1.0 / pred.scale == pytest.approx(expected_sinv, rel=1e-12)

    def test_scale_inverse_at_least_noise_floor(self):
        rng = np.random.default_rng(4)
        state = random_state(rng, (4, 4, 4), 2)
        floor = state.tau.b / state.tau.a
        for idx in [(0, 0, 0), (3, 2, 1), (1, 1, 1)]:
            assert 1.0 / predict_entry(state, idx).scale >= floor

    def test_out_of_bounds(self):
        rng = np.random.default_rng(5)
        state = random_state(rng, (3, 3, 3), 1)
        with pytest.raises(IndexError):
            predict_entry(state, (3, 0, 0))

    def test_variance_undefined_for_small_dof(self):
        pred = StudentTPrediction(mean=0.0, scale=1.0, dof=1.5)
        with pytest.raises(ValueError):
            _ = pred.variance


class TestPredictMissing:
    def test_all_observed(self):
        rng = np.random.default_rng(6)
        state = random_state(rng, (3, 4, 2), 2, obs_ratio=1.0)
        mean, var = predict_missing(state, state.mask)
        np.testing.assert_array_equal(mean, reconstruct(state))
        np.testing.assert_array_equal(var, np.zeros(state.shape))

    def test_variance_positive_on_missing(self):
        rng = np.random.default_rng(7)
        state = random_state(rng, (4, 4, 4), 2, obs_ratio=0.5)
        state.tau = TauPosterior(10.0, 2.0)
        mean, var = predict_missing(state, state.mask)
        missing = ~state.mask.flags
        assert np.all(var[missing] > 0)
        assert np.all(var[~missing] == 0)

    def test_matches_entrywise_prediction(self):
        rng = np.random.default_rng(8)
        state = random_state(rng, (4, 3, 3), 2, obs_ratio=0.6)
        state.tau = TauPosterior(8.0, 1.5)
        mean, var = predict_missing(state, state.mask)
        dof = 2.0 * state.tau.a
        for idx in map(tuple, state.mask.missing_indices()[:5]):
            pred = predict_entry(state, idx)
            assert mean[idx] == pytest.approx(pred.mean, rel=1e-12)
            assert var[idx] == pytest.approx(pred.variance, rel=1e-12)
        assert dof > 2

    def test_interval_coverage_on_toy_fits(self):
        # central 95% predictive intervals should cover >= 90% of the truth
        from scipy.stats import t as student_t

        rates = []
        for seed in range(3):
            inst = generate_synthetic((12, 12, 12), 3, 0.5, 500 + seed, snr_db=20)
            state, _ = fit(inst.observed, inst.mask,
                           PriorConfig(init_rank=6, seed=seed))
            mean, var = predict_missing(state, inst.mask)
            missing = ~inst.mask.flags
            dof = 2.0 * state.tau.a
            t_scale = np.sqrt(var[missing] / (dof / (dof - 2.0)))
            q = student_t.ppf(0.975, dof)
            inside = np.abs(inst.truth[missing] - mean[missing]) <= q * t_scale
            rates.append(inside.mean())
        assert min(rates) >= 0.90
