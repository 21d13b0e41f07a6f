import numpy as np
import pytest
from scipy.integrate import quad

from omgp import (DataSet, KernelSpec, OmgpConfig, associate, fit, gp_fit, gp_predict,
                  predict, predictive_density)
from omgp.errors import DimensionError
from omgp.inference import OmgpModel, m_step_posterior, permute_components
from omgp.kernels import self_gram
from omgp.prediction import (MixturePrediction, log_predictive_density, read_labels_csv,
                             write_labels_csv, write_prediction_csv)

import oracles
from conftest import random_instance


def model_from(data, resp, config):
    centered, mean = data.centered()
    return OmgpModel(config, centered, mean, resp, m_step_posterior(centered, resp, config))


class TestPredict:
    def test_reduces_to_gp(self, rng):
        data, _, cfg = random_instance(rng, 12, 1, D=2)
        pred = predict(model_from(data, np.ones((12, 1)), cfg), rng.uniform(0, 20, (6, 1)))
        mean, var = gp_predict(gp_fit(data, cfg.kernels[0], cfg.noise_variance), pred.inputs)
        np.testing.assert_allclose(pred.means[:, 0, :], mean, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(pred.variances[:, 0], var, rtol=1e-9)

    @pytest.mark.parametrize("trial", range(5))
    def test_matches_dense_oracle(self, trial):
        rng = np.random.default_rng(300 + trial)
        data, resp, cfg = random_instance(rng, 8, 2, D=2)
        model = model_from(data, resp, cfg)
        Xs = rng.uniform(0, 12, (5, 1))
        pred = predict(model, Xs)
        for m, spec in enumerate(cfg.kernels):
            K = self_gram(spec, model.data.inputs)
            ks = oracles.se_ard_gram(model.data.inputs, Xs, spec.signal_power, spec.length_scales)
            mu, var = oracles.mixture_predict(K, ks, np.full(5, spec.signal_power), resp[:, m],
                                              cfg.noise_variance, model.data.outputs)
            np.testing.assert_allclose(pred.means[:, m, :], mu + model.output_mean, rtol=1e-8)
            np.testing.assert_allclose(pred.variances[:, m], var, rtol=1e-8)

    def test_prior_reversion_at_floor(self, rng):
        data, _, _ = random_instance(rng, 6, 2)
        cfg = OmgpConfig([KernelSpec.se_ard(1.5, (1.0,))] * 2, 0.1)
        resp = np.tile([1 - 1e-10, 1e-10], (6, 1))
        pred = predict(model_from(data, resp, cfg), data.inputs)
        np.testing.assert_allclose(pred.means[:, 1, 0], data.outputs.mean(), atol=1e-6)
        np.testing.assert_allclose(pred.variances[:, 1], 1.6, rtol=1e-6)

    def test_variance_floor(self, rng):
        data, resp, cfg = random_instance(rng, 10, 2)
        pred = predict(model_from(data, resp, cfg), data.inputs)
        assert np.all(pred.variances >= cfg.noise_variance)

    def test_permutation_equivariance(self, rng):
        data, resp, cfg = random_instance(rng, 9, 3)
        perm = [1, 2, 0]
        Xs = rng.uniform(0, 14, (4, 1))
        a = predict(model_from(data, resp, cfg), Xs)
        b = predict(model_from(data, resp[:, perm], permute_components(cfg, perm)), Xs)
        np.testing.assert_allclose(b.means, a.means[:, perm], rtol=1e-12)
        np.testing.assert_allclose(b.variances, a.variances[:, perm], rtol=1e-12)
        for i in range(4):
            assert predictive_density(b, [0.3], i) == pytest.approx(predictive_density(a, [0.3], i))

    def test_wrong_input_dimension(self, rng):
        data, resp, cfg = random_instance(rng, 5, 2)
        with pytest.raises(DimensionError):
            predict(model_from(data, resp, cfg), np.zeros((3, 2)))


class TestDensity:
    def single(self, means, variances, weights):
        return MixturePrediction(np.zeros((1, 1)), np.asarray(weights, float),
                                 np.asarray(means, float)[None, :, None],
                                 np.asarray(variances, float)[None])

    def test_single_gaussian(self):
        pred = self.single([1.0], [0.5], [1.0])
        expected = np.exp(-0.5 * 0.25 / 0.5) / np.sqrt(2 * np.pi * 0.5)
        assert predictive_density(pred, [1.5], 0) == pytest.approx(expected, rel=1e-14)

    def test_integrates_to_one(self):
        pred = self.single([-1.0, 2.0], [0.3, 1.2], [0.3, 0.7])
        total, _ = quad(lambda y: predictive_density(pred, [y], 0), -30, 30, limit=200)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_symmetric_midpoint(self):
        pred = self.single([-1.0, 1.0], [0.4, 0.4], [0.5, 0.5])
        one = 0.5 * np.exp(-0.5 / 0.4) / np.sqrt(2 * np.pi * 0.4)
        assert predictive_density(pred, [0.0], 0) == pytest.approx(2 * one, rel=1e-14)

    def test_log_density_finite_far_out(self):
        pred = self.single([0.0], [0.1], [1.0])
        assert np.isfinite(log_predictive_density(pred, [1e3], 0))


class TestAssociate:
    def fake(self, resp):
        class M:
            responsibilities = np.asarray(resp, float)
        return M()

    def test_argmax_and_ties(self):
        np.testing.assert_array_equal(associate(self.fake([[0.9, 0.1], [0.5, 0.5]])), [0, 0])

    def test_monotone_rescaling_invariance(self, rng):
        resp = rng.dirichlet([1, 1, 1], 20)
        np.testing.assert_array_equal(associate(self.fake(resp)),
                                      associate(self.fake(np.exp(3 * resp) - 0.5)))


class TestFiles:
    def test_labels_roundtrip(self, rng, tmp_path):
        data, _, cfg = random_instance(rng, 10, 2)
        model = fit(data, cfg)
        write_labels_csv(model, tmp_path / "l.csv")
        np.testing.assert_array_equal(read_labels_csv(tmp_path / "l.csv"), associate(model))

    def test_prediction_csv_layout(self, rng, tmp_path):
        data, resp, cfg = random_instance(rng, 6, 2, D=2)
        write_prediction_csv(predict(model_from(data, resp, cfg), [[0.0], [1.0]]),
                             tmp_path / "p.csv")
        lines = (tmp_path / "p.csv").read_text().splitlines()
        assert lines[0] == "x1,component,mean_1,mean_2,variance,weight"
        assert len(lines) == 1 + 2 * 2
