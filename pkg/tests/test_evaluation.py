import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omgp import evaluate, nn_baseline
from omgp.errors import DataError
from omgp.evaluation import align_labels
from omgp.scenarios import Scenario


def scenario(labels, outputs=None, inputs=None):
    labels = np.asarray(labels)
    n = labels.size
    return Scenario("t", np.arange(n, dtype=float) if inputs is None else inputs,
                    np.zeros(n) if outputs is None else outputs, labels)


class TestAlign:
    def test_permuted_labels(self):
        truth = np.array([0, 1, 2, 0, 1, 2])
        perm, n_err = align_labels((truth + 1) % 3, truth)
        assert n_err == 0 and perm == [2, 0, 1]

    def test_one_flip(self):
        truth = np.tile([0, 1, 2], 30)
        pred = truth.copy()
        pred[17] = (pred[17] + 1) % 3
        assert align_labels(pred, truth)[1] == 1

    def test_too_many_components(self):
        with pytest.raises(DataError):
            align_labels(np.arange(7), np.arange(7))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=40))
    def test_never_worse_than_fixed_labeling(self, pairs):
        pred, truth = np.array(pairs).T
        _, n_err = align_labels(pred, truth, 3)
        assert 0 <= n_err <= np.sum(pred != truth)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_two_components_at_most_half(self, pairs):
        pred, truth = np.array(pairs).T
        assert align_labels(pred, truth, 2)[1] <= truth.size / 2

    def test_random_labels_near_half(self):
        rng = np.random.default_rng(0)
        truth = rng.integers(0, 2, 20000)
        n_err = align_labels(rng.integers(0, 2, 20000), truth)[1]
        assert 0.48 < n_err / 20000 <= 0.5


class TestEvaluate:
    def test_rmse_uses_aligned_component(self):
        sc = scenario([0, 1, 0, 1], outputs=np.array([0.0, 5.0, 0.0, 5.0]))
        sc.noiseless_outputs = np.array([[0.0], [5.0], [0.0], [5.0]])
        means = np.array([np.full((4, 1), 5.0), np.full((4, 1), 1.0)])
        report = evaluate([1, 0, 1, 0], sc, means)
        assert report.n_err == 0 and report.aligning_permutation == [1, 0]
        assert report.rmse == [1.0, 0.0] and report.rmse_reference == "noiseless"
        assert report.rmse_observed == [1.0, 0.0]

    def test_observed_reference(self):
        report = evaluate([0, 0], scenario([0, 0], outputs=np.array([1.0, 3.0])),
                          np.full((1, 2, 1), 2.0))
        assert report.rmse == [1.0] and report.rmse_reference == "observed"
        assert report.rmse_observed == [1.0]

    def test_requires_labels(self):
        with pytest.raises(DataError):
            evaluate([0], Scenario("t", [0.0], [0.0]))


class TestNearestNeighbour:
    def test_parallel_tracks(self):
        t = np.repeat(np.arange(10.0), 2)
        labels = np.tile([0, 1], 10)
        y = np.where(labels == 0, 0.0, 10.0) + 0.01 * np.sin(np.arange(20))
        # shuffle order within each step
        y[2::4], y[3::4] = y[3::4].copy(), y[2::4].copy()
        labels[2::4], labels[3::4] = 1, 0
        sc = scenario(labels, y, t)
        assert evaluate(nn_baseline(sc, 2), sc).n_err == 0

    def test_single_track(self):
        sc = scenario([0] * 5, np.arange(5.0))
        np.testing.assert_array_equal(nn_baseline(sc, 1), 0)

    def test_swaps_at_crossing_where_omgp_does_not(self):
        from omgp.bench import run_association_seed
        errs = [run_association_seed("circles", s, methods=("batch", "nn"))[0] for s in range(3)]
        assert np.median([e["nn"]["n_err"] for e in errs]) > 0
        assert np.median([e["batch"]["n_err"] for e in errs]) < np.median(
            [e["nn"]["n_err"] for e in errs])

    def test_first_step_too_small(self):
        sc = scenario([0, 1], np.zeros(2), np.array([0.0, 1.0]))
        with pytest.raises(DataError):
            nn_baseline(sc, 2)

    def test_unsorted(self):
        sc = scenario([0, 0], np.zeros(2), np.array([1.0, 0.0]))
        with pytest.raises(DataError):
            nn_baseline(sc, 1)
