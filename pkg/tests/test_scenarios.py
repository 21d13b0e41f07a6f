import numpy as np
import pytest

from omgp.errors import DataError
from omgp.scenarios import (GENERATORS, MISSILE_INITIAL_STATES, StateSpaceParams, gen_circles,
                            gen_missile_to_air, gen_multilevel, gen_sinc_outliers, load_csv,
                            load_scenario, measure, save_csv, simulate_states)

import oracles


@pytest.mark.parametrize("name", sorted(GENERATORS))
class TestAllGenerators:
    def test_deterministic_bytes(self, name, tmp_path):
        save_csv(GENERATORS[name](seed=11), tmp_path / "a.csv")
        save_csv(GENERATORS[name](seed=11), tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_seed_changes_data(self, name):
        assert not np.array_equal(GENERATORS[name](seed=1).outputs,
                                  GENERATORS[name](seed=2).outputs)

    def test_type_invariants(self, name):
        sc = GENERATORS[name](seed=3)
        assert sc.inputs.shape[0] == sc.outputs.shape[0] == sc.true_labels.size
        assert sc.noiseless_outputs.shape == sc.outputs.shape
        assert np.all(np.isfinite(sc.outputs))
        assert np.all(np.diff(sc.inputs[:, 0]) >= 0)

    def test_csv_roundtrip_exact(self, name, tmp_path):
        sc = GENERATORS[name](seed=5)
        save_csv(sc, tmp_path / "s.csv")
        back = load_scenario(str(tmp_path / "s.csv"))
        np.testing.assert_array_equal(back.inputs, sc.inputs)
        np.testing.assert_array_equal(back.outputs, sc.outputs)
        np.testing.assert_array_equal(back.true_labels, sc.true_labels)
        np.testing.assert_array_equal(back.noiseless_outputs, sc.noiseless_outputs)
        assert back.name == name and back.rng_seed == 5


class TestCircles:
    def test_crossings_coincide(self):
        sc = gen_circles(noise_std=0.0, samples=40)
        clean = sc.noiseless_outputs
        for t_index in (0, 20):
            np.testing.assert_allclose(clean[2 * t_index], clean[2 * t_index + 1], atol=1e-15)

    def test_start_positions(self):
        sc = gen_circles(noise_std=0.0, radius=2.0)
        np.testing.assert_array_equal(sc.outputs[:2], [[2.0, 0.0], [2.0, -0.0]])

    def test_alternating_labels(self):
        np.testing.assert_array_equal(gen_circles(samples=10).true_labels, [0, 1] * 10)


class TestMissile:
    def test_first_measurement_matches_scalar_formula(self):
        params = StateSpaceParams(process_noise=np.zeros((3, 3)),
                                  measurement_noise=np.zeros((3, 3)))
        sc = gen_missile_to_air(params, seed=0)
        first = sc.outputs[(sc.inputs[:, 0] == 0) & (sc.true_labels == 0)][0]
        np.testing.assert_allclose(first, oracles.measure(MISSILE_INITIAL_STATES[0]), rtol=1e-14)
        # range of source 1: sqrt(6500^2 + 1000^2 + 2000^2)
        assert first[0] == pytest.approx(np.sqrt(6500**2 + 1000**2 + 2000**2))

    def test_noiseless_positions_linear(self):
        params = StateSpaceParams(process_noise=np.zeros((3, 3)))
        states = simulate_states(params, np.random.default_rng(0))
        for j, s0 in enumerate(MISSILE_INITIAL_STATES):
            t = np.arange(params.num_steps)[:, None]
            expected = np.asarray(s0[:3]) + t * np.asarray(s0[3:])
            np.testing.assert_allclose(states[j, :, :3], expected, rtol=0, atol=1e-9)

    def test_noiseless_state_recursion(self):
        params = StateSpaceParams(process_noise=np.zeros((3, 3)))
        states = simulate_states(params, np.random.default_rng(4))
        F, _ = params.transition()
        for j in range(3):
            resid = states[j, 1:] - states[j, :-1] @ F.T
            assert np.max(np.abs(resid)) < 1e-12

    def test_counts(self):
        sc = gen_missile_to_air(seed=1)
        assert sc.n == 90 and sc.num_sources == 3
        for t in range(30):
            assert sorted(sc.true_labels[sc.inputs[:, 0] == t]) == [0, 1, 2]

    def test_measure_undefined_azimuth(self):
        with pytest.raises(DataError):
            measure(np.array([0.0, 0.0, 100.0]))

    def test_rejects_bad_covariance(self):
        with pytest.raises(ValueError):
            StateSpaceParams(process_noise=-np.eye(3))


class TestSinc:
    def test_no_outliers(self):
        sc = gen_sinc_outliers(outlier_fraction=0.0, noise_std=0.0)
        np.testing.assert_allclose(sc.outputs, sc.noiseless_outputs)
        assert sc.true_labels.sum() == 0

    def test_sinc_at_zero(self):
        assert np.sinc(0.0 / np.pi) == 1.0

    def test_outlier_count(self):
        assert gen_sinc_outliers(samples=73, outlier_fraction=0.15).true_labels.sum() == 11


class TestMultilevel:
    def test_no_dropout(self):
        sc = gen_multilevel(dropout=0.0, samples=12)
        _, counts = np.unique(sc.inputs[:, 0], return_counts=True)
        assert np.all(counts == 3)

    def test_noiseless_on_curves(self):
        sc = gen_multilevel(noise_std=0.0)
        np.testing.assert_array_equal(sc.outputs, sc.noiseless_outputs)

    def test_labels_partition(self):
        sc = gen_multilevel(num_functions=4, dropout=0.0, samples=5)
        assert sorted(np.bincount(sc.true_labels)) == [5, 5, 5, 5]


class TestLoadCsv:
    def test_two_columns(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t,y\n0,1.5\n1,2.5\n2,3.5\n")
        sc = load_csv(str(p), [0], [1])
        assert sc.inputs.shape == (3, 1) and sc.outputs.shape == (3, 1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="nope.csv"):
            load_csv(str(tmp_path / "nope.csv"), [0], [1])

    def test_bad_cell_reports_line(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t,y\n0,1\n1,abc\n")
        with pytest.raises(DataError, match=":3:"):
            load_csv(str(p), ["t"], ["y"])

    def test_unknown_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t,y\n0,1\n")
        with pytest.raises(DataError, match="no column named 'z'"):
            load_csv(str(p), ["t"], ["z"])

    def test_default_roles_without_sidecar(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t,a,b\n0,1,2\n1,3,4\n")
        sc = load_scenario(str(p))
        np.testing.assert_array_equal(sc.outputs, [[1, 2], [3, 4]])
