import numpy as np

from contraction_lab.identities import check_identities, max_workers_from_env, random_state
from contraction_lab.functionals import reference_arrays

from conftest import lab_grid


class TestRandomState:
    def test_deterministic(self, params, grid):
        a = random_state(params, grid, 3)
        b = random_state(params, grid, 3)
        np.testing.assert_array_equal(a.n.values, b.n.values)
        np.testing.assert_array_equal(a.q.values, b.q.values)

    def test_positive_density(self, params, grid):
        for seed in range(50):
            assert np.all(random_state(params, grid, seed).n.values > 0)

    def test_exercises_both_sides_of_tube(self, params, grid):
        refs = reference_arrays(params, grid)
        saw_outside = saw_inside = False
        for seed in range(50):
            w = np.abs(random_state(params, grid, seed).n.values / refs.ntil - 1.0)
            saw_outside = saw_outside or np.any(w > 0.49)
            saw_inside = saw_inside or np.any(w <= 0.05)
        assert saw_outside and saw_inside


class TestCheckIdentities:
    def test_full_suite_small(self, params):
        grid = lab_grid(params, num_cells=512)
        report = check_identities(params, grid, n_states=10, seed=0)
        assert report["all_passed"]
        for entry in report["identities"]:
            assert entry["max_rel_err"] <= 1e-10

    def test_threaded_matches_serial(self, params):
        grid = lab_grid(params, num_cells=256)
        serial = check_identities(params, grid, n_states=8, seed=1, max_workers=1)
        threaded = check_identities(params, grid, n_states=8, seed=1, max_workers=4)
        assert serial == threaded


class TestEnvThreads:
    def test_default_when_unset(self, monkeypatch):
        monkeypatch.delenv("A_CONTRACTION_LAB_THREADS", raising=False)
        assert max_workers_from_env() == 1

    def test_reads_value(self, monkeypatch):
        monkeypatch.setenv("A_CONTRACTION_LAB_THREADS", "6")
        assert max_workers_from_env() == 6

    def test_garbage_falls_back(self, monkeypatch):
        monkeypatch.setenv("A_CONTRACTION_LAB_THREADS", "many")
        assert max_workers_from_env() == 1
        monkeypatch.setenv("A_CONTRACTION_LAB_THREADS", "0")
        assert max_workers_from_env() == 1
