import numpy as np
import pytest

from contraction_lab import (
    Grid,
    GridField,
    PerturbationSpec,
    SolverConfig,
    StabilityError,
    State,
    initial_state,
    reconstruct_concentration,
    run,
    step,
)
from contraction_lab.functionals import reference_arrays
from contraction_lab.grid import ddx_central, integrate

from conftest import lab_grid


def bump_spec(amp_n=0.2, amp_q=0.2, width=5.0, **kw):
    return PerturbationSpec(
        kind="gaussian_bump", amplitude_n=amp_n, amplitude_q=amp_q, width=width, **kw
    )


class TestInitialState:
    def test_wave_plus_bump_positive(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        state = initial_state(small_params, grid, bump_spec())
        assert np.all(state.n.values > 0)

    def test_negative_density_rejected(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        with pytest.raises(ValueError, match="non-positive"):
            initial_state(small_params, grid, bump_spec(amp_n=-5.0))

    def test_non_decaying_perturbation_rejected(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        wide = bump_spec(width=0.5 * (grid.xi_max - grid.xi_min))
        with pytest.raises(ValueError, match="decay"):
            initial_state(small_params, grid, wide)

    def test_random_fourier_deterministic(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        spec = PerturbationSpec(kind="random_fourier", amplitude_n=0.1, width=20.0, seed=5)
        a = initial_state(small_params, grid, spec)
        b = initial_state(small_params, grid, spec)
        np.testing.assert_array_equal(a.n.values, b.n.values)

    def test_shifted_wave_kind(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        spec = PerturbationSpec(kind="shifted_wave", center=3.0)
        state = initial_state(small_params, grid, spec)
        refs = reference_arrays(small_params, grid, shift=3.0)
        np.testing.assert_allclose(state.n.values, refs.ntil, rtol=1e-12)

    def test_custom_file_kind(self, small_params, tmp_path):
        grid = lab_grid(small_params, num_cells=512)
        xi = np.linspace(-10, 10, 200)
        path = tmp_path / "pert.csv"
        dn = 0.05 * np.exp(-(xi**2))
        with open(path, "w") as fh:
            fh.write("xi,dn,dq\n")
            for row in zip(xi, dn, 0.0 * xi):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        spec = PerturbationSpec(kind="custom_file", path=str(path))
        state = initial_state(small_params, grid, spec)
        refs = reference_arrays(small_params, grid)
        assert np.max(state.n.values - refs.ntil) == pytest.approx(0.05, abs=1e-3)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            PerturbationSpec(kind="sawtooth")


class TestStep:
    def test_constant_state_exactly_preserved(self, params):
        # far-left window: the wave is bitwise constant there, so a constant
        # state sees zero spatial derivatives and Dirichlet values that match
        scale = params.sigma / params.eps
        far = Grid(-45 * scale, -40 * scale, 128)
        n0 = np.full(far.num_nodes, params.n_minus)
        q0 = np.full(far.num_nodes, params.q_minus)
        state = State(n=GridField(far, n0), q=GridField(far, q0))
        out = step(state, 1e-3, params, diffusion_mode="explicit")
        np.testing.assert_array_equal(out.n.values, n0)
        np.testing.assert_array_equal(out.q.values, q0)
        # the implicit solve round-trips a constant only to rounding
        out = step(state, 1e-3, params, diffusion_mode="implicit")
        np.testing.assert_allclose(out.n.values, n0, rtol=0, atol=2e-15)
        np.testing.assert_array_equal(out.q.values, q0)

    def test_steady_wave_drift_refines_at_order(self, small_params):
        # raw truncation: the sampled wave drifts at O(dx^2) for fixed dt
        drifts = []
        dt = 2e-3
        for cells in (512, 1024, 2048):
            grid = lab_grid(small_params, num_cells=cells)
            refs = reference_arrays(small_params, grid)
            state = State(n=GridField(grid, refs.ntil.copy()), q=GridField(grid, refs.qtil.copy()))
            for _ in range(200):
                state = step(state, dt, small_params, well_balanced=False)
            drifts.append(
                max(
                    np.max(np.abs(state.n.values - refs.ntil)),
                    np.max(np.abs(state.q.values - refs.qtil)),
                )
            )
        order1 = np.log2(drifts[0] / drifts[1])
        order2 = np.log2(drifts[1] / drifts[2])
        assert drifts[2] < drifts[0]
        assert order1 >= 1.8 and order2 >= 1.8

    def test_well_balanced_wave_is_fixed_point(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        refs = reference_arrays(small_params, grid)
        state = State(n=GridField(grid, refs.ntil.copy()), q=GridField(grid, refs.qtil.copy()))
        out = step(state, 0.05, small_params, well_balanced=True)
        np.testing.assert_array_equal(out.n.values, refs.ntil)
        np.testing.assert_array_equal(out.q.values, refs.qtil)

    def test_perturbation_mass_is_conserved(self, small_params):
        # divergence form: interior stencils telescope, boundary strips stay
        # at wave values, so the perturbation integrals drift only at rounding
        grid = lab_grid(small_params, num_cells=2048)
        state = initial_state(small_params, grid, bump_spec(amp_n=0.1, amp_q=0.1))
        refs = reference_arrays(small_params, grid)
        mass_n0 = integrate(GridField(grid, state.n.values - refs.ntil))
        mass_q0 = integrate(GridField(grid, state.q.values - refs.qtil))
        t, dt = 0.0, 0.02
        while t < 1.0:
            state = step(state, dt, small_params)
            t += dt
        mass_n = integrate(GridField(grid, state.n.values - refs.ntil))
        mass_q = integrate(GridField(grid, state.q.values - refs.qtil))
        assert abs(mass_n - mass_n0) < 1e-8
        assert abs(mass_q - mass_q0) < 1e-8

    def test_blowup_raises_stability_error(self, small_params):
        grid = lab_grid(small_params, num_cells=256)
        state = initial_state(small_params, grid, bump_spec(amp_n=1.5, amp_q=1.5, width=3.0))
        with pytest.raises(StabilityError):
            out = state
            for _ in range(50):
                out = step(out, 5.0, small_params, diffusion_mode="explicit")


class TestRun:
    def test_zero_perturbation_identically_zero(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        cfg = SolverConfig(
            params=small_params,
            grid=grid,
            t_end=2.0,
            perturbation=PerturbationSpec(amplitude_n=0.0, amplitude_q=0.0),
        )
        res = run(cfg)
        m = res.monitor
        assert np.all(np.asarray(m["X"]) == 0.0)
        assert np.all(np.asarray(m["eta_weighted"]) == 0.0)
        assert np.all(np.asarray(m["Y"]) == 0.0)
        assert np.all(np.asarray(m["violation"]) == 0.0)
        assert res.verdict()["contraction_held"]
        assert res.verdict()["max_violation"] == 0.0

    def test_entropy_decreases_on_perturbed_run(self, small_params):
        grid = lab_grid(small_params, num_cells=1024)
        cfg = SolverConfig(
            params=small_params, grid=grid, t_end=4.0, perturbation=bump_spec(0.3, 0.3)
        )
        res = run(cfg)
        e = res.monitor["eta_weighted"]
        assert e[-1] < res.e0
        assert res.verdict()["contraction_held"]
        assert res.verdict()["shift_bound_held"]

    def test_grid_must_bracket_center(self, small_params):
        with pytest.raises(ValueError, match="bracket"):
            SolverConfig(
                params=small_params,
                grid=Grid(1.0, 2.0, 64),
                t_end=1.0,
                perturbation=bump_spec(),
            )

    def test_report_rows_match_header(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        cfg = SolverConfig(
            params=small_params,
            grid=grid,
            t_end=0.5,
            perturbation=bump_spec(0.1, 0.0),
            report_stride=5,
        )
        res = run(cfg)
        header = res.csv_header()
        assert all(len(row) == len(header) for row in res.report_rows)
        assert len(res.reports) == len(res.report_rows)

    def test_explicit_mode_matches_implicit_at_small_dt(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        kw = dict(params=small_params, grid=grid, t_end=0.2, perturbation=bump_spec(0.1, 0.1))
        res_im = run(SolverConfig(dt=1e-3, diffusion_mode="implicit", **kw))
        res_ex = run(SolverConfig(dt=1e-3, diffusion_mode="explicit", **kw))
        gap = np.max(np.abs(res_im.final_state.n.values - res_ex.final_state.n.values))
        assert gap < 1e-4

    def test_shifted_wave_is_tracked_by_the_shift(self, small_params):
        # initial data = the wave translated by 8: the weighted entropy must
        # decay to zero while X converges to the translation
        grid = lab_grid(small_params, num_cells=2048)
        cfg = SolverConfig(
            params=small_params,
            grid=grid,
            t_end=20.0,
            perturbation=PerturbationSpec(kind="shifted_wave", center=8.0),
        )
        res = run(cfg)
        v = res.verdict()
        assert v["contraction_held"]
        assert res.monitor["eta_weighted"][-1] < 1e-3 * res.e0
        assert v["final_X"] == pytest.approx(8.0, abs=1e-2)

    def test_lab_shift_column(self, small_params):
        grid = lab_grid(small_params, num_cells=512)
        cfg = SolverConfig(
            params=small_params, grid=grid, t_end=1.0, perturbation=bump_spec(0.1, 0.1)
        )
        res = run(cfg)
        m = res.monitor
        np.testing.assert_allclose(
            np.asarray(m["lab_shift"]),
            small_params.sigma * np.asarray(m["t"]) - np.asarray(m["X"]),
            rtol=1e-12,
        )


class TestConcentration:
    def test_zero_velocity_gives_reference(self):
        g = Grid(-2.0, 2.0, 128)
        c = reconstruct_concentration(GridField(g, np.zeros(129)), c_ref=3.5)
        np.testing.assert_array_equal(c.values, 3.5)

    def test_constant_velocity_gives_exponential(self):
        g = Grid(-1.0, 3.0, 256)
        k = 0.7
        c = reconstruct_concentration(GridField(g, np.full(257, k)), c_ref=2.0)
        expected = 2.0 * np.exp(-k * (g.nodes() - g.xi_min))
        np.testing.assert_allclose(c.values, expected, rtol=1e-12)

    def test_round_trip_inverts_transform(self):
        g = Grid(-4.0, 4.0, 2048)
        q = GridField.from_function(g, lambda x: 0.3 * np.tanh(x) + 0.1)
        c = reconstruct_concentration(q, c_ref=1.0)
        back = -ddx_central(GridField(g, np.log(c.values))).values
        assert np.max(np.abs(back[1:-1] - q.values[1:-1])) < 5e-5  # O(dx^2)

    def test_positive_everywhere(self):
        g = Grid(-2.0, 2.0, 128)
        q = GridField.from_function(g, lambda x: 3.0 * np.sin(5 * x))
        c = reconstruct_concentration(q, c_ref=1e-3)
        assert np.all(c.values > 0)

    def test_requires_positive_anchor(self):
        g = Grid(-1.0, 1.0, 32)
        with pytest.raises(ValueError):
            reconstruct_concentration(GridField(g, np.zeros(33)), c_ref=0.0)
