import math
from dataclasses import replace

import numpy as np
import pytest

from mhd1d import (
    Grid1D,
    PhysParams,
    ScenarioSpec,
    SchemeConfig,
    State,
    build_initial_state,
    constant_state,
    rhs,
    run,
    stable_dt,
    step,
    total_energy,
)
from mhd1d.errors import BoundaryMonitorError, NumericalError
from mhd1d.solver import load_checkpoint, save_checkpoint


class TestSchemeConfig:
    def test_defaults(self):
        s = SchemeConfig()
        assert s.reconstruction == "muscl_minmod"
        assert s.time_integrator == "ssp_rk2"

    @pytest.mark.parametrize("kwargs", [
        {"cfl_number": 0.0}, {"cfl_number": 1.2}, {"diffusion_number": 0.6},
        {"reconstruction": "weno5"}, {"time_integrator": "rk4"}, {"t_end": -1.0},
    ])
    def test_rejects_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            SchemeConfig(**kwargs)


def _oracle_rhs_first_order(state, params, grid, mode):
    """Scalar re-implementation of the semi-discrete system, loops and all."""
    n, dx, g = grid.n_cells, grid.dx, params.gamma
    rho = np.concatenate([[params.rho_bar] * 2, state.rho, [params.rho_bar] * 2])
    mom = np.concatenate([[0.0] * 2, state.mom, [0.0] * 2])
    b = np.concatenate([[params.b_bar] * 2, state.b, [params.b_bar] * 2])

    def u_of(j):
        return mom[j] / max(rho[j], 1e-12)

    def flux(j):
        u = u_of(j)
        return (mom[j], mom[j] * u + rho[j] ** g + 0.5 * b[j] ** 2, u * b[j])

    def speed(j):
        rs = max(rho[j], 1e-12)
        return abs(mom[j] / rs) + math.sqrt(g * rs ** (g - 1.0) + b[j] ** 2 / rs)

    fhat = []
    for j in range(1, n + 2):
        fl, fr = flux(j), flux(j + 1)
        a = max(speed(j), speed(j + 1))
        fhat.append(tuple(
            0.5 * (fl[k] + fr[k]) - 0.5 * a * (q[j + 1] - q[j])
            for k, q in enumerate((rho, mom, b))))
    d_rho = np.array([-(fhat[i + 1][0] - fhat[i][0]) / dx for i in range(n)])
    d_mom = np.array([-(fhat[i + 1][1] - fhat[i][1]) / dx for i in range(n)])
    d_b = np.array([-(fhat[i + 1][2] - fhat[i][2]) / dx for i in range(n)])
    visc_floor = 0.01 * params.rho_bar
    uv = mom / np.maximum(rho, visc_floor)
    for i in range(n):
        d_mom[i] += params.mu * (uv[i + 3] - 2.0 * uv[i + 2] + uv[i + 1]) / dx**2
        if mode == "resistive":
            d_b[i] += params.nu * (b[i + 3] - 2.0 * b[i + 2] + b[i + 1]) / dx**2
    return d_rho, d_mom, d_b


class TestRhs:
    def test_constant_state_is_fixed_point(self, params, grid):
        scheme = SchemeConfig()
        for mode in ("resistive", "non_resistive"):
            out = rhs(constant_state(grid, params), params, scheme, grid, mode)
            for arr in (out.d_rho, out.d_mom, out.d_b):
                assert np.abs(arr).max() < 1e-13 * max(params.rho_bar, params.b_bar, 1.0)

    def test_matches_hand_rolled_oracle_on_8_nodes(self):
        params = PhysParams(mu=0.05, nu=2e-3)
        grid = Grid1D(4.0, 8)
        x = grid.x
        rho = np.full(8, params.rho_bar)
        u = 0.3 * np.exp(-x**2)
        state = State(rho=rho, mom=rho * u, b=np.full(8, params.b_bar))
        scheme = SchemeConfig(reconstruction="first_order_upwind")
        for mode in ("resistive", "non_resistive"):
            out = rhs(state, params, scheme, grid, mode)
            o_rho, o_mom, o_b = _oracle_rhs_first_order(state, params, grid, mode)
            assert np.allclose(out.d_rho, o_rho, atol=1e-13)
            assert np.allclose(out.d_mom, o_mom, atol=1e-13)
            assert np.allclose(out.d_b, o_b, atol=1e-13)

    def test_mass_tendency_is_central_difference_for_uniform_density(self):
        # with rho and b constant the LLF mass flux reduces to the average of
        # neighboring momenta, so d_rho/dt is the central difference of -m
        params = PhysParams()
        grid = Grid1D(4.0, 8)
        rho = np.full(8, params.rho_bar)
        u = 0.3 * np.exp(-grid.x**2)
        state = State(rho=rho, mom=rho * u, b=np.full(8, params.b_bar))
        out = rhs(state, params, SchemeConfig(reconstruction="first_order_upwind"),
                  grid, "non_resistive")
        m_ext = np.concatenate([[0.0], rho * u, [0.0]])
        expected = -(m_ext[2:] - m_ext[:-2]) / (2.0 * grid.dx)
        assert np.allclose(out.d_rho, expected, atol=1e-14)

    def test_modes_differ_exactly_by_resistive_term(self, params, grid, gaussian_spec):
        state = build_initial_state(gaussian_spec, grid)
        scheme = SchemeConfig()
        out_r = rhs(state, params, scheme, grid, "resistive")
        out_n = rhs(state, params, scheme, grid, "non_resistive")
        assert np.array_equal(out_r.d_rho, out_n.d_rho)
        assert np.array_equal(out_r.d_mom, out_n.d_mom)
        b_ext = np.concatenate([[params.b_bar], state.b, [params.b_bar]])
        lap = (b_ext[2:] - 2.0 * b_ext[1:-1] + b_ext[:-2]) / grid.dx**2
        assert np.allclose(out_r.d_b - out_n.d_b, params.nu * lap, atol=1e-15)

    def test_non_finite_state_raises_with_node(self, params, grid):
        state = constant_state(grid, params)
        state.mom[17] = np.nan
        with pytest.raises(NumericalError) as err:
            rhs(state, params, SchemeConfig(), grid, "resistive")
        assert err.value.node is not None

    def test_rejects_unknown_mode(self, params, grid):
        with pytest.raises(ValueError, match="mode"):
            rhs(constant_state(grid, params), params, SchemeConfig(), grid, "ideal")


class TestStableDt:
    def test_acoustic_limit(self):
        # state (1, 0, 0) with gamma=2 and negligible diffusion: dt = cfl*dx/sqrt(2)
        params = PhysParams(mu=1e-30, nu=0.0, gamma=2.0, b_bar=1.0)
        grid = Grid1D(10.0, 64)
        state = State(rho=np.ones(64), mom=np.zeros(64), b=np.zeros(64))
        scheme = SchemeConfig(cfl_number=0.5)
        assert stable_dt(state, params, scheme, grid) == pytest.approx(
            0.5 * grid.dx / math.sqrt(2.0))

    def test_doubling_cells_at_most_halves_advective_bound(self, params, gaussian_spec):
        p = replace(params, mu=1e-30, nu=0.0)
        scheme = SchemeConfig()
        dts = []
        for n in (256, 512):
            g = Grid1D(20.0, n)
            dts.append(stable_dt(build_initial_state(gaussian_spec, g), p, scheme, g))
        assert dts[1] <= 0.5 * dts[0] * (1 + 1e-12)

    def test_zero_resistivity_uses_viscous_bound(self, grid):
        # mu large enough that the dx^2 restriction governs; nu = 0 leaves mu/rho
        params = PhysParams(mu=10.0, nu=0.0)
        state = constant_state(grid, params)
        scheme = SchemeConfig()
        dt = stable_dt(state, params, scheme, grid)
        assert dt == pytest.approx(
            scheme.diffusion_number * grid.dx**2 * params.rho_bar / params.mu)

    def test_large_resistivity_governs_diffusive_bound(self, grid):
        params = PhysParams(mu=0.1, nu=50.0)
        state = constant_state(grid, params)
        scheme = SchemeConfig()
        dt = stable_dt(state, params, scheme, grid)
        assert dt == pytest.approx(scheme.diffusion_number * grid.dx**2 / params.nu)

    def test_positive_and_finite_on_vacuum(self, params):
        grid = Grid1D(20.0, 256)
        spec = ScenarioSpec(params=params, preset="interior_vacuum", a_b=-params.b_bar)
        dt = stable_dt(build_initial_state(spec, grid), params, SchemeConfig(), grid)
        assert np.isfinite(dt) and dt > 0


class TestStep:
    @pytest.mark.parametrize("integrator", ["ssp_rk2", "ssp_rk3"])
    def test_constant_state_unchanged(self, params, grid, integrator):
        scheme = SchemeConfig(time_integrator=integrator)
        state = constant_state(grid, params)
        for _ in range(5):
            state, clips = step(state, 1e-3, params, scheme, grid, "resistive")
            assert clips == 0
        assert np.all(state.rho == params.rho_bar)
        assert np.all(state.mom == 0.0)
        assert np.all(state.b == params.b_bar)

    def test_passive_bump_translates(self):
        # constant velocity, near-zero viscosity, trace magnetic bump: the bump
        # advects at speed c while rho and u stay constant in the interior
        params = PhysParams(mu=1e-30, nu=0.0, gamma=1.4)
        grid = Grid1D(20.0, 1024)
        c, eps, t_end = 1.0, 1e-8, 0.5
        x = grid.x
        rho = np.full(grid.n_cells, params.rho_bar)
        state = State(rho=rho, mom=rho * c, b=params.b_bar + eps * np.exp(-x**2), t=0.0)
        scheme = SchemeConfig()
        while state.t < t_end - 1e-12:
            dt = min(stable_dt(state, params, scheme, grid), t_end - state.t)
            state, _ = step(state, dt, params, scheme, grid, "non_resistive")
        core = np.abs(x) < 10.0  # edges are polluted by the far-field ghosts
        assert np.abs(state.rho - params.rho_bar)[core].max() < 1e-7
        assert np.abs(state.velocity() - c)[core].max() < 1e-7
        pert = (state.b - params.b_bar)[core]
        centroid = np.sum(x[core] * pert) / np.sum(pert)
        assert centroid == pytest.approx(c * t_end, abs=2 * grid.dx)
        exact = eps * np.exp(-(x[core] - c * t_end) ** 2)
        rel = np.sqrt(np.sum((pert - exact) ** 2) / np.sum(exact**2))
        assert rel < 0.25  # limiter dissipation at this resolution

    def test_rk3_tighter_than_rk2_on_translation(self):
        params = PhysParams(mu=1e-30, nu=0.0, gamma=1.4)
        grid = Grid1D(20.0, 512)
        c, eps, t_end = 1.0, 1e-8, 0.5
        errors = {}
        for integ in ("ssp_rk2", "ssp_rk3"):
            x = grid.x
            rho = np.full(grid.n_cells, params.rho_bar)
            state = State(rho=rho, mom=rho * c, b=params.b_bar + eps * np.exp(-x**2), t=0.0)
            scheme = SchemeConfig(time_integrator=integ)
            while state.t < t_end - 1e-12:
                dt = min(stable_dt(state, params, scheme, grid), t_end - state.t)
                state, _ = step(state, dt, params, scheme, grid, "non_resistive")
            core = np.abs(x) < 10.0
            exact = eps * np.exp(-(x[core] - c * t_end) ** 2)
            errors[integ] = np.sqrt(np.sum(((state.b - params.b_bar)[core] - exact) ** 2))
        assert errors["ssp_rk3"] <= errors["ssp_rk2"] * 1.05


class TestRun:
    def test_t_zero_returns_single_sample(self, params, grid, gaussian_spec):
        scheme = SchemeConfig(t_end=0.0)
        final, record = run(gaussian_spec, params, scheme, grid, "resistive")
        assert final.t == 0.0
        assert len(record.rows) == 1

    def test_sample_times_exact(self, params, grid, gaussian_spec):
        scheme = SchemeConfig(t_end=0.2, n_samples=8)
        _, record = run(gaussian_spec, params, scheme, grid, "resistive")
        assert np.array_equal(record.times, np.linspace(0.0, 0.2, 9))

    def test_deterministic(self, params, grid, gaussian_spec):
        scheme = SchemeConfig(t_end=0.1, n_samples=5)
        _, r1 = run(gaussian_spec, params, scheme, grid, "resistive")
        _, r2 = run(gaussian_spec, params, scheme, grid, "resistive")
        assert r1.to_csv() == r2.to_csv()

    def test_energy_never_exceeds_initial(self, params, grid, gaussian_spec):
        scheme = SchemeConfig(t_end=1.0, n_samples=20)
        final, record = run(gaussian_spec, params, scheme, grid, "resistive")
        e = record.column("energy")
        assert e[-1] <= e[0] * (1.0 + 1e-6)
        assert total_energy(final, params, grid) == pytest.approx(e[-1])

    def test_no_clipping_on_standard_presets(self, params, grid):
        for preset, a_b in (("gaussian_bump", 0.2), ("interior_vacuum", -params.b_bar)):
            spec = ScenarioSpec(params=params, preset=preset, a_b=a_b)
            _, record = run(spec, params, SchemeConfig(t_end=0.2, n_samples=5),
                            grid, "resistive")
            assert record.final("clip_count") == 0

    def test_mode_consistency_bitwise(self, grid):
        params = PhysParams(nu=0.0)
        spec = ScenarioSpec(params=params)
        scheme = SchemeConfig(t_end=0.1, n_samples=5)
        f1, _ = run(spec, params, scheme, grid, "resistive")
        f2, _ = run(spec, params, scheme, grid, "non_resistive")
        assert np.array_equal(f1.rho, f2.rho)
        assert np.array_equal(f1.mom, f2.mom)
        assert np.array_equal(f1.b, f2.b)

    def test_boundary_monitor_aborts(self):
        params = PhysParams()
        grid = Grid1D(5.0, 128)
        spec = ScenarioSpec(params=params, sigma=1.0)
        scheme = SchemeConfig(t_end=2.0, n_samples=10)
        with pytest.raises(BoundaryMonitorError):
            run(spec, params, scheme, grid, "resistive")

    def test_accumulators_monotone(self, params, grid, gaussian_spec):
        _, record = run(gaussian_spec, params, SchemeConfig(t_end=0.3, n_samples=10),
                        grid, "resistive")
        record.validate()
        for col in ("diss_u", "diss_b", "l6_b_pert_accum"):
            assert np.all(np.diff(record.column(col)) >= 0)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, params, grid, gaussian_spec):
        scheme = SchemeConfig(t_end=0.05, n_samples=2)
        final, _ = run(gaussian_spec, params, scheme, grid, "resistive")
        text = save_checkpoint(final, grid)
        loaded, loaded_grid = load_checkpoint(text)
        assert loaded_grid.n_cells == grid.n_cells
        assert loaded_grid.half_width == grid.half_width
        assert loaded.t == final.t
        assert np.array_equal(loaded.rho, final.rho)
        assert np.array_equal(loaded.mom, final.mom)
        assert np.array_equal(loaded.b, final.b)

    def test_header_format(self, params, grid):
        text = save_checkpoint(constant_state(grid, params), grid)
        first = text.splitlines()[0].split()
        assert int(first[0]) == grid.n_cells
        assert float(first[1]) == grid.half_width
        assert float(first[2]) == 0.0
        assert len(text.splitlines()) == grid.n_cells + 1

    def test_rejects_mismatched_coordinates(self, params, grid):
        text = save_checkpoint(constant_state(grid, params), grid)
        lines = text.splitlines()
        parts = lines[1].split()
        parts[0] = repr(float(parts[0]) + 0.5)
        lines[1] = " ".join(parts)
        with pytest.raises(ValueError, match="coordinates"):
            load_checkpoint("\n".join(lines))
