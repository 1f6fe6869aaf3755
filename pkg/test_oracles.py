"""Traveling waves, heat kernels and the Duhamel formula."""
import numpy as np
import pytest

from fraclab.core.exceptions import ParameterError, ResolutionError
from fraclab.models.grid import Field, Grid1D
from fraclab.services import core_fields, oracles

KERNEL_GRID = Grid1D(-64.0, 64.0, 4096)


class TestTravelingWave:

    def test_trace_values(self):
        grid = Grid1D(-2.0, 2.0, 64)
        for beta, expected in ((0.5, 1.0), (0.75, np.sin(0.75 * np.pi))):
            trace = oracles.wave_trace(beta, grid)
            assert trace.values[grid.node_index(-1.0)] == pytest.approx(expected, rel=1e-12)
            assert np.all(trace.values[grid.nodes >= 0] == 0.0)
            assert np.all(trace.values >= 0.0)
        assert np.sin(0.75 * np.pi) == pytest.approx(0.7071068, abs=1e-7)

    def test_speeds(self):
        assert oracles.wave_speed(0.5) == 0.0
        assert oracles.wave_speed(0.75) == pytest.approx(-1.0, rel=1e-12)
        assert oracles.wave_speed(0.25) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("beta", [0.55, 0.6, 0.75, 0.9])
    def test_receding_waves_have_non_positive_speed(self, beta):
        assert oracles.wave_speed(beta) <= 0.0

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.5])
    def test_rejects_beta(self, beta):
        with pytest.raises(ParameterError):
            oracles.wave_speed(beta)

    def test_frame_moves_with_speed(self):
        wave = oracles.traveling_wave(0.75)
        x = np.linspace(-1.0, 1.0, 9)
        y = np.full(9, 0.3)
        assert np.allclose(wave.frame(0.2, x, y), wave.profile(x - 0.2, y))

    @pytest.mark.slow
    @pytest.mark.parametrize("beta", [0.6, 0.75])
    def test_evolved_wave_speed(self, beta):
        run = oracles.evolve_traveling_wave(beta)
        assert run.fitted_speed == pytest.approx(run.wave.speed, rel=5e-2)

    @pytest.mark.slow
    def test_stationary_wave_does_not_drift(self):
        dt = 1e-3
        run = oracles.evolve_traveling_wave(0.5, dt=dt, T=1.0, fit_window=(0.1, 1.0))
        h = 4.0 / 256
        assert run.drift <= 20 * (dt + h ** 1.5)


class TestHeatKernel:

    def test_matches_periodic_cauchy(self):
        kernel = oracles.heat_kernel(0.5, 1.0, KERNEL_GRID)
        exact = oracles.periodic_cauchy_kernel(1.0, KERNEL_GRID)
        assert core_fields.linf_diff(kernel.values, exact) <= 1e-10

    def test_matches_cauchy_on_wide_grid(self):
        grid = Grid1D(-1024.0, 1024.0, 65536)
        kernel = oracles.heat_kernel(0.5, 1.0, grid)
        exact = oracles.cauchy_kernel(1.0, grid.nodes)
        assert np.max(np.abs(kernel.values.values - exact)) <= 1e-6

    def test_classical_heat_kernel(self):
        grid = Grid1D(-32.0, 32.0, 1024)
        kernel = oracles.heat_kernel(1.0, 1.0, grid)
        exact = np.exp(-grid.nodes ** 2 / 4.0) / np.sqrt(4.0 * np.pi)
        assert np.max(np.abs(kernel.values.values - exact)) <= 1e-10

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("t", [0.5, 2.0])
    def test_mass_and_symmetry(self, s, t):
        kernel = oracles.heat_kernel(s, t, KERNEL_GRID)
        values = kernel.values.values
        assert kernel.mass == pytest.approx(1.0, abs=1e-8)
        center = KERNEL_GRID.node_index(0.0)
        k = np.arange(1, 100)
        assert np.allclose(values[center + k], values[center - k], rtol=0.0, atol=1e-12)

    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_positive(self, s):
        kernel = oracles.heat_kernel(s, 1.0, KERNEL_GRID)
        assert kernel.values.values.min() >= -1e-12

    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_semigroup(self, s):
        k1 = oracles.heat_kernel(s, 0.4, KERNEL_GRID)
        k2 = oracles.heat_kernel(s, 0.6, KERNEL_GRID)
        both = oracles.heat_kernel(s, 1.0, KERNEL_GRID)
        assert core_fields.linf_diff(oracles.convolve(k1, k2.values), both.values) <= 1e-6

    def test_under_resolved(self):
        with pytest.raises(ResolutionError):
            oracles.heat_kernel(0.5, 1e-4, KERNEL_GRID)

    def test_convolve_needs_origin_node(self):
        grid = Grid1D(-1.0, 1.5, 64)
        kernel = oracles.heat_kernel(0.5, 1.0, grid)
        with pytest.raises(ParameterError):
            oracles.convolve(kernel, Field.zeros(grid))

    def test_cauchy_scaling_is_flat(self):
        lo, hi = oracles.kernel_scaling_bounds(0.5, np.linspace(0.1, 1.0, 10), KERNEL_GRID, x_max=2.0)
        assert lo == pytest.approx(1.0 / np.pi, rel=1e-2)
        assert hi == pytest.approx(1.0 / np.pi, rel=1e-2)

    def test_scaling_spread(self):
        lo, hi = oracles.kernel_scaling_bounds(0.75, np.linspace(0.1, 1.0, 10), KERNEL_GRID)
        assert 0.0 < lo
        assert hi / lo <= 50.0


class TestDuhamel:

    def test_free_decay(self):
        grid = Grid1D(-np.pi, np.pi, 128)
        v0 = Field.from_function(grid, lambda x: np.sin(3 * x))
        out = oracles.duhamel_solve(v0, [], 0.6, np.array([0.0, 0.7]))
        expected = np.exp(-0.7 * 3 ** 1.2) * v0.values
        assert np.max(np.abs(out.values - expected)) <= 1e-12

    def test_constant_forcing_accumulates(self):
        grid = Grid1D(-np.pi, np.pi, 128)
        times = np.linspace(0.0, 1.0, 11)
        forcing = [Field.constant(grid, 1.0)] * times.size
        out = oracles.duhamel_solve(Field.zeros(grid), forcing, 0.5, times)
        assert np.max(np.abs(out.values - 1.0)) <= 1e-12

    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_forcing_varying_in_space_and_time(self, s):
        # f = tau sin(2x): the mode decays at rate lam = 2^{2s}
        grid = Grid1D(-np.pi, np.pi, 128)
        times = np.linspace(0.0, 1.0, 101)
        mode = np.sin(2 * grid.nodes)
        forcing = [Field(grid, tau * mode) for tau in times]
        out = oracles.duhamel_solve(Field.zeros(grid), forcing, s, times)
        lam = 2.0 ** (2 * s)
        amplitude = 1.0 / lam - (1.0 - np.exp(-lam)) / lam ** 2
        assert np.max(np.abs(out.values - amplitude * mode)) <= 1e-3

    def test_times_must_start_at_zero(self):
        grid = Grid1D(-np.pi, np.pi, 128)
        with pytest.raises(ParameterError):
            oracles.duhamel_solve(Field.zeros(grid), [], 0.5, np.array([0.1, 0.5]))

    def test_forcing_count(self):
        grid = Grid1D(-np.pi, np.pi, 128)
        with pytest.raises(ParameterError):
            oracles.duhamel_solve(Field.zeros(grid), [Field.zeros(grid)], 0.5, np.array([0.0, 0.5]))
