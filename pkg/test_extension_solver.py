"""Weighted extension, Dirichlet-to-Neumann trace and the half-plane diagnostics."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.special import gamma

from conftest import gaussian
from fraclab.core.exceptions import ConfigurationError, ParameterError
from fraclab.models.extension import ExtensionField
from fraclab.models.grid import Field, Grid1D
from fraclab.services import core_fields, extension_solver, frac_operator, oracles

CIRCLE = Grid1D(-np.pi, np.pi, 64)


def relative_error(a, b) -> float:
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


class TestStrip:

    def test_graded_nodes(self):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=4.0, m=16)
        assert strip.y_nodes[0] == 0.0
        assert strip.y_nodes[-1] == pytest.approx(4.0)
        assert strip.grade == pytest.approx(2.0)
        assert strip.a == 0.0
        assert strip.shape == (64, 17)

    def test_rejects_bad_order(self):
        with pytest.raises(ParameterError):
            extension_solver.build_strip(CIRCLE, 1.0)

    def test_extension_constant_at_half(self):
        assert extension_solver.extension_constant(0.5) == pytest.approx(1.0)


class TestSolveExtension:

    def test_harmonic_extension_of_sine(self):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=10.0, m=160)
        f = Field.from_function(CIRCLE, np.sin)
        F = extension_solver.solve_extension(f, strip.a, strip)
        exact = np.exp(-strip.y_nodes)[None, :] * np.sin(CIRCLE.nodes)[:, None]
        assert np.max(np.abs(F.values - exact)) <= 1e-3

    def test_constant_extends_to_constant(self):
        strip = extension_solver.build_strip(CIRCLE, 0.3, height=4.0, m=32)
        F = extension_solver.solve_extension(Field.constant(CIRCLE, 2.0), strip.a, strip)
        assert np.max(np.abs(F.values - 2.0)) <= 1e-12
        assert np.max(np.abs(extension_solver.dtn_trace(F, strip.a).values)) <= 1e-12

    def test_top_row_carries_the_mean(self):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=4.0, m=32)
        f = Field.from_function(CIRCLE, lambda x: 1.5 + np.cos(2 * x))
        F = extension_solver.solve_extension(f, strip.a, strip)
        assert np.max(np.abs(F.values[:, -1] - 1.5)) <= 1e-12
        fluctuation = extension_solver.solve_extension(f - 1.5, strip.a, strip)
        assert np.max(np.abs(fluctuation.values[:, -1])) <= 1e-12
        assert np.max(np.abs(F.values - 1.5 - fluctuation.values)) <= 1e-10

    def test_wrong_weight_exponent(self):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=4.0, m=16)
        with pytest.raises(ParameterError):
            extension_solver.solve_extension(Field.zeros(CIRCLE), 0.2, strip)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_maximum_principle(self, seed):
        rng = np.random.default_rng(seed)
        strip = extension_solver.build_strip(CIRCLE, 0.6, height=4.0, m=32)
        f = Field(CIRCLE, rng.standard_normal(64))
        F = extension_solver.solve_extension(f, strip.a, strip)
        assert F.values.max() <= f.values.max() + 1e-10
        assert F.values.min() >= f.values.min() - 1e-10

    @given(
        f=arrays(np.float64, 64, elements=st.floats(-1.0, 1.0)),
        lift=arrays(np.float64, 64, elements=st.floats(0.0, 1.0)),
    )
    @settings(max_examples=25, deadline=None)
    def test_comparison(self, f, lift):
        strip = extension_solver.build_strip(CIRCLE, 0.4, height=4.0, m=32)
        g = f + lift
        F = extension_solver.solve_extension(Field(CIRCLE, f), strip.a, strip)
        G = extension_solver.solve_extension(Field(CIRCLE, g), strip.a, strip)
        assert np.all(F.values <= G.values + 1e-10)

    def test_semiconvexity_propagates(self, rng):
        strip = extension_solver.build_strip(CIRCLE, 0.7, height=4.0, m=32)
        f = Field(CIRCLE, rng.standard_normal(64))
        F = extension_solver.solve_extension(f, strip.a, strip)
        trace_constant = core_fields.semiconvexity_constant(f)
        for j in range(strip.m + 1):
            layer = Field(CIRCLE, F.slice(j))
            assert core_fields.semiconvexity_constant(layer) <= trace_constant + 1e-8


class TestDtnTrace:

    @pytest.mark.parametrize("k", [1, 2])
    def test_half_laplacian_of_sine(self, k):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=10.0, m=160)
        f = Field.from_function(CIRCLE, lambda x: np.sin(k * x))
        trace = extension_solver.dtn_trace(extension_solver.solve_extension(f, strip.a, strip), strip.a)
        assert relative_error(trace.values, -k * f.values) <= 1e-2

    def test_three_quarter_order_on_sine(self):
        s = 0.75
        strip = extension_solver.build_strip(CIRCLE, s, height=16.0, m=256)
        f = Field.from_function(CIRCLE, np.sin)
        trace = extension_solver.dtn_trace(extension_solver.solve_extension(f, strip.a, strip), strip.a)
        expected = -extension_solver.extension_constant(s) * f.values
        assert relative_error(trace.values, expected) <= 2e-2

    def test_needs_shallow_layers(self):
        strip = extension_solver.build_strip(CIRCLE, 0.5, height=16.0, m=8)
        F = extension_solver.solve_extension(Field.from_function(CIRCLE, np.sin), strip.a, strip)
        with pytest.raises(ConfigurationError):
            extension_solver.dtn_trace(F, strip.a)

    def test_profile_matches_closed_form(self):
        y = np.linspace(0.0, 5.0, 11)
        assert np.allclose(extension_solver.extension_profile(0.5, 1.0, y), np.exp(-y), atol=1e-12)

    @pytest.mark.slow
    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_chain_identity(self, s):
        grid = Grid1D(-4 * np.pi, 4 * np.pi, 256)
        family = [
            Field.from_function(grid, np.sin),
            Field.from_function(grid, lambda x: np.sin(2 * x)),
            gaussian(grid),
        ]
        strip = extension_solver.build_strip(grid, s, height=16.0, m=256)
        op = frac_operator.build_spectral(grid, s)
        c = extension_solver.extension_constant(s)
        for f in family:
            dtn = extension_solver.dtn_trace(extension_solver.solve_extension(f, strip.a, strip), strip.a)
            assert relative_error(-dtn.values / c, op.apply(f).values) <= 2e-2
        fitted, ratios = extension_solver.fit_extension_constant(family, strip, op)
        assert fitted == pytest.approx(c, rel=2e-2)
        assert np.ptp(ratios) / fitted <= 2e-2


class TestEigenCheck:

    @pytest.mark.parametrize("s", [0.5, 0.75, 0.3])
    def test_angular_eigenvalue(self, s):
        assert extension_solver.eigen_check(s, 64) == pytest.approx((1 - s) * s, rel=1e-2)

    def test_scale_invariance(self):
        assert extension_solver.eigen_check(0.6, 64, scale=2.0) == pytest.approx(
            extension_solver.eigen_check(0.6, 64), rel=1e-12
        )

    def test_needs_enough_nodes(self):
        with pytest.raises(ParameterError):
            extension_solver.eigen_check(0.5, 32)


class TestMonotonicityFunctional:

    def test_zero_field(self):
        grid = Grid1D(-4.0, 4.0, 64)
        strip = extension_solver.build_strip(grid, 0.6, height=4.0, m=32)
        w = ExtensionField(strip=strip, values=np.zeros(strip.shape), weight=-strip.a)
        phi = extension_solver.monotonicity_phi(w, np.array([0.5, 1.0, 2.0]))
        assert np.all(phi == 0.0)

    def test_linear_profile_at_half(self):
        grid = Grid1D(-4.0, 4.0, 128)
        strip = extension_solver.build_strip(grid, 0.5, height=4.0, m=128)
        values = np.broadcast_to(strip.y_nodes, strip.shape)
        w = ExtensionField(strip=strip, values=values, weight=-strip.a)
        radii = np.array([0.5, 1.0, 2.0])
        phi = extension_solver.monotonicity_phi(w, radii)
        assert phi == pytest.approx(np.pi * radii / 2.0, rel=2e-2)

    def test_power_profile(self):
        s = 0.75
        grid = Grid1D(-4.0, 4.0, 256)
        strip = extension_solver.build_strip(grid, s, height=4.0, m=256)
        values = np.broadcast_to(strip.y_nodes ** 1.5, strip.shape)
        w = ExtensionField(strip=strip, values=values, weight=-strip.a)
        integral = np.sqrt(np.pi) * gamma(1.25) / gamma(1.75)
        phi = extension_solver.monotonicity_phi(w, np.array([1.0]))
        assert phi[0] == pytest.approx(0.75 * integral, rel=3e-2)

    def test_radius_outside_strip(self):
        grid = Grid1D(-4.0, 4.0, 64)
        strip = extension_solver.build_strip(grid, 0.6, height=2.0, m=32)
        w = ExtensionField(strip=strip, values=np.zeros(strip.shape), weight=-strip.a)
        with pytest.raises(ParameterError):
            extension_solver.monotonicity_phi(w, np.array([3.0]))

    def test_needs_reflected_weight(self):
        grid = Grid1D(-4.0, 4.0, 64)
        strip = extension_solver.build_strip(grid, 0.6, height=2.0, m=32)
        w = ExtensionField(strip=strip, values=np.zeros(strip.shape), weight=strip.a)
        with pytest.raises(ParameterError):
            extension_solver.monotonicity_phi(w, np.array([1.0]))

    def test_bound_flags_blow_up(self):
        radii = np.array([0.25, 0.5, 1.0])
        _, _, violated = extension_solver.monotonicity_bound(np.array([1e6, 1.0, 1.0]), radii, 0.4, 0.5)
        assert violated
        _, _, calm = extension_solver.monotonicity_bound(np.array([1.0, 1.0, 1.0]), radii, 0.4, 0.5)
        assert not calm


class TestFramedGenerator:

    def _generator(self, beta: float):
        wave = oracles.traveling_wave(beta)
        grid = Grid1D(-2.0, 2.0, 128)
        strip = extension_solver.build_strip(grid, wave.s, height=2.0, m=128)
        return wave, grid, extension_solver.FramedExtensionGenerator(strip=strip, frame=wave.frame)

    def test_stationary_wave_balance(self):
        wave, grid, generator = self._generator(0.5)
        u = Field(grid, wave.trace(grid.nodes))
        out = generator.apply(u).values
        x = grid.nodes
        detached = (x > -1.5) & (x < -0.5)
        contact = (x > 0.5) & (x < 1.5)
        assert np.max(np.abs(out[detached])) <= 0.1
        assert out[contact] == pytest.approx(1.5 * np.sqrt(x[contact]), rel=0.1)

    def test_resolvent_keeps_frame_values(self):
        wave, grid, generator = self._generator(0.75)
        bound = generator.at_time(0.1)
        rhs = Field(grid, wave.trace(grid.nodes))
        out = bound.implicit_solve(0.01, rhs)
        expected = wave.frame(0.1, grid.nodes[[0, -1]], np.zeros(2))
        assert out.values[[0, -1]] == pytest.approx(expected)
        assert bound.time == 0.1
        assert generator.time == 0.0
