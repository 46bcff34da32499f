import math

import numpy as np
import pytest
from scipy.integrate import quad

from inls.grids import (
    Field,
    GridSpec,
    PotentialWeight,
    boundary_mass_fraction,
    dump_field,
    gaussian_field,
    hs_norm,
    laplacian_apply,
    load_field,
    mass,
    mesh,
    radial_node_weights,
    radial_nodes,
    variance,
    weight_values,
    weighted_potential_integral,
    weighted_quadratic,
)


def normalized_gaussian(grid):
    return gaussian_field(grid, amplitude=math.pi ** (-grid.n / 4.0), width=1.0)


class TestGridSpec:
    def test_tensor_validation(self):
        with pytest.raises(ValueError):
            GridSpec.tensor(4, 10.0, 64)
        with pytest.raises(ValueError):
            GridSpec.tensor(2, 10.0, 100)  # not a power of two
        with pytest.raises(ValueError):
            GridSpec.tensor(2, 10.0, 4)

    def test_radial_validation(self):
        with pytest.raises(ValueError):
            GridSpec.radial(2, 10.0, 64)
        grid = GridSpec.radial(3, 8.0, 64)
        r = radial_nodes(grid)
        assert r[0] == pytest.approx(grid.spacing / 2)  # no origin node
        assert r[-1] == pytest.approx(8.0 - grid.spacing / 2)

    def test_field_shape_check(self):
        grid = GridSpec.tensor(2, 10.0, 16)
        with pytest.raises(ValueError):
            Field(grid, np.zeros(16, dtype=complex))


class TestMass:
    def test_zero_field(self):
        grid = GridSpec.tensor(2, 10.0, 32)
        assert mass(Field(grid, np.zeros(grid.shape))) == 0.0

    def test_normalized_gaussian(self):
        for n in (1, 2, 3):
            grid = GridSpec.tensor(n, 20.0, 64)
            assert mass(normalized_gaussian(grid)) == pytest.approx(1.0, abs=1e-10)

    def test_radial_gaussian(self):
        grid = GridSpec.radial(3, 14.0, 4096)
        u = gaussian_field(grid, math.pi ** -0.75, 1.0)
        assert mass(u) == pytest.approx(1.0, rel=1e-6)

    def test_scaling_exact(self):
        grid = GridSpec.tensor(2, 10.0, 32)
        u = gaussian_field(grid, 1.0, 1.0)
        scaled = Field(grid, (2.0 - 1.0j) * u.values)
        assert mass(scaled) == pytest.approx(abs(2.0 - 1.0j) ** 2 * mass(u), rel=1e-14)


class TestSobolevNorm:
    def test_s_zero_is_mass(self):
        grid = GridSpec.tensor(2, 20.0, 64)
        u = gaussian_field(grid, 1.3, 0.9)
        assert hs_norm(u, 0) == pytest.approx(math.sqrt(mass(u)), rel=1e-14)

    def test_plane_wave_multiplier(self):
        grid = GridSpec.tensor(1, 8.0, 64)
        x = mesh(grid)[0]
        xi0 = 2 * math.pi * 3 / 8.0
        u = Field(grid, np.exp(1j * xi0 * x))
        for s in (0.5, 1.0, 2.0):
            assert hs_norm(u, s) == pytest.approx(xi0 ** s * math.sqrt(mass(u)), rel=1e-12)

    def test_gaussian_gradient_analytic(self):
        # integral of |grad exp(-|x|^2/2)|^2 over R^3 is (3/2) pi^(3/2)
        grid = GridSpec.tensor(3, 20.0, 64)
        u = gaussian_field(grid, 1.0, 1.0)
        assert hs_norm(u, 1) ** 2 == pytest.approx(1.5 * math.pi ** 1.5, rel=1e-10)

    def test_radial_gradient_matches_tensor_value(self):
        grid = GridSpec.radial(3, 16.0, 4096)
        u = gaussian_field(grid, 1.0, 1.0)
        assert hs_norm(u, 1) ** 2 == pytest.approx(1.5 * math.pi ** 1.5, rel=1e-5)

    def test_radial_rejects_fractional(self):
        grid = GridSpec.radial(3, 8.0, 64)
        u = gaussian_field(grid, 1.0, 1.0)
        with pytest.raises(ValueError):
            hs_norm(u, 0.5)

    def test_parseval(self):
        grid = GridSpec.tensor(2, 12.0, 64)
        rng = np.random.default_rng(7)
        u = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        import scipy.fft

        uhat = scipy.fft.fftn(u.values)
        spectral = float(np.sum(np.abs(uhat) ** 2)) * grid.cell_measure / u.values.size
        assert spectral == pytest.approx(mass(u), rel=1e-12)

    def test_monotone_under_refinement(self):
        values = []
        for points in (32, 64, 128):
            grid = GridSpec.tensor(2, 18.0, points)
            values.append(hs_norm(gaussian_field(grid, 1.0, 1.0), 1.5))
        # converges monotonically for a smooth fixed profile
        assert abs(values[2] - values[1]) <= abs(values[1] - values[0])

    def test_multiplier_composition(self):
        grid = GridSpec.tensor(2, 12.0, 64)
        u = gaussian_field(grid, 1.0, 1.2)
        lap = laplacian_apply(u)
        assert hs_norm(lap, 1.0) == pytest.approx(hs_norm(u, 3.0), rel=1e-12)

    def test_phase_invariance(self):
        grid = GridSpec.tensor(2, 12.0, 32)
        u = gaussian_field(grid, 1.0, 1.0)
        rotated = Field(grid, u.values * np.exp(1j * 0.73))
        assert mass(rotated) == pytest.approx(mass(u), rel=1e-15)
        assert hs_norm(rotated, 1) == pytest.approx(hs_norm(u, 1), rel=1e-14)
        assert variance(rotated) == pytest.approx(variance(u), rel=1e-15)


class TestWeightedIntegrals:
    def test_zero_field(self):
        grid = GridSpec.radial(3, 8.0, 64)
        w = PotentialWeight(b=0.5, delta=0.0)
        assert weighted_potential_integral(Field(grid, np.zeros(64)), w, 3.0) == 0.0

    def test_b_zero_reduces_to_plain_integral(self):
        grid = GridSpec.radial(3, 10.0, 512)
        u = gaussian_field(grid, 1.1, 1.0)
        w = PotentialWeight(b=0.0, delta=0.0)
        plain = float(np.sum(np.abs(u.values) ** 4 * radial_node_weights(grid)))
        assert weighted_potential_integral(u, w, 2.0) == pytest.approx(plain, rel=1e-14)

    def test_radial_against_quad_oracle(self):
        grid = GridSpec.radial(3, 12.0, 4096)
        u = gaussian_field(grid, 1.0, 1.0)
        w = PotentialWeight(b=0.5, delta=0.0)
        sphere = 4 * math.pi

        def integrand(r):
            return r ** (2 - 0.5) * math.exp(-r ** 2 / 2) ** 5

        oracle, _ = quad(integrand, 0, np.inf)
        assert weighted_potential_integral(u, w, 3.0) == pytest.approx(
            sphere * oracle, rel=1e-4
        )

    def test_tensor_needs_regularization(self):
        grid = GridSpec.tensor(2, 10.0, 32)
        u = gaussian_field(grid, 1.0, 1.0)
        with pytest.raises(ValueError):
            weighted_potential_integral(u, PotentialWeight(b=0.5, delta=0.0), 2.0)
        value = weighted_potential_integral(
            u, PotentialWeight(b=0.5, delta=grid.spacing), 2.0
        )
        assert value > 0


class TestVariance:
    def test_normalized_gaussian_second_moment(self):
        for n in (1, 2, 3):
            grid = GridSpec.tensor(n, 24.0, 64)
            assert variance(normalized_gaussian(grid)) == pytest.approx(n / 2, abs=1e-8)

    def test_zero_field(self):
        grid = GridSpec.tensor(1, 10.0, 32)
        assert variance(Field(grid, np.zeros(32))) == 0.0

    def test_translation_rule(self):
        # shifting concentrated data by a grid vector adds |a|^2 * mass
        grid = GridSpec.tensor(2, 24.0, 64)
        u = normalized_gaussian(grid)
        cells = 4
        a = cells * grid.spacing
        shifted = Field(grid, np.roll(u.values, cells, axis=0))
        expected = variance(u) + a ** 2 * mass(u)  # centered data: <x> = 0
        assert variance(shifted) == pytest.approx(expected, rel=1e-8)

    def test_weighted_quadratic_consistency(self):
        grid = GridSpec.tensor(2, 16.0, 32)
        u = gaussian_field(grid, 1.0, 1.0)
        assert weighted_quadratic(u, lambda *c: np.ones(grid.shape)) == pytest.approx(
            mass(u), rel=1e-14
        )
        assert weighted_quadratic(
            u, lambda *c: sum(ci ** 2 for ci in c)
        ) == pytest.approx(variance(u), rel=1e-14)


class TestLaplacian:
    def test_plane_wave_eigenfunction(self):
        grid = GridSpec.tensor(2, 8.0, 32)
        xs = mesh(grid)
        xi = (2 * math.pi * 2 / 8.0, 2 * math.pi * 5 / 8.0)
        u = Field(grid, np.exp(1j * (xi[0] * xs[0] + xi[1] * xs[1])))
        lap = laplacian_apply(u)
        expected = -(xi[0] ** 2 + xi[1] ** 2) * u.values
        assert np.max(np.abs(lap.values - expected)) < 1e-10

    def test_constant_field(self):
        grid = GridSpec.tensor(1, 10.0, 32)
        lap = laplacian_apply(Field(grid, np.full(32, 2.5 + 0j)))
        assert np.max(np.abs(lap.values)) < 1e-12

    def test_radial_gaussian_accuracy(self):
        grid = GridSpec.radial(3, 12.0, 4096)
        r = radial_nodes(grid)
        lap = laplacian_apply(Field(grid, np.exp(-r ** 2 / 2).astype(complex)))
        exact = (r ** 2 - 3) * np.exp(-r ** 2 / 2)
        assert np.max(np.abs(lap.values - exact)) < 5e-5

    def test_radial_quadratic_exact(self):
        grid = GridSpec.radial(4, 10.0, 256)
        r = radial_nodes(grid)
        lap = laplacian_apply(Field(grid, (r ** 2).astype(complex)))
        # exact on quadratics away from the Dirichlet wall
        assert np.max(np.abs(lap.values[:-2] - 2 * grid.n)) < 1e-8

    def test_radial_convergence_order(self):
        errors = []
        for points in (1024, 2048):
            grid = GridSpec.radial(3, 12.0, points)
            r = radial_nodes(grid)
            lap = laplacian_apply(Field(grid, np.exp(-r ** 2 / 2).astype(complex)))
            exact = (r ** 2 - 3) * np.exp(-r ** 2 / 2)
            w = radial_node_weights(grid)
            errors.append(math.sqrt(float(np.sum(np.abs(lap.values - exact) ** 2 * w))))
        order = math.log2(errors[0] / errors[1])
        assert 1.8 <= order <= 2.2


class TestBoundaryMonitor:
    def test_concentrated_data(self):
        grid = GridSpec.tensor(2, 24.0, 64)
        assert boundary_mass_fraction(normalized_gaussian(grid)) < 1e-6

    def test_shell_data(self):
        grid = GridSpec.radial(3, 10.0, 256)
        r = radial_nodes(grid)
        ring = Field(grid, np.exp(-((r - 9.5) ** 2) * 20).astype(complex))
        assert boundary_mass_fraction(ring) > 0.9

    def test_zero_field(self):
        grid = GridSpec.tensor(2, 10.0, 16)
        assert boundary_mass_fraction(Field(grid, np.zeros(grid.shape))) == 0.0


class TestFieldDump:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        for grid in (GridSpec.tensor(2, 12.0, 16), GridSpec.radial(3, 8.0, 64)):
            values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
            u = Field(grid, values, time_tag=0.375)
            meta = {"b": 0.5, "delta": 0.0, "sigma": 3.0, "lambda": -1.0}
            path = tmp_path / f"dump_{grid.kind}.bin"
            dump_field(u, path, meta)
            loaded, header = load_field(path)
            assert loaded.grid == grid
            assert loaded.time_tag == 0.375
            assert header["sigma"] == 3.0
            assert loaded.values.tobytes() == u.values.tobytes()  # bit-exact

    def test_header_is_json_line(self, tmp_path):
        grid = GridSpec.radial(3, 8.0, 64)
        u = gaussian_field(grid, 1.0, 1.0)
        path = tmp_path / "dump.bin"
        dump_field(u, path, {"b": 0.5, "delta": 0.0, "sigma": 3.0, "lambda": -1.0})
        import json

        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
        assert header["kind"] == "radial"
        assert header["points"] == 64
