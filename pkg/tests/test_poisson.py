import numpy as np
import pytest

from spwell import (
    AtomOutOfDomain,
    GridFunction,
    Measure,
    NegativeSource,
    SystemParams,
    build_grid,
    green_kernel,
    poisson_solve_density,
    poisson_solve_measure,
)


@pytest.fixture(scope="module")
def grid():
    return build_grid(SystemParams(h=0.05))


class TestGreenKernel:
    def test_dirichlet_boundary(self):
        assert green_kernel(0.0, 0.3, 1.0) == 0.0
        assert green_kernel(1.0, 0.3, 1.0) == 0.0
        assert green_kernel(0.3, 0.0, 1.0) == 0.0

    def test_closed_form(self):
        assert green_kernel(0.25, 0.75, 1.0) == pytest.approx(0.0625, abs=1e-15)

    def test_theta_equation_coefficient(self):
        # G(x0, x0) is exactly the coefficient of the scalar fixed point
        x0, L = 0.4, 1.0
        assert green_kernel(x0, x0, L) == pytest.approx(x0 * (1 - x0 / L), rel=1e-15)

    def test_symmetry_and_positivity(self):
        rng = np.random.default_rng(5)
        x, y = rng.uniform(0, 2, 50), rng.uniform(0, 2, 50)
        g1 = green_kernel(x, y, 2.0)
        g2 = green_kernel(y, x, 2.0)
        assert np.allclose(g1, g2, atol=0.0)
        assert np.all(g1 >= 0.0)
        assert np.all(g1 <= 0.5 + 1e-15)  # sup G = L/4


class TestDensitySolve:
    def test_zero_source(self, grid):
        v = poisson_solve_density(grid, GridFunction.zeros(grid))
        assert v.sup_norm() == 0.0

    def test_unit_source_quadratic(self, grid):
        # n = 1 -> V = x(L-x)/2 exactly at the nodes (stencil-exact)
        v = poisson_solve_density(grid, GridFunction(np.ones(grid.n), grid))
        x = grid.interior_x()
        assert np.max(np.abs(v.values - x * (grid.L - x) / 2)) < 1e-12

    def test_cross_method_oracle(self, grid):
        rng = np.random.default_rng(99)
        x = grid.interior_x()
        dens = GridFunction(1.0 + rng.uniform(0, 0.3) * np.sin(3 * np.pi * x), grid)
        a = poisson_solve_density(grid, dens)
        b = poisson_solve_measure(grid, Measure(density=dens))
        assert np.max(np.abs(a.values - b.values)) < 1e-4

    def test_positivity_maximum_principle(self, grid):
        rng = np.random.default_rng(17)
        dens = GridFunction(rng.uniform(0, 1, grid.n), grid)
        v = poisson_solve_density(grid, dens)
        assert np.min(v.values) >= 0.0

    def test_negative_source_rejected(self, grid):
        vals = np.ones(grid.n)
        vals[3] = -1e-6
        with pytest.raises(NegativeSource):
            poisson_solve_density(grid, GridFunction(vals, grid))

    def test_sup_bound_by_mass(self, grid):
        rng = np.random.default_rng(23)
        dens = GridFunction(rng.uniform(0, 2, grid.n), grid)
        v = poisson_solve_density(grid, dens)
        assert v.sup_norm() <= grid.L / 4 * dens.mass() * (1 + 1e-12)


class TestMeasureSolve:
    def test_single_atom_tent(self, grid):
        x0 = 0.4
        mu = Measure(atoms=((x0, 1.0),))
        v = poisson_solve_measure(grid, mu)
        x = grid.interior_x()
        tent = np.where(x <= x0, x * (1 - x0), x0 * (1 - x))
        assert np.max(np.abs(v.values - tent)) < 1e-14
        assert v.values.max() == pytest.approx(x0 * (1 - x0 / grid.L), abs=1e-12)

    def test_zero_measure(self, grid):
        v = poisson_solve_measure(grid, Measure())
        assert v.sup_norm() == 0.0

    def test_linear_in_weight(self, grid):
        v1 = poisson_solve_measure(grid, Measure(atoms=((0.3, 1.0),)))
        v7 = poisson_solve_measure(grid, Measure(atoms=((0.3, 7.0),)))
        assert np.allclose(v7.values, 7.0 * v1.values, rtol=1e-13, atol=0.0)

    def test_atom_out_of_domain(self, grid):
        with pytest.raises(AtomOutOfDomain):
            poisson_solve_measure(grid, Measure(atoms=((1.5, 1.0),)))
        with pytest.raises(AtomOutOfDomain):
            poisson_solve_measure(grid, Measure(atoms=((0.0, 1.0),)))

    def test_slope_jump_at_atom(self, grid):
        # discrete left/right slopes at the atom differ by -w + O(dx)
        w, a = 2.5, 0.4
        v = poisson_solve_measure(grid, Measure(atoms=((a, w),)))
        x = grid.interior_x()
        j = int(np.argmin(np.abs(x - a)))
        left = (v.values[j] - v.values[j - 1]) / grid.dx
        right = (v.values[j + 1] - v.values[j]) / grid.dx
        assert right - left == pytest.approx(-w, abs=5 * grid.dx * w)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            Measure(atoms=((0.5, -1.0),))

    def test_mass(self, grid):
        dens = GridFunction(np.full(grid.n, 2.0), grid)
        mu = Measure(atoms=((0.2, 1.5),), density=dens)
        assert mu.mass() == pytest.approx(1.5 + 2.0 * grid.dx * grid.n, rel=1e-12)
