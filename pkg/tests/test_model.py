import numpy as np
import pytest
from scipy.integrate import quad

from spwell import (
    ConfigError,
    DimensionMismatch,
    GridFunction,
    PartitionFunction,
    SystemParams,
    TridiagOperator,
    WellPotential,
    assemble_operator,
    build_grid,
    load_params,
    partition_antiderivative,
    partition_eval,
    well_eval,
    well_rescaled,
)


class TestWellPotential:
    def test_center_value(self):
        U = WellPotential(U0=1.0)
        assert well_eval(U, 0.0) == pytest.approx(-np.exp(-1.0), abs=1e-15)

    def test_compact_support_boundary(self):
        U = WellPotential(U0=1.0)
        assert well_eval(U, 1.0) == 0.0
        assert well_eval(U, -1.0) == 0.0
        assert well_eval(U, 3.7) == 0.0

    def test_closed_form_inside(self):
        U = WellPotential(U0=10.0)
        assert well_eval(U, 0.5) == pytest.approx(-10.0 * np.exp(-4.0 / 3.0), abs=1e-10)
        assert well_eval(U, 0.5) == pytest.approx(-2.6359713811, abs=1e-9)

    def test_nonpositive_and_range(self):
        U = WellPotential(U0=3.0)
        y = np.linspace(-2, 2, 1001)
        v = well_eval(U, y)
        assert np.all(v <= 0.0)
        assert np.all(v >= -3.0 * np.exp(-1.0) - 1e-15)

    def test_sup_norm(self):
        U = WellPotential(U0=7.0)
        assert U.Lambda == pytest.approx(7.0 * np.exp(-1.0), rel=1e-15)

    def test_rescaled_center_and_edge(self):
        p = SystemParams(x0=0.4, h=0.1, U0=10.0)
        U = p.well()
        assert well_rescaled(U, p, p.x0) == well_eval(U, 0.0)
        assert well_rescaled(U, p, p.x0 + p.h) == 0.0
        assert well_rescaled(U, p, 0.45) == pytest.approx(-2.6359713811, abs=1e-9)

    def test_rescaled_integral_substitution(self):
        # int U^h dx = h * int U dy, both by quadrature
        p = SystemParams(x0=0.4, h=0.05, U0=10.0)
        U = p.well()
        lhs, _ = quad(
            lambda x: well_rescaled(U, p, x), 0.0, p.L,
            points=[p.x0 - p.h, p.x0, p.x0 + p.h], limit=200,
        )
        ref, _ = quad(lambda y: well_eval(U, y), -1.0, 1.0, limit=200)
        assert lhs == pytest.approx(p.h * ref, rel=1e-8)


class TestPartitionFunction:
    def test_threshold_and_above(self):
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        assert partition_eval(f, -0.5) == 0.0
        assert partition_eval(f, 0.3) == 0.0

    def test_closed_form_below(self):
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        assert partition_eval(f, -1.5) == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_positive_below_threshold(self):
        # exp(-1/(eps_S - x)) underflows within ~1/745 of the threshold;
        # positivity is checked where float64 can represent it at all
        f = PartitionFunction(eps_S=-0.5, A=2.0)
        x = np.linspace(-40.0, -0.502, 500)
        assert np.all(partition_eval(f, x) > 0.0)

    def test_nonincreasing(self):
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        x = np.linspace(-5.0, 1.0, 2000)
        v = partition_eval(f, x)
        assert np.all(np.diff(v) <= 1e-15)

    def test_smooth_at_threshold_from_left(self):
        # finite-difference slope from the left vanishes at the threshold
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        d = 1e-3
        slope = (partition_eval(f, f.eps_S - d) - partition_eval(f, f.eps_S - 2 * d)) / d
        assert abs(slope) < 1e-100

    def test_antiderivative_zero_above(self):
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        assert partition_antiderivative(f, -0.5) == 0.0
        assert partition_antiderivative(f, 12.0) == 0.0

    def test_antiderivative_vs_independent_quadrature(self):
        # F(x) - F(y) = int_x^y f, cross-checked with composite Simpson
        from scipy.integrate import simpson

        f = PartitionFunction(eps_S=-0.5, A=1.3)
        for x, y in [(-3.0, -1.0), (-2.5, -0.7), (-10.0, -4.0)]:
            s = np.linspace(x, y, 20001)
            ref = simpson(partition_eval(f, s), x=s)
            got = partition_antiderivative(f, x) - partition_antiderivative(f, y)
            assert got == pytest.approx(ref, abs=1e-10)

    def test_antiderivative_nonincreasing(self):
        f = PartitionFunction(eps_S=-0.5, A=1.0)
        xs = np.linspace(-4.0, 0.5, 31)
        F = [partition_antiderivative(f, x) for x in xs]
        assert all(a >= b - 1e-14 for a, b in zip(F, F[1:]))
        assert all(v >= 0.0 for v in F)


class TestSystemParams:
    def test_defaults_valid(self):
        p = SystemParams()
        assert p.L == 1.0 and p.x0 == 0.4 and p.eps_S == -0.5

    def test_well_support_inside_domain(self):
        with pytest.raises(ConfigError):
            SystemParams(x0=0.05, h=0.1)
        with pytest.raises(ConfigError):
            SystemParams(x0=0.95, h=0.1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(L=-1.0),
            dict(eps_S=0.1),
            dict(A=0.0),
            dict(points_per_well=5),
            dict(delta_agmon=1.0),
            dict(delta_agmon=0.0),
            dict(U0=-2.0),
            dict(tol_scf=0.0),
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            SystemParams(**kwargs)

    def test_u0_zero_allowed(self):
        # degenerate but constructible; rejected downstream by e1 < eps_S
        p = SystemParams(U0=0.0)
        assert p.well().Lambda == 0.0


class TestGrid:
    def test_floor_binds(self):
        g = build_grid(SystemParams(L=1.0, h=0.1, points_per_well=20))
        assert g.dx == pytest.approx(1.0 / 1000.0, rel=1e-15)
        assert g.n == 999 and not g.capped

    def test_well_resolution_binds(self):
        g = build_grid(SystemParams(L=1.0, h=0.0125, points_per_well=20))
        assert g.dx == pytest.approx(0.0125 / 20.0, rel=1e-12)
        assert g.n + 1 == 1600

    def test_cap_rule(self):
        g = build_grid(SystemParams(L=1.0, h=0.01, points_per_well=20, n_max=1500))
        assert g.capped
        assert g.n == 1500
        assert g.dx == pytest.approx(1.0 / 1501.0, rel=1e-15)

    def test_unresolvable_after_cap_rejected(self):
        with pytest.raises(ConfigError):
            build_grid(SystemParams(L=1.0, h=1e-6, x0=0.4, n_max=400001))

    def test_endpoint_exact(self):
        g = build_grid(SystemParams())
        assert g.full_x()[-1] == pytest.approx(g.L, rel=1e-15)
        assert len(g.interior_x()) == g.n


class TestAssembleOperator:
    def test_free_stencil(self):
        # U0=0, V=0, n=3, h=1 is inadmissible for SystemParams; build the
        # stencil values directly from a small admissible config instead
        p = SystemParams(L=1.0, x0=0.5, h=0.25, U0=0.0, points_per_well=10)
        from spwell import Grid

        g = Grid(n=3, dx=0.25, L=1.0)
        T = assemble_operator(g, p, None)
        k = p.h**2 / 0.25**2
        assert np.allclose(T.diag, 2 * k)
        assert np.allclose(T.off, -k)
        assert T.scale == pytest.approx(p.h**2)

    def test_dimension_mismatch(self):
        p = SystemParams()
        g = build_grid(p)
        from spwell import Grid

        other = Grid(n=10, dx=g.L / 11, L=g.L)
        V = GridFunction.zeros(other)
        with pytest.raises(DimensionMismatch):
            assemble_operator(g, p, V)

    def test_symmetry_and_gershgorin_bound(self):
        # Gershgorin lower bound >= min(U + V) >= -Lambda for V >= 0
        p = SystemParams()
        g = build_grid(p)
        V = GridFunction.from_callable(g, lambda x: 0.3 * x * (1 - x))
        T = assemble_operator(g, p, V)
        lo, _ = T.gershgorin_interval()
        assert lo >= -p.well().Lambda - 1e-12

    def test_box_eigenvalues_known_spectrum(self):
        from spwell import eigenvalues_below

        p = SystemParams(U0=0.0, h=0.05)
        g = build_grid(p)
        T = assemble_operator(g, p, None)
        vals = eigenvalues_below(T, 0.5)
        c = 4 * p.h**2 / g.dx**2
        i = np.arange(1, len(vals) + 1)
        exact = c * np.sin(i * np.pi * g.dx / (2 * p.L)) ** 2
        assert np.max(np.abs(vals - exact) / exact) < 1e-12

    def test_box_smallest_approaches_continuum(self):
        # as dx -> 0 the smallest eigenvalue approaches h^2 pi^2 / L^2
        from spwell import Grid, eigenvalues_below

        p = SystemParams(U0=0.0, h=0.05)
        errs = []
        for n in (199, 399, 799):
            g = Grid(n=n, dx=p.L / (n + 1), L=p.L)
            T = assemble_operator(g, p, None)
            lam1 = eigenvalues_below(T, 0.1)[0]
            errs.append(abs(lam1 - p.h**2 * np.pi**2 / p.L**2))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] / errs[1] == pytest.approx(0.25, rel=0.05)  # O(dx^2)


class TestTridiagOperator:
    def test_off_length_checked(self):
        with pytest.raises(DimensionMismatch):
            TridiagOperator(diag=np.ones(4), off=np.ones(4), scale=1.0)

    def test_matvec(self):
        T = TridiagOperator(diag=np.array([2.0, 3.0, 4.0]), off=np.array([-1.0, -0.5]), scale=1.0)
        v = np.array([1.0, 1.0, 1.0])
        assert np.allclose(T.matvec(v), [1.0, 1.5, 3.5])


class TestConfigFile:
    def test_roundtrip_and_comments(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            """
            # sample configuration
            L = 2.0
            x0 = 0.8   # off center
            h = 0.1
            U0 = 5.0
            eps_S = -0.4
            points_per_well = 25
            """
        )
        p = load_params(cfg)
        assert p.L == 2.0 and p.x0 == 0.8 and p.points_per_well == 25
        assert p.tol_scf == SystemParams().tol_scf  # default kept

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("depth = 3\n")
        with pytest.raises(ConfigError):
            load_params(cfg)

    def test_bad_value_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("h = fast\n")
        with pytest.raises(ConfigError):
            load_params(cfg)
