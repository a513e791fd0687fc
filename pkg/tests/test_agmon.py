import numpy as np
import pytest
from scipy.integrate import quad

from spwell import (
    ConfigError,
    EmptyWindow,
    GridFunction,
    SystemParams,
    agmon_distance,
    build_grid,
    verify_decay,
    weight_function,
    well_rescaled,
)


def point_distance(x, y, eps, p):
    """Point-to-point Agmon distance along the segment from x to y."""
    U = p.well()

    def integrand(t):
        return np.sqrt(max(well_rescaled(U, p, t) - eps, 0.0))

    a, b = min(x, y), max(x, y)
    val, _ = quad(
        integrand, a, b, points=[p.x0 - p.h, p.x0 + p.h],
        epsabs=1e-12, epsrel=1e-11, limit=400,
    )
    return val


class TestAgmonDistance:
    def test_zero_inside_support(self, default_params):
        p = default_params
        for x in (p.x0 - p.h, p.x0 - 0.3 * p.h, p.x0, p.x0 + p.h):
            assert agmon_distance(x, -0.25, p) == 0.0

    def test_constant_integrand_outside(self, default_params):
        # outside the well U^h = 0, so d = sqrt(-eps) (|x-x0| - h)
        p = default_params
        eps = -0.25
        for x in (0.1, 0.2, 0.6, 0.9):
            expect = 0.5 * (abs(x - p.x0) - p.h)
            assert agmon_distance(x, eps, p) == pytest.approx(expect, abs=1e-12)

    def test_comparison_lower_bound(self, default_params):
        # d(x, well) >= |eps|^{1/2} (|x - x0| - h) at every grid node
        p = default_params
        g = build_grid(p)
        c0 = np.sqrt(-p.eps_S)
        for x in g.interior_x()[:: max(g.n // 200, 1)]:
            d = agmon_distance(float(x), p.eps_S, p)
            assert d >= c0 * abs(float(x) - p.x0) - c0 * p.h - 1e-12

    def test_requires_negative_energy(self, default_params):
        with pytest.raises(ValueError):
            agmon_distance(0.9, 0.1, default_params)

    def test_symmetry_and_triangle_inequality(self, default_params):
        p = default_params
        eps = -0.3
        rng = np.random.default_rng(31)
        pts = rng.uniform(0.05, 0.95, size=(15, 3))
        for x, y, z in pts:
            dxy = point_distance(x, y, eps, p)
            assert dxy == pytest.approx(point_distance(y, x, eps, p), abs=1e-11)
            # slack covers the sqrt-kink quadrature error of the oracle
            assert dxy <= point_distance(x, z, eps, p) + point_distance(z, y, eps, p) + 1e-9

    def test_lipschitz_gradient_bound(self, default_params):
        # |d(x+dx) - d(x)| / dx <= sup (U^h - eps)_+^{1/2} over the step
        p = default_params
        eps = -0.4
        U = p.well()
        step = 1e-4
        for x in np.linspace(0.05, 0.95, 61):
            d0 = agmon_distance(float(x), eps, p)
            d1 = agmon_distance(float(x) + step, eps, p)
            bound = max(
                np.sqrt(max(well_rescaled(U, p, t) - eps, 0.0))
                for t in np.linspace(x, x + step, 5)
            )
            assert abs(d1 - d0) / step <= bound + 1e-6


class TestWeightFunction:
    def test_delta_one_rejected_at_construction(self):
        with pytest.raises(ConfigError):
            SystemParams(delta_agmon=1.0)

    def test_zero_inside_support(self, default_params):
        p = default_params
        assert weight_function(p.x0, -0.2, p) == 0.0

    def test_linear_in_one_minus_delta(self, default_params):
        from dataclasses import replace

        x, eps = 0.8, -0.3
        w2 = weight_function(x, eps, replace(default_params, delta_agmon=0.2))
        w6 = weight_function(x, eps, replace(default_params, delta_agmon=0.6))
        assert w2 / w6 == pytest.approx(0.8 / 0.4, rel=1e-12)


class TestVerifyDecay:
    def test_not_applicable_when_hypothesis_violated(self, default_params):
        p = default_params
        g = build_grid(p)
        psi = GridFunction.from_callable(g, lambda x: np.sin(np.pi * x / p.L) * np.sqrt(2 / p.L))
        # box ground state with energy above the level: flagged, not raised
        rep = verify_decay(psi, eps_i=0.1, eps=-0.5, p=p)
        assert not rep.applicable
        assert np.isnan(rep.fitted_rate)
        rep = verify_decay(psi, eps_i=-0.6, eps=0.2, p=p)
        assert not rep.applicable

    def test_ground_state_rate(self, scf_default, default_params):
        p = default_params
        sol = scf_default
        rep = verify_decay(sol.spectrum.vectors[0], float(sol.spectrum.values[0]), p.eps_S, p)
        assert rep.applicable
        # contract from the decay estimates: at least 90% of the weight rate
        assert rep.fitted_rate * p.h >= 0.9 * (1 - p.delta_agmon) * np.sqrt(-p.eps_S)
        assert np.isfinite(rep.weighted_norm) and rep.weighted_norm > 0
        assert np.isfinite(rep.weighted_grad_norm) and rep.weighted_grad_norm > 0

    def test_weighted_norm_bounded_across_h(self, default_params):
        from dataclasses import replace

        from spwell import scf_solve

        norms = []
        for h in (0.05, 0.025):
            p = replace(default_params, h=h)
            sol = scf_solve(p)
            rep = verify_decay(sol.spectrum.vectors[0], float(sol.spectrum.values[0]), p.eps_S, p)
            norms.append(rep.weighted_norm)
        ratio = max(norms) / min(norms)
        assert ratio <= 2.0

    def test_empty_window(self, default_params):
        # h large enough that both fit windows collapse
        p = SystemParams(h=0.16)
        g = build_grid(p)
        psi = GridFunction.from_callable(
            g, lambda x: np.exp(-np.abs(x - p.x0) / p.h) / np.sqrt(p.h)
        )
        with pytest.raises(EmptyWindow):
            verify_decay(psi, eps_i=-1.0, eps=-0.5, p=p)

    def test_window_geometry(self, scf_default, default_params):
        p = default_params
        sol = scf_default
        rep = verify_decay(sol.spectrum.vectors[0], float(sol.spectrum.values[0]), p.eps_S, p)
        (l0, l1), (r0, r1) = rep.window
        assert r0 == pytest.approx(p.x0 + 2 * p.h)
        assert r1 == pytest.approx(p.x0 + min(6 * p.h, (p.L - p.x0) / 2))
        assert l1 == pytest.approx(p.x0 - 2 * p.h)
        assert l0 >= 0.1 * p.L - 1e-12
