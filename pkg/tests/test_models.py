import numpy as np
import pytest

from gkw import ConeClass, check_solvability, field_generator, make_grid, residual, solve
from gkw.models import TypeARootData, classical_kw, cyclic_higgs_A, toda, toda_weights, trace_zero_basis

from helpers import trig_field
from oracles import dense_laplacian, picard_classical_kw


class TestClassicalKW:
    def test_trivial_solution(self):
        g = make_grid([8, 8])
        rep = solve(classical_kw(g, np.ones(g.shape), 1.0))
        assert np.max(np.abs(rep.solution)) == 0.0

    def test_negative_mean_is_outside(self):
        g = make_grid([8, 8])
        assert check_solvability(classical_kw(g, np.ones(g.shape), -1.0)).cone.cls is ConeClass.OUTSIDE

    def test_matches_picard_oracle(self):
        g = make_grid([8, 8])
        h = field_generator(g, {"fourier_bump": {"seed": 11, "max_mode": 2, "amplitude": 1.0, "offset": 2.0}})
        rep = solve(classical_kw(g, h, 1.0))
        ref = picard_classical_kw(g.dims, g.lengths, h, np.ones(g.shape))
        assert np.max(np.abs(rep.solution[..., 0] - ref)) <= 1e-6

    def test_rejects_negative_h(self):
        g = make_grid([4, 4])
        with pytest.raises(ValueError):
            classical_kw(g, -np.ones(g.shape), 1.0)


class TestToda:
    def test_weights_sum_to_zero(self):
        for d in (2, 3, 5):
            np.testing.assert_allclose(toda_weights(d).weights.sum(axis=0), 0, atol=1e-15)

    def test_d2_is_q_and_minus_q(self):
        Q = toda_weights(2).weights
        np.testing.assert_allclose(Q[0], -Q[1])
        cone = check_solvability(toda(make_grid([8, 8]), 2)).cone
        assert cone.is_interior
        np.testing.assert_allclose(cone.coefficients / cone.coefficients[0], [1, 1])

    def test_zero_solution(self):
        g = make_grid([8, 8])
        rep = solve(toda(g, 3))
        assert np.max(np.abs(rep.solution)) <= 1e-10

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_residual_is_minus_four_times_toda_system(self, d):
        g = make_grid([16, 16])
        rng = np.random.default_rng(d)
        xi, _ = trig_field(g, rng, d - 1)
        B = trace_zero_basis(d)
        X = (xi @ B.T).reshape(-1, d)  # xi_j in R^d coordinates
        L = dense_laplacian(g.dims, g.lengths)
        ddbar = -0.25 * (L @ X)  # d^2 / dz dzbar
        up = np.exp(np.roll(X, -1, axis=1) - X)  # e^{xi_{j+1} - xi_j}
        down = np.exp(X - np.roll(X, 1, axis=1))  # e^{xi_j - xi_{j-1}}
        system = ddbar + up - down
        res = residual(toda(g, d), xi).reshape(-1, d - 1) @ B.T
        np.testing.assert_allclose(res, -4 * system, atol=1e-12 * (1 + np.abs(system).max()))

    def test_requires_surface(self):
        with pytest.raises(ValueError):
            toda(make_grid([8]), 3)


class TestCyclicHiggs:
    @pytest.mark.parametrize("l", [1, 2, 3, 4])
    def test_r_coefficients(self, l):
        r = TypeARootData(l).r_coefficients()
        np.testing.assert_allclose(r, [i * (l + 1 - i) / 2 for i in range(1, l + 1)], atol=1e-12)

    def test_cartan_matrix(self):
        np.testing.assert_array_equal(TypeARootData(3).cartan_matrix(), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])

    def test_principal_x(self):
        rd = TypeARootData(3)
        x = rd.principal_x()
        np.testing.assert_allclose(rd.coroots() @ x, 1.0)
        assert x.sum() == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("l", [1, 2, 3])
    def test_residual_is_the_higgs_equation(self, l):
        g = make_grid([12, 12])
        rng = np.random.default_rng(l)
        ql_sq = 0.5 + np.random.default_rng(0).uniform(size=g.shape)
        model = cyclic_higgs_A(g, l, ql_sq=ql_sq)
        xi, _ = trig_field(g, rng, l)
        omega = model.omega(xi).reshape(-1, l + 1)
        n = l + 1
        L = dense_laplacian(g.dims, g.lengths)
        r = [i * (n - i) / 2 for i in range(1, n)]
        E = np.eye(n)
        lhs = 2 * (L @ omega)
        for i in range(l):
            alpha = omega[:, i] - omega[:, i + 1]
            lhs += r[i] * np.exp(2 * alpha)[:, None] * (E[i] - E[i + 1])
        delta = omega[:, 0] - omega[:, l]
        lhs += ql_sq.reshape(-1)[:, None] * np.exp(-2 * delta)[:, None] * (E[l] - E[0])
        source = model.problem.w.reshape(-1, l) @ model.basis.T
        res = residual(model.problem, xi).reshape(-1, l) @ model.basis.T
        np.testing.assert_allclose(res, lhs - source, atol=1e-11 * (1 + np.abs(lhs).max()))

    def test_default_mean(self):
        g = make_grid([8, 8])
        model = cyclic_higgs_A(g, 2)
        x = model.basis.T @ TypeARootData(2).principal_x()
        np.testing.assert_allclose(g.integrate(model.problem.w), 4 * np.pi * x, atol=1e-12)

    def test_solvability_defaults(self):
        g = make_grid([8, 8])
        assert check_solvability(cyclic_higgs_A(g, 2).problem).solvable
        assert check_solvability(cyclic_higgs_A(g, 2, mean=np.zeros(2), ql_sq=np.ones(g.shape)).problem).solvable
        # Without the lowest coroot the cone is pointed and 0 is on its boundary.
        assert check_solvability(cyclic_higgs_A(g, 2, mean=np.zeros(2)).problem).cone.cls is ConeClass.BOUNDARY

    def test_rejects_bad_input(self):
        g = make_grid([4, 4])
        with pytest.raises(ValueError):
            cyclic_higgs_A(g, 0)
        with pytest.raises(ValueError):
            cyclic_higgs_A(g, 2, ql_sq=-np.ones(g.shape))
