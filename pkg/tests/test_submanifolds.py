import math

import numpy as np
import pytest

from igeo import (
    DependentGenerators,
    DomainError,
    FiniteMeasure,
    OutOfDomain,
    SampleSpace,
    SingularGram,
    SingularMetric,
    balanced_linear_build,
    christoffel,
    divergence,
    expectation,
    expfam_build,
    expfam_recover_parameters,
    fisher_matrix,
    geodesic,
    line_path,
    natural_gradient_descent,
    parallel_transport,
    psi,
)
from igeo.divergence_geometry import divergence_batch
from igeo.oracles import christoffel_fd, expfam_christoffel, expfam_moments, random_space
from igeo.submanifolds import ParametricFamily, objective_and_gradient, with_fd_hessian

ALPHAS = [-1.0, -0.5, 0.0, 0.5, 1.0]

# 1 - tanh(1)^2, the variance of +-1 under the tilted two-point law
G_AT_ONE = 0.41997434161402614


@pytest.fixture
def coin(two_point):
    return expfam_build(two_point, [[1.0, -1.0]], lo=[-3.0], hi=[3.0])


def _random_expfam(rng, d, n=None):
    S = random_space(rng, n or d + 3)
    eta = rng.normal(size=(d, S.n))
    eta -= (eta @ S.weights)[:, None]
    return S, eta, expfam_build(S, eta, lo=[-4] * d, hi=[4] * d)


def _fd_divergence(S):
    return lambda al, p, q: divergence_batch(al, S, p, q)


class TestExponentialFamily:
    def test_two_point_log_partition(self, coin):
        for y in (-2.0, 0.0, 0.7):
            assert coin.log_partition([y]) == pytest.approx(math.log(math.cosh(y)), abs=1e-15)
        np.testing.assert_allclose(coin.density([0.0]), 1.0)
        np.testing.assert_allclose(coin.chart_map([0.0]), 1.0)

    def test_log_partition_gradient_at_origin(self, rng):
        S, eta, F = _random_expfam(rng, 3)
        h = 1e-6
        grad = [(F.log_partition(h * e) - F.log_partition(-h * e)) / (2 * h) for e in np.eye(3)]
        np.testing.assert_allclose(grad, 0.0, atol=1e-9)

    def test_density_is_probability(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        assert expectation(S, F.density([1.5, -2.0])) == pytest.approx(1.0, abs=1e-14)

    def test_chart_map_is_balanced_chart(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        y = np.array([0.3, -0.8])
        np.testing.assert_allclose(psi(F.chart_map(y)), F.density(y), rtol=1e-13)

    def test_jacobian_and_hessian_finite_difference(self, rng):
        S, eta, F = _random_expfam(rng, 3)
        y = rng.uniform(-1, 1, 3)
        h = 1e-5
        E = np.eye(3)
        J = np.stack([(F.chart_map(y + h * e) - F.chart_map(y - h * e)) / (2 * h) for e in E], axis=-1)
        np.testing.assert_allclose(F.jacobian(y), J, atol=1e-8)
        H = np.stack([(F.jacobian(y + h * e) - F.jacobian(y - h * e)) / (2 * h) for e in E], axis=-1)
        np.testing.assert_allclose(F.hessian(y), H, atol=1e-8)

    def test_recover_parameters(self, coin, rng):
        assert expfam_recover_parameters(coin, coin.measure([0.0]))[0] == pytest.approx(0.0, abs=1e-15)
        assert expfam_recover_parameters(coin, coin.measure([1.0]))[0] == pytest.approx(1.0, rel=1e-14)
        assert expfam_recover_parameters(coin, coin.measure([2.0]))[0] == pytest.approx(2.0, rel=1e-14)
        S, eta, F = _random_expfam(rng, 3)
        y = rng.uniform(-2, 2, 3)
        np.testing.assert_allclose(F.recover_parameters(F.measure(y)), y, atol=1e-12)

    def test_rejects_bad_statistics(self, two_point, three_point):
        with pytest.raises(DomainError):
            expfam_build(two_point, [[1.0, 0.0]])
        with pytest.raises(SingularGram):
            expfam_build(three_point, [[1.0, 1.0, -1.0], [2.0, 2.0, -2.0]])

    def test_rejects_bad_box(self, two_point):
        with pytest.raises(DomainError):
            expfam_build(two_point, [[1.0, -1.0]], lo=[1.0], hi=[0.0])

    def test_rejects_wrong_parameter_length(self, coin):
        with pytest.raises(DomainError):
            coin.density([0.0, 1.0])


class TestBalancedLinear:
    def test_origin_and_flatness(self, rng):
        S = random_space(rng, 5)
        eta = rng.normal(size=(2, 5))
        F = balanced_linear_build(S, eta)
        np.testing.assert_allclose(F.chart_map([0.0, 0.0]), 0.0)
        np.testing.assert_allclose(F.density([0.0, 0.0]), psi(0.0))
        np.testing.assert_array_equal(F.jacobian([0.1, 0.2]), F.jacobian([-3.0, 5.0]))
        np.testing.assert_array_equal(F.hessian([0.4, 0.1]), 0.0)

    def test_dependent_generators(self, rng):
        S = random_space(rng, 5)
        v = rng.normal(size=5)
        with pytest.raises(DependentGenerators):
            balanced_linear_build(S, [v, 2 * v])

    def test_hessian_term_does_not_matter(self, rng):
        S = random_space(rng, 5)
        F = balanced_linear_build(S, rng.normal(size=(2, 5)))
        y = rng.uniform(-1, 1, 2)
        for al in ALPHAS:
            np.testing.assert_allclose(christoffel(F, y, al).christoffel,
                                       christoffel(F, y, al, include_hessian=False).christoffel)


class TestFisherMatrix:
    def test_two_point_values(self, coin):
        assert fisher_matrix(coin, [0.0])[0, 0] == pytest.approx(1.0, abs=1e-15)
        assert fisher_matrix(coin, [1.0])[0, 0] == pytest.approx(G_AT_ONE, rel=1e-14)
        assert G_AT_ONE == pytest.approx(1 - math.tanh(1.0) ** 2, rel=1e-15)

    def test_covariance(self, rng):
        for d in (1, 2, 4):
            S, eta, F = _random_expfam(rng, d)
            y = rng.uniform(-1, 1, d)
            cov, _ = expfam_moments(S, eta, y)
            np.testing.assert_allclose(fisher_matrix(F, y), cov, atol=1e-10)

    def test_connection_data_invariants(self, rng):
        S, eta, F = _random_expfam(rng, 3)
        con = christoffel(F, rng.uniform(-1, 1, 3), 0.3)
        np.testing.assert_array_equal(con.g, con.g.T)
        np.testing.assert_allclose(con.g @ con.g_inv, np.eye(3), atol=1e-10)
        np.testing.assert_array_equal(con.christoffel, np.swapaxes(con.christoffel, 1, 2))

    def test_singular_metric(self, two_point):
        v = np.array([1.0, -1.0])
        F = ParametricFamily(two_point, 2, lambda y: (y[0] + y[1]) * v, lambda y: np.stack([v, v], axis=1),
                             lambda y: np.zeros((2, 2, 2)))
        with pytest.raises(SingularMetric):
            fisher_matrix(F, [0.0, 0.0])


class TestChristoffel:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_two_point_origin(self, coin, alpha):
        assert christoffel(coin, [0.0], alpha).christoffel[0, 0, 0] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_moment_closed_form(self, rng, alpha):
        for d in (1, 2, 3):
            S, eta, F = _random_expfam(rng, d)
            y = rng.uniform(-1, 1, d)
            np.testing.assert_allclose(christoffel(F, y, alpha).christoffel,
                                       expfam_christoffel(S, eta, y, alpha), atol=1e-8)

    def test_alpha_one_is_flat(self, rng):
        S, eta, F = _random_expfam(rng, 3)
        np.testing.assert_allclose(christoffel(F, rng.uniform(-1, 1, 3), 1.0).christoffel, 0.0, atol=1e-14)

    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0])
    def test_finite_difference_oracle(self, rng, alpha):
        S, eta, F = _random_expfam(rng, 2)
        y = rng.uniform(-1, 1, 2)
        ref = christoffel_fd(F, y, alpha, _fd_divergence(S))
        np.testing.assert_allclose(christoffel(F, y, alpha).christoffel, ref, atol=1e-4)

    def test_second_derivative_term_is_needed(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        y = rng.uniform(-1, 1, 2)
        full = christoffel(F, y, 0.0).christoffel
        partial = christoffel(F, y, 0.0, include_hessian=False).christoffel
        assert np.max(np.abs(full - partial)) > 1e-3

    def test_fd_hessian_wrapper(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        y = rng.uniform(-1, 1, 2)
        approx = with_fd_hessian(F, 1e-4)
        np.testing.assert_allclose(christoffel(approx, y, 0.5).christoffel,
                                   christoffel(F, y, 0.5).christoffel, atol=1e-7)

    def test_missing_hessian(self, coin):
        bare = ParametricFamily(coin.space, 1, coin.chart_map, coin.jacobian)
        with pytest.raises(DomainError):
            christoffel(bare, [0.0], 0.0)


class TestGeodesic:
    def test_alpha_one_is_affine(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        y0, v0 = np.array([0.2, -0.1]), np.array([0.5, 0.3])
        tr = geodesic(F, 1.0, y0, v0, 2.0, 0.02)
        np.testing.assert_allclose(tr.y, y0 + tr.t[:, None] * v0, atol=1e-10)

    def test_zero_velocity(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        tr = geodesic(F, 0.0, [0.1, 0.2], [0.0, 0.0], 1.0, 0.1)
        np.testing.assert_array_equal(tr.y, np.tile([0.1, 0.2], (len(tr.t), 1)))

    def test_grid(self, coin):
        tr = geodesic(coin, 0.0, [0.3], [1.0], 1.0, 0.1)
        assert tr.t[0] == 0.0 and tr.t[-1] == pytest.approx(1.0)
        assert np.all(np.diff(tr.t) > 0)
        assert tr.status == "ok"

    def test_alpha_zero_conserves_speed(self, coin):
        tr = geodesic(coin, 0.0, [0.3], [1.0], 1.0, 0.01)
        np.testing.assert_allclose(tr.energy, tr.energy[0], rtol=1e-7)

    def test_fourth_order_self_convergence(self, coin):
        ends = [geodesic(coin, 0.0, [0.3], [1.0], 1.0, h).y[-1, 0] for h in (0.05, 0.025, 0.0125, 0.00625)]
        ratios = [(ends[i] - ends[i + 1]) / (ends[i + 1] - ends[i + 2]) for i in range(2)]
        for r in ratios:
            assert 3.7 <= math.log2(r) <= 4.3

    def test_leaves_box(self, coin):
        with pytest.raises(OutOfDomain) as info:
            geodesic(coin, 1.0, [0.0], [1.0], 10.0, 0.05)
        tr = info.value.trace
        assert tr.status == "out_of_domain"
        assert np.all(np.abs(tr.y[:-1]) < 3.0)
        assert tr.t[-1] < 10.0


class TestTransport:
    def test_levi_civita_preserves_norm(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        path = line_path([0.1, -0.2], [0.4, 0.3])
        tr = parallel_transport(F, 0.0, path, [1.0, -0.5], 1.0, 1e-3)
        assert np.max(np.abs(tr.norm_sq - tr.norm_sq[0])) <= 1e-8

    def test_zero_vector(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        tr = parallel_transport(F, 0.5, line_path([0.0, 0.0], [1.0, 1.0]), [0.0, 0.0], 1.0, 1e-2)
        np.testing.assert_array_equal(tr.u, 0.0)

    @pytest.mark.parametrize("alpha", [-1.0, 0.5, 1.0])
    def test_dual_pair_conserves_product(self, rng, alpha):
        S, eta, F = _random_expfam(rng, 3)
        path = line_path(rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 3))
        tr = parallel_transport(F, alpha, path, rng.normal(size=3), 1.0, 1e-3, dual_v0=rng.normal(size=3))
        assert np.max(np.abs(tr.product - tr.product[0])) <= 1e-6

    def test_alpha_one_on_expfam_is_constant(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        tr = parallel_transport(F, 1.0, line_path([0.0, 0.0], [0.5, -0.5]), [1.0, 2.0], 1.0, 1e-2)
        np.testing.assert_allclose(tr.u, np.tile([1.0, 2.0], (len(tr.t), 1)), atol=1e-14)

    def test_leaves_box(self, coin):
        with pytest.raises(OutOfDomain) as info:
            parallel_transport(coin, 0.0, line_path([0.0], [1.0]), [1.0], 5.0, 1e-2)
        assert info.value.trace.status == "out_of_domain"


class TestNaturalGradient:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_in_family_target(self, coin, alpha):
        target = coin.measure([0.8])
        tr = natural_gradient_descent(coin, alpha, target, [-1.0])
        assert tr.status == "converged"
        assert tr.y[-1, 0] == pytest.approx(0.8, abs=1e-6)
        assert divergence(alpha, coin.measure(tr.y[-1]), target) <= 1e-12
        assert np.all(np.diff(tr.objective) <= 0)

    def test_start_at_optimum(self, coin):
        tr = natural_gradient_descent(coin, 0.0, coin.measure([0.5]), [0.5])
        assert tr.iterations == 0
        assert tr.status == "converged"

    def test_multidimensional(self, rng):
        S, eta, F = _random_expfam(rng, 3)
        y_star = rng.uniform(-1, 1, 3)
        tr = natural_gradient_descent(F, -1.0, F.measure(y_star), np.zeros(3))
        np.testing.assert_allclose(tr.y[-1], y_star, atol=1e-6)
        assert np.all(np.diff(tr.objective) <= 0)

    def test_gradient_finite_difference(self, rng):
        S, eta, F = _random_expfam(rng, 2)
        target = F.measure([0.4, -0.2])
        y = np.array([-0.3, 0.5])
        f, grad = objective_and_gradient(F, 0.3, y, target)
        h = 1e-6
        fd = [(objective_and_gradient(F, 0.3, y + h * e, target)[0]
               - objective_and_gradient(F, 0.3, y - h * e, target)[0]) / (2 * h) for e in np.eye(2)]
        np.testing.assert_allclose(grad, fd, atol=1e-8)

    def test_initial_point_outside_box(self, coin):
        with pytest.raises(DomainError):
            natural_gradient_descent(coin, 0.0, coin.measure([0.0]), [5.0])

    def test_off_family_target(self):
        S = SampleSpace.uniform(3)
        F = expfam_build(S, [[1.0, -1.0, 0.0]], lo=[-5], hi=[5])
        target = FiniteMeasure(S, [0.9, 0.9, 1.2])
        tr = natural_gradient_descent(F, -1.0, target, [0.5])
        assert tr.status == "converged"
        assert abs(tr.y[-1, 0]) <= 1e-8  # symmetric target projects onto the origin
