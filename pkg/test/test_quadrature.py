"""
test/test_quadrature.py

Unit tests for the Dirichlet-weighted simplex rules and the density
normalization checks built on them.
"""

import pytest

from src.dist import NcDirParams, ncdir_density_mixture, ncdir_density_perturbation
from src.errors import DomainError, NonConvergent
from src.quadrature import DirichletStroudRule, integrate_simplex


pytestmark = [
    pytest.mark.dist,
    pytest.mark.unit,
]


# ============== FIXTURES ==============

@pytest.fixture
def flat():
    return (1.0, 1.0, 1.0)


# ============== RULES ==============

class TestDirichletStroudRule:

    @pytest.mark.happy_path
    def test_weights_sum_to_one(self):
        rule = DirichletStroudRule((0.5, 0.6, 0.4), 6)
        assert rule.weights.sum() == pytest.approx(1.0, rel=1e-14)
        assert rule.points.shape == (36, 2)

    @pytest.mark.happy_path
    def test_nodes_inside_simplex(self):
        rule = DirichletStroudRule((0.2, 0.3, 1.6), 10)
        assert (rule.points > 0).all()
        assert (rule.points.sum(axis=1) < 1).all()

    @pytest.mark.happy_path
    @pytest.mark.parametrize("alpha", [(0.5, 0.6, 0.4), (1.7, 3.1, 2.4)])
    def test_low_order_moments_are_exact(self, alpha):
        a1, a2, a3 = alpha
        a_plus = a1 + a2 + a3
        rule = DirichletStroudRule(alpha, 4)
        assert rule.expectation(lambda x: x[0]) == pytest.approx(a1 / a_plus, rel=1e-13)
        assert rule.expectation(lambda x: x[1]) == pytest.approx(a2 / a_plus, rel=1e-13)
        expected = a1 * a2 / (a_plus * (a_plus + 1))
        assert rule.expectation(lambda x: x[0] * x[1]) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.error_handling
    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            DirichletStroudRule((1.0, 0.0, 1.0), 4)
        with pytest.raises(DomainError):
            DirichletStroudRule((1.0, 1.0, 1.0), 0)


class TestIntegrateSimplex:

    @pytest.mark.happy_path
    def test_area(self, flat):
        assert integrate_simplex(lambda x: 1.0, flat).value == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.happy_path
    def test_polynomial(self, flat):
        assert integrate_simplex(lambda x: x[0] * x[1], flat).value == pytest.approx(1 / 24, rel=1e-12)

    @pytest.mark.error_handling
    def test_discontinuous_integrand_does_not_converge(self, flat):
        with pytest.raises(NonConvergent):
            integrate_simplex(lambda x: 1.0 if x[0] > 0.3 else 0.0, flat, tol=1e-14, max_order=16)


@pytest.mark.slow
class TestNormalization:

    @pytest.mark.happy_path
    @pytest.mark.parametrize("density", [ncdir_density_perturbation, ncdir_density_mixture])
    @pytest.mark.parametrize(
        "p",
        [
            NcDirParams((0.5, 0.6, 0.4), (1.7, 6.4, 3.8)),
            NcDirParams((0.2, 0.3, 1.6), (1.3, 5.5, 4.2)),
            NcDirParams((1.0, 1.4, 1.0), (4.8, 1.9, 1.5)),
            NcDirParams((1.7, 3.1, 2.4), (2.9, 3.7, 0.8)),
        ],
    )
    def test_density_integrates_to_one(self, p, density):
        result = integrate_simplex(lambda x: density(p, x), p.alpha)
        assert result.value == pytest.approx(1.0, abs=1e-6)
