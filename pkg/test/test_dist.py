"""
test/test_dist.py

Unit and seeded statistical tests for the Dirichlet helpers, the NcDir
samplers, the density forms and the conditional density given M+.
"""

import math

import numpy as np
import pytest
from scipy import stats

from src.dist import (
    MultiPoissonDraw,
    NcDirParams,
    RngSeed,
    SimplexPoint,
    dirichlet_density,
    dirichlet_mixed_moment,
    marginal_2d,
    multipoisson_conditional_pmf,
    ncdir_conditional_density_mplus,
    ncdir_density,
    ncdir_density_mixture,
    ncdir_density_perturbation,
    sample_multipoisson,
    sample_ncdir_definition,
    sample_ncdir_mixture,
    sample_ncdir_representation,
    sample_noncentral_chisq,
    sample_noncentral_chisq_additive,
    trace_ncdir_definition,
    trace_ncdir_representation,
)
from src.errors import DomainError, SamplingError
from src.moments import MomentOrder, moment_finite_sum


pytestmark = [
    pytest.mark.dist,
    pytest.mark.unit,
]

SAMPLERS = [sample_ncdir_definition, sample_ncdir_mixture, sample_ncdir_representation]

REFERENCE_ROWS = [
    NcDirParams((0.5, 0.6, 0.4), (1.7, 6.4, 3.8)),
    NcDirParams((0.2, 0.3, 1.6), (1.3, 5.5, 4.2)),
    NcDirParams((1.0, 1.4, 1.0), (4.8, 1.9, 1.5)),
    NcDirParams((1.7, 3.1, 2.4), (2.9, 3.7, 0.8)),
]

# every KS comparison in this module shares one family-wise level
KS_LEVEL = 0.01 / 30


# ============== FIXTURES ==============

@pytest.fixture
def row1():
    return NcDirParams((0.5, 0.6, 0.4), (1.7, 6.4, 3.8))


@pytest.fixture
def row3():
    return NcDirParams((1.0, 1.4, 1.0), (4.8, 1.9, 1.5))


@pytest.fixture
def central():
    return NcDirParams((1.0, 1.0, 1.0), (0.0, 0.0, 0.0))


@pytest.fixture
def trivariate():
    return NcDirParams((0.8, 1.2, 0.5, 1.5), (2.0, 0.0, 3.0, 1.0))


@pytest.fixture
def grid():
    """Interior points (i/9, j/9) of the 2-simplex."""
    return [(i / 9, j / 9) for i in range(1, 8) for j in range(1, 8) if i + j <= 8]


# ============== DOMAIN TYPES ==============

class TestNcDirParams:

    @pytest.mark.happy_path
    def test_derived_fields(self, row1):
        assert row1.D == 2
        assert row1.alpha_plus == pytest.approx(1.5)
        assert row1.lambda_plus == pytest.approx(11.9)
        assert not row1.is_central

    @pytest.mark.happy_path
    def test_parse(self):
        p = NcDirParams.parse("1,1,1", "0,0,0")
        assert p.alpha == (1.0, 1.0, 1.0)
        assert p.is_central

    @pytest.mark.error_handling
    def test_dimension_mismatch(self):
        with pytest.raises(DomainError, match="dimension mismatch"):
            NcDirParams.parse("1,1", "0,0,0")

    @pytest.mark.error_handling
    @pytest.mark.parametrize(
        "alpha,lam",
        [((1.0, 0.0), (0.0, 0.0)), ((1.0, 1.0), (-0.1, 0.0)), ((1.0,), (0.0,)), ((1.0, math.nan), (0, 0))],
    )
    def test_invalid_values(self, alpha, lam):
        with pytest.raises(DomainError):
            NcDirParams(alpha, lam)

    @pytest.mark.error_handling
    def test_unparseable_text(self):
        with pytest.raises(DomainError):
            NcDirParams.parse("1,a,1", "0,0,0")


class TestSimplexPoint:

    @pytest.mark.happy_path
    def test_barycentric_completion(self):
        point = SimplexPoint((0.2, 0.3))
        assert point.D == 2
        np.testing.assert_allclose(point.barycentric, [0.2, 0.3, 0.5])

    @pytest.mark.error_handling
    @pytest.mark.parametrize("x", [(0.6, 0.6), (0.0, 0.3), (-0.1, 0.3), (0.5, 0.5), ()])
    def test_outside_open_simplex(self, x):
        with pytest.raises(DomainError):
            SimplexPoint(x)


class TestSeeds:

    @pytest.mark.happy_path
    def test_same_seed_same_stream(self):
        a = RngSeed(42).generator().random(5)
        b = RngSeed(42).generator().random(5)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.happy_path
    def test_spawned_streams_differ(self):
        first, second = RngSeed(42).spawn(2)
        assert not np.array_equal(first.random(5), second.random(5))

    @pytest.mark.error_handling
    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5])
    def test_out_of_range(self, seed):
        with pytest.raises(DomainError):
            RngSeed(seed)


# ============== DIRICHLET ==============

class TestDirichlet:

    @pytest.mark.happy_path
    def test_flat_density(self):
        assert dirichlet_density((1.0, 1.0, 1.0), (0.2, 0.3)) == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.happy_path
    def test_density_matches_formula(self):
        alpha, x = (0.5, 0.6, 0.4), (0.25, 0.5)
        bary = (0.25, 0.5, 0.25)
        expected = math.gamma(1.5) / math.prod(math.gamma(a) for a in alpha) * math.prod(
            v ** (a - 1) for v, a in zip(bary, alpha)
        )
        assert dirichlet_density(alpha, x) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.happy_path
    def test_mixed_moment(self):
        assert dirichlet_mixed_moment((1.0, 1.0, 1.0), MomentOrder(1, 1)) == pytest.approx(1 / 12)
        assert dirichlet_mixed_moment((2.0, 3.0, 1.0), MomentOrder(0, 0)) == 1.0

    @pytest.mark.error_handling
    def test_point_dimension_mismatch(self):
        with pytest.raises(DomainError, match="dimension mismatch"):
            dirichlet_density((1.0, 1.0, 1.0), (0.2, 0.3, 0.1))


# ============== DENSITIES ==============

class TestDensities:

    @pytest.mark.happy_path
    def test_central_case_is_dirichlet(self, central):
        for form in ("mixture", "perturbation"):
            assert ncdir_density(central, (0.2, 0.3), form).value == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.happy_path
    @pytest.mark.parametrize("p", REFERENCE_ROWS)
    def test_forms_agree_on_grid(self, p, grid):
        assert len(grid) == 28
        for x in grid:
            mixture = ncdir_density_mixture(p, x)
            perturbation = ncdir_density_perturbation(p, x)
            assert mixture == pytest.approx(perturbation, rel=1e-10)

    @pytest.mark.happy_path
    @pytest.mark.slow
    @pytest.mark.parametrize("lambda_plus", [100.0, 300.0])
    def test_forms_agree_at_large_noncentrality(self, lambda_plus):
        p = NcDirParams((1.0, 1.4, 1.0), (lambda_plus / 3,) * 3)
        x = (0.3, 0.3)
        perturbation = ncdir_density_perturbation(p, x)
        assert math.isfinite(perturbation)
        assert perturbation == pytest.approx(ncdir_density_mixture(p, x), rel=1e-8)

    @pytest.mark.edge_case
    def test_perturbation_form_finite_at_very_large_noncentrality(self):
        p = NcDirParams((1.0, 1.4, 1.0), (200.0, 200.0, 200.0))
        value = ncdir_density_perturbation(p, (0.3, 0.3))
        assert math.isfinite(value) and value > 0

    @pytest.mark.happy_path
    def test_forms_agree_with_zero_noncentrality_component(self):
        p = NcDirParams((1.0, 1.4, 1.0), (4.8, 0.0, 1.5))
        x = (0.3, 0.25)
        assert ncdir_density_mixture(p, x) == pytest.approx(ncdir_density_perturbation(p, x), rel=1e-10)

    @pytest.mark.happy_path
    def test_trivariate_forms_agree(self, trivariate):
        x = (0.2, 0.3, 0.1)
        assert ncdir_density_mixture(trivariate, x) == pytest.approx(
            ncdir_density_perturbation(trivariate, x), rel=1e-10
        )

    @pytest.mark.happy_path
    def test_density_reports_terms(self, row1):
        result = ncdir_density(row1, (0.25, 0.5), "perturbation")
        assert result.value > 0
        assert result.terms > 1

    @pytest.mark.error_handling
    def test_point_outside_simplex(self, row1):
        with pytest.raises(DomainError):
            ncdir_density(row1, (0.6, 0.6))


class TestConditionalDensity:

    @pytest.mark.happy_path
    def test_zero_total_is_central_dirichlet(self, row1):
        x = (0.25, 0.5)
        assert ncdir_conditional_density_mplus(row1, x, 0) == pytest.approx(
            dirichlet_density(row1.alpha, x), rel=1e-14
        )

    @pytest.mark.happy_path
    @pytest.mark.parametrize("p", REFERENCE_ROWS)
    def test_poisson_mixture_of_conditionals_is_the_density(self, p):
        weights = stats.poisson.pmf(np.arange(46), p.lambda_plus / 2)
        for x in [(0.25, 0.5), (0.1, 0.2), (0.6, 0.3), (0.3, 0.3), (0.05, 0.85)]:
            total = math.fsum(
                w * ncdir_conditional_density_mplus(p, x, m) for m, w in enumerate(weights)
            )
            assert total == pytest.approx(ncdir_density_mixture(p, x), rel=1e-8)

    @pytest.mark.happy_path
    def test_conditional_density_by_explicit_enumeration(self, row1):
        x, m = (0.3, 0.3), 2
        bary = np.array([0.3, 0.3, 0.4])
        probs = np.array(row1.lam) / row1.lambda_plus
        cells = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        expected = 0.0
        for j1, j2 in cells:
            counts = (j1, j2, m - j1 - j2)
            weight = math.factorial(m) / math.prod(math.factorial(c) for c in counts)
            weight *= math.prod(q**c for q, c in zip(probs, counts))
            expected += weight * stats.dirichlet.pdf(bary, np.array(row1.alpha) + counts)
        assert ncdir_conditional_density_mplus(row1, x, m) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.happy_path
    def test_conditional_pmf_values(self):
        assert multipoisson_conditional_pmf((1.0, 1.0, 2.0), (1, 1), 2) == pytest.approx(0.125, rel=1e-14)
        assert multipoisson_conditional_pmf((1.7, 6.4, 3.8), (0, 0), 0) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.happy_path
    @pytest.mark.parametrize("lam,m", [((1.7, 6.4, 3.8), 4), ((2.9, 3.7, 0.8), 5)])
    def test_conditional_pmf_sums_to_one(self, lam, m):
        total = math.fsum(
            multipoisson_conditional_pmf(lam, (j1, j2), m)
            for j1 in range(m + 1)
            for j2 in range(m + 1 - j1)
        )
        assert total == pytest.approx(1.0, rel=1e-13)

    @pytest.mark.error_handling
    def test_enumeration_cap(self, row1):
        with pytest.raises(DomainError, match="cap"):
            ncdir_conditional_density_mplus(row1, (0.25, 0.5), 200)

    @pytest.mark.error_handling
    def test_positive_total_impossible_when_central(self, central):
        with pytest.raises(DomainError):
            ncdir_conditional_density_mplus(central, (0.25, 0.5), 1)

    @pytest.mark.error_handling
    def test_conditional_pmf_needs_noncentrality(self):
        with pytest.raises(DomainError):
            multipoisson_conditional_pmf((0.0, 0.0, 0.0), (0, 0), 0)
        with pytest.raises(DomainError):
            multipoisson_conditional_pmf((1.0, 1.0, 1.0), (3, 2), 4)


class TestMarginal:

    @pytest.mark.happy_path
    def test_collapses_remaining_coordinates(self, trivariate):
        m = marginal_2d(trivariate, 1, 3)
        assert m.alpha == (0.8, 0.5, pytest.approx(2.7))
        assert m.lam == (2.0, 3.0, pytest.approx(1.0))

    @pytest.mark.edge_case
    def test_bivariate_identity(self, row1):
        assert marginal_2d(row1, 1, 2) == row1

    @pytest.mark.error_handling
    def test_index_out_of_range(self, trivariate):
        with pytest.raises(IndexError):
            marginal_2d(trivariate, 0, 2)
        with pytest.raises(IndexError):
            marginal_2d(trivariate, 1, 4)

    @pytest.mark.error_handling
    def test_equal_indices(self, trivariate):
        with pytest.raises(DomainError):
            marginal_2d(trivariate, 2, 2)


# ============== SAMPLERS ==============

class TestSamplerContract:

    @pytest.mark.happy_path
    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_single_draw_is_simplex_point(self, sampler, row1):
        assert isinstance(sampler(row1, RngSeed(1).generator()), SimplexPoint)

    @pytest.mark.happy_path
    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_draws_stay_inside_open_simplex(self, sampler, row1, trivariate):
        for p in (row1, trivariate):
            x = sampler(p, RngSeed(3).generator(), size=5000)
            assert x.shape == (5000, p.D)
            assert (x > 0).all() and (x < 1).all()
            assert (x.sum(axis=1) < 1).all()

    @pytest.mark.happy_path
    @pytest.mark.parametrize("sampler", SAMPLERS)
    def test_seeded_draws_are_reproducible(self, sampler, row1):
        a = sampler(row1, RngSeed(7).generator(), size=100)
        b = sampler(row1, RngSeed(7).generator(), size=100)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.error_handling
    def test_boundary_retries_exhausted(self):
        p = NcDirParams((0.01, 0.01, 0.01), (0.0, 0.0, 0.0))
        with pytest.raises(SamplingError):
            sample_ncdir_definition(p, RngSeed(5).generator(), size=10_000, max_retries=0)

    @pytest.mark.error_handling
    def test_invalid_size(self, row1):
        with pytest.raises(DomainError):
            sample_ncdir_definition(row1, RngSeed(1).generator(), size=0)

    @pytest.mark.happy_path
    def test_multipoisson_single_and_batch(self):
        draw = sample_multipoisson((1.0, 2.0, 3.0), RngSeed(1).generator())
        assert isinstance(draw, MultiPoissonDraw)
        assert draw.m_plus == sum(draw.m)
        batch = sample_multipoisson((1.0, 2.0, 3.0), RngSeed(1).generator(), size=10)
        assert batch.shape == (10, 3)


@pytest.mark.statistical
class TestSamplerDistributions:

    @pytest.mark.happy_path
    @pytest.mark.slow
    @pytest.mark.parametrize("p", REFERENCE_ROWS)
    def test_routes_agree_in_distribution(self, p):
        n = 100_000
        draws = [
            sampler(p, RngSeed(11 + i).generator(), size=n) for i, sampler in enumerate(SAMPLERS)
        ]
        for i, j in ((0, 1), (0, 2), (1, 2)):
            for k in range(p.D):
                assert stats.ks_2samp(draws[i][:, k], draws[j][:, k]).pvalue > KS_LEVEL

    @pytest.mark.happy_path
    def test_central_case_matches_dirichlet(self):
        p = NcDirParams((0.5, 0.6, 0.4), (0.0, 0.0, 0.0))
        n = 20_000
        ours = sample_ncdir_definition(p, RngSeed(21).generator(), size=n)
        reference = RngSeed(22).generator().dirichlet(p.alpha, size=n)
        assert stats.ks_2samp(ours[:, 0], reference[:, 0]).pvalue > KS_LEVEL

    @pytest.mark.happy_path
    @pytest.mark.parametrize("route", SAMPLERS)
    def test_first_moments_match_finite_sum(self, route, row1):
        n = 50_000
        x = route(row1, RngSeed(31).generator(), size=n)
        for k, order in enumerate((MomentOrder(1, 0), MomentOrder(0, 1))):
            mu = moment_finite_sum(row1, order).value
            se = x[:, k].std(ddof=1) / math.sqrt(n)
            assert abs(x[:, k].mean() - mu) < 4 * se

    @pytest.mark.happy_path
    def test_noncentral_chisq_constructions_agree(self):
        rng = RngSeed(41).generator()
        g, lam, n = 3.0, 5.0, 20_000
        mixture = sample_noncentral_chisq(g, lam, rng, size=n)
        additive = sample_noncentral_chisq_additive(g, lam, rng, size=n)
        reference = rng.noncentral_chisquare(g, lam, size=n)
        assert stats.ks_2samp(mixture, additive).pvalue > KS_LEVEL
        assert stats.ks_2samp(mixture, reference).pvalue > KS_LEVEL
        se = math.sqrt(2 * (g + 2 * lam) / n)
        assert abs(mixture.mean() - (g + lam)) < 4 * se

    @pytest.mark.edge_case
    def test_noncentral_chisq_scalar_draw(self):
        value = sample_noncentral_chisq(2.0, 0.0, RngSeed(1).generator())
        assert isinstance(value, float) and value > 0
        with pytest.raises(DomainError):
            sample_noncentral_chisq(0.0, 1.0, RngSeed(1).generator())

    @pytest.mark.happy_path
    def test_direction_independent_of_total_given_count(self, row1):
        trace = trace_ncdir_definition(row1, RngSeed(51).generator(), size=200_000)
        for m in (4, 6, 8):
            mask = trace.m_plus == m
            n_m = int(mask.sum())
            r = np.corrcoef(trace.x[mask, 0], trace.y_plus[mask])[0, 1]
            assert abs(r) < 4 / math.sqrt(n_m)

    @pytest.mark.happy_path
    def test_representation_weight_is_beta(self, row1):
        trace = trace_ncdir_representation(row1, RngSeed(61).generator(), size=200_000)
        assert (trace.weight[trace.m_plus == 0] == 1.0).all()
        for m in (1, 2, 3):
            w = trace.weight[trace.m_plus == m]
            beta = stats.beta(row1.alpha_plus, m)
            assert stats.kstest(w, beta.cdf).pvalue > KS_LEVEL
            se = beta.std() / math.sqrt(len(w))
            assert abs(w.mean() - row1.alpha_plus / (row1.alpha_plus + m)) < 4 * se

    @pytest.mark.happy_path
    def test_direction_independent_of_total_at_small_noncentrality(self):
        p = NcDirParams((1.0, 1.4, 1.0), (0.8, 0.6, 0.6))
        trace = trace_ncdir_definition(p, RngSeed(71).generator(), size=600_000)
        for m in (0, 1, 2):
            mask = trace.m_plus == m
            n_m = int(mask.sum())
            for k in range(p.D):
                r = np.corrcoef(trace.x[mask, k], trace.y_plus[mask])[0, 1]
                assert abs(r) < 4 / math.sqrt(n_m)
