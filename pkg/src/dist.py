"""
ncdir.src.dist

Probability building blocks and the Non-central Dirichlet distribution:
Dirichlet density and moments, non-central chi-squared draws, the three
NcDir sampler routes, the mixture and perturbation densities, and the
conditional density given the Poisson total M+.

Vectors follow the usual convention: ``alpha`` and ``lam`` have D+1
entries, points of the simplex have D coordinates.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from scipy.special import gammaln
from scipy.stats import multinomial, poisson

from src.errors import DomainError, SamplingError
from src.specfun import (
    SeriesControl,
    SeriesSum,
    accumulate,
    compositions,
    pochhammer,
    sum_psi2,
)

if TYPE_CHECKING:
    from src.moments import MomentOrder


logger = logging.getLogger(__name__)

MAX_BOUNDARY_RETRIES = 10
MAX_ENUMERATED_TERMS = 10_000
U64_LIMIT = 2**64


# ============== DOMAIN TYPES ==============

@dataclass(frozen=True)
class NcDirParams:
    """
    Parameters of NcDir^D(alpha, lambda).

    Attributes
    ----------
    alpha : tuple of float
        D+1 positive shape parameters.
    lam : tuple of float
        D+1 non-negative non-centrality parameters.
    """

    alpha: Tuple[float, ...]
    lam: Tuple[float, ...]
    alpha_plus: float = field(init=False)
    lambda_plus: float = field(init=False)

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        lam = tuple(float(l) for l in self.lam)
        if len(alpha) != len(lam):
            raise DomainError(
                f"dimension mismatch: alpha has {len(alpha)} entries, lambda has {len(lam)}"
            )
        if len(alpha) < 2:
            raise DomainError(f"need D >= 1, i.e. at least 2 parameters, got {len(alpha)}")
        if not all(math.isfinite(a) and a > 0 for a in alpha):
            raise DomainError(f"every alpha_i must be > 0, got {alpha}")
        if not all(math.isfinite(l) and l >= 0 for l in lam):
            raise DomainError(f"every lambda_i must be >= 0, got {lam}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha_plus", math.fsum(alpha))
        object.__setattr__(self, "lambda_plus", math.fsum(lam))

    @classmethod
    def parse(cls, alpha: str, lam: str) -> "NcDirParams":
        """Build from comma-separated strings such as ``"0.5,0.6,0.4"``."""
        return cls(_parse_floats(alpha, "alpha"), _parse_floats(lam, "lambda"))

    @property
    def D(self) -> int:
        return len(self.alpha) - 1

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha)

    @property
    def lam_array(self) -> np.ndarray:
        return np.asarray(self.lam)

    @property
    def is_central(self) -> bool:
        return self.lambda_plus == 0

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "lambda": list(self.lam)}


def _parse_floats(text: str, name: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise DomainError(f"{name} must be a comma-separated list of numbers, got {text!r}")


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the open unit simplex S^D: 0 < x_i < 1 and sum(x) < 1."""

    x: Tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        if len(x) < 1:
            raise DomainError("a simplex point needs at least one coordinate")
        if not all(0 < v < 1 for v in x):
            raise DomainError(f"simplex coordinates must lie in (0, 1), got {x}")
        if not math.fsum(x) < 1:
            raise DomainError(f"simplex coordinates must sum to < 1, got sum {math.fsum(x)}")
        object.__setattr__(self, "x", x)

    @classmethod
    def of(cls, value: Union["SimplexPoint", Sequence[float], np.ndarray]) -> "SimplexPoint":
        if isinstance(value, SimplexPoint):
            return value
        return cls(tuple(np.ravel(value)))

    @property
    def D(self) -> int:
        return len(self.x)

    @property
    def remainder(self) -> float:
        return 1.0 - math.fsum(self.x)

    @property
    def barycentric(self) -> np.ndarray:
        """The D coordinates followed by the implied last component."""
        return np.append(self.x, self.remainder)


@dataclass(frozen=True)
class MultiPoissonDraw:
    """Independent Poisson counts M_1..M_{D+1} and their total M+."""

    m: Tuple[int, ...]
    m_plus: int = field(init=False)

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        if any(v < 0 for v in m):
            raise DomainError(f"Poisson counts must be >= 0, got {m}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "m_plus", sum(m))


@dataclass(frozen=True)
class RngSeed:
    """
    64-bit master seed.

    Streams are PCG64 generators; independent child streams come from
    ``SeedSequence.spawn`` so every derived stream is reproducible.
    """

    seed: int

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < U64_LIMIT:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def fresh(cls) -> "RngSeed":
        return cls(int(SeedSequence().generate_state(1, np.uint64)[0]))

    def sequence(self) -> SeedSequence:
        return SeedSequence(self.seed)

    def generator(self) -> Generator:
        return Generator(PCG64(self.sequence()))

    def spawn(self, n: int) -> list:
        return [Generator(PCG64(child)) for child in self.sequence().spawn(n)]


def as_generator(rng: Union[Generator, RngSeed, int]) -> Generator:
    if isinstance(rng, Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return RngSeed(rng).generator()


class SamplerRoute(str, Enum):
    DEFINITION = "definition"
    MIXTURE = "mixture"
    REPRESENTATION = "representation"


class DensityForm(str, Enum):
    MIXTURE = "mixture"
    PERTURBATION = "perturbation"


# ============== DIRICHLET ==============

def _log_dirichlet_density(shape: np.ndarray, bary: np.ndarray) -> np.ndarray:
    """Log Dir density for one or many shape rows at barycentric point ``bary``."""
    shape = np.asarray(shape, dtype=float)
    return (
        gammaln(shape.sum(axis=-1))
        - gammaln(shape).sum(axis=-1)
        + ((shape - 1.0) * np.log(bary)).sum(axis=-1)
    )


def _check_point(params_len: int, x) -> SimplexPoint:
    point = SimplexPoint.of(x)
    if point.D + 1 != params_len:
        raise DomainError(
            f"dimension mismatch: {params_len} parameters need a point with "
            f"{params_len - 1} coordinates, got {point.D}"
        )
    return point


def dirichlet_density(params: Sequence[float], x) -> float:
    """Dir^D(x; params) evaluated through log-gamma sums."""
    shape = np.asarray(params, dtype=float)
    if shape.ndim != 1 or len(shape) < 2 or np.any(shape <= 0):
        raise DomainError(f"Dirichlet parameters must be >= 2 positive reals, got {params}")
    point = _check_point(len(shape), x)
    return float(np.exp(_log_dirichlet_density(shape, point.barycentric)))


def _dirichlet_moment(a1: float, a2: float, a_plus: float, r1: int, r2: int) -> float:
    return pochhammer(a1, r1) * pochhammer(a2, r2) / pochhammer(a_plus, r1 + r2)


def dirichlet_mixed_moment(params: Sequence[float], order: "MomentOrder") -> float:
    """E[X_1^r1 X_2^r2] under Dir^2(params)."""
    if len(params) != 3 or any(a <= 0 for a in params):
        raise DomainError(f"bivariate Dirichlet needs 3 positive parameters, got {params}")
    a1, a2, a3 = (float(a) for a in params)
    return _dirichlet_moment(a1, a2, math.fsum((a1, a2, a3)), order.r1, order.r2)


# ============== CHI-SQUARED AND POISSON DRAWS ==============

def _noncentral_chisq_with_counts(g, lam, rng: Generator, size):
    counts = rng.poisson(np.asarray(lam, dtype=float) / 2.0, size)
    draws = rng.gamma(np.asarray(g, dtype=float) / 2.0 + counts, 2.0)
    return draws, counts


def _check_chisq(g: float, lam: float) -> None:
    if not g > 0:
        raise DomainError(f"degrees of freedom must be > 0, got {g}")
    if not lam >= 0:
        raise DomainError(f"non-centrality must be >= 0, got {lam}")


def sample_noncentral_chisq(
    g: float, lam: float, rng: Generator, size: Optional[int] = None
) -> Union[float, np.ndarray]:
    """
    Draw chi'^2_g(lambda) as a Poisson(lambda/2) mixture of central
    chi-squared variables with g + 2M degrees of freedom.
    """
    _check_chisq(g, lam)
    draws, _ = _noncentral_chisq_with_counts(g, lam, rng, size)
    return float(draws) if size is None else draws


def sample_noncentral_chisq_additive(
    g: float, lam: float, rng: Generator, size: Optional[int] = None
) -> Union[float, np.ndarray]:
    """Central chi^2_g plus a sum of M ~ Poisson(lambda/2) chi^2_2 draws."""
    _check_chisq(g, lam)
    n = 1 if size is None else int(size)
    central = rng.chisquare(g, n)
    counts = rng.poisson(lam / 2.0, n)
    exponentials = rng.exponential(2.0, int(counts.sum()))
    owner = np.repeat(np.arange(n), counts)
    draws = central + np.bincount(owner, weights=exponentials, minlength=n)
    return float(draws[0]) if size is None else draws


def sample_multipoisson(
    lam: Sequence[float], rng: Generator, size: Optional[int] = None
) -> Union[MultiPoissonDraw, np.ndarray]:
    """Multi-Poisson(lam / 2) counts; one draw or a (size, D+1) array."""
    rates = np.asarray(lam, dtype=float) / 2.0
    if np.any(rates < 0):
        raise DomainError(f"non-centrality must be >= 0, got {list(lam)}")
    if size is None:
        return MultiPoissonDraw(tuple(rng.poisson(rates)))
    return rng.poisson(rates, (int(size), len(rates)))


# ============== NCDIR SAMPLERS ==============

class DefinitionTrace(NamedTuple):
    x: np.ndarray
    y_plus: np.ndarray
    m_plus: np.ndarray


class RepresentationTrace(NamedTuple):
    x: np.ndarray
    weight: np.ndarray
    m_plus: np.ndarray


def _inside(x: np.ndarray) -> np.ndarray:
    return (x > 0).all(axis=1) & (x < 1).all(axis=1) & (x.sum(axis=1) < 1)


def _draw_inside(draw: Callable[[int], tuple], n: int, max_retries: int) -> tuple:
    """Call ``draw`` and redraw the rows whose point falls on the simplex boundary."""
    arrays = draw(n)
    for attempt in range(1, max_retries + 1):
        bad = ~_inside(arrays[0])
        count = int(bad.sum())
        if count == 0:
            return arrays
        logger.warning(f"[SAMPLE] resampling {count} boundary draw(s), attempt {attempt}")
        fresh = draw(count)
        for target, replacement in zip(arrays, fresh):
            target[bad] = replacement
    if not _inside(arrays[0]).all():
        raise SamplingError(f"boundary draws persisted after {max_retries} retries")
    return arrays


def _dirichlet_rows(shape: np.ndarray, rng: Generator) -> np.ndarray:
    """Row-wise Dirichlet draws by normalized gammas; zero shapes give exact zeros."""
    positive = shape > 0
    gammas = np.where(positive, rng.gamma(np.where(positive, shape, 1.0)), 0.0)
    totals = gammas.sum(axis=1, keepdims=True)
    return np.divide(gammas, totals, out=np.zeros_like(gammas), where=totals > 0)


def _definition_draws(p: NcDirParams, rng: Generator, n: int) -> tuple:
    # column i is chi'^2_{2 alpha_i}(lambda_i)
    y, counts = _noncentral_chisq_with_counts(
        2.0 * p.alpha_array, p.lam_array, rng, (n, p.D + 1)
    )
    y_plus = y.sum(axis=1)
    return y[:, : p.D] / y_plus[:, None], y_plus, counts.sum(axis=1)


def _mixture_draws(p: NcDirParams, rng: Generator, n: int) -> tuple:
    counts = sample_multipoisson(p.lam, rng, n)
    return (_dirichlet_rows(p.alpha_array + counts, rng)[:, : p.D],)


def _representation_draws(p: NcDirParams, rng: Generator, n: int) -> tuple:
    counts = sample_multipoisson(p.lam, rng, n)
    m_plus = counts.sum(axis=1)
    central = _dirichlet_rows(np.broadcast_to(p.alpha_array, counts.shape), rng)
    # Beta(alpha+, 0) is the point mass at 1
    weight = rng.beta(p.alpha_plus, np.where(m_plus > 0, m_plus, 1))
    weight = np.where(m_plus > 0, weight, 1.0)
    pure = _dirichlet_rows(counts.astype(float), rng)
    x = weight[:, None] * central[:, : p.D] + (1.0 - weight)[:, None] * pure[:, : p.D]
    return x, weight, m_plus


def _sample(draws, p: NcDirParams, rng, size, max_retries):
    rng = as_generator(rng)
    n = 1 if size is None else int(size)
    if n < 1:
        raise DomainError(f"size must be >= 1, got {size}")
    x = _draw_inside(lambda k: draws(p, rng, k), n, max_retries)[0]
    return SimplexPoint(tuple(x[0])) if size is None else x


def sample_ncdir_definition(
    p: NcDirParams, rng, size: Optional[int] = None, max_retries: int = MAX_BOUNDARY_RETRIES
):
    """NcDir draws as normalized independent non-central chi-squared variables."""
    return _sample(_definition_draws, p, rng, size, max_retries)


def sample_ncdir_mixture(
    p: NcDirParams, rng, size: Optional[int] = None, max_retries: int = MAX_BOUNDARY_RETRIES
):
    """NcDir draws as Dir(alpha + M) with M ~ Multi-Poisson(lambda / 2)."""
    return _sample(_mixture_draws, p, rng, size, max_retries)


def sample_ncdir_representation(
    p: NcDirParams, rng, size: Optional[int] = None, max_retries: int = MAX_BOUNDARY_RETRIES
):
    """
    NcDir draws as the random convex combination W X + (1 - W) X_pnc.

    X ~ Dir(alpha), W | M+ ~ Beta(alpha+, M+) (W = 1 when M+ = 0) and
    X_pnc | M ~ Dir(M), where coordinates with M_i = 0 are exactly 0.
    """
    return _sample(_representation_draws, p, rng, size, max_retries)


SAMPLERS = {
    SamplerRoute.DEFINITION: sample_ncdir_definition,
    SamplerRoute.MIXTURE: sample_ncdir_mixture,
    SamplerRoute.REPRESENTATION: sample_ncdir_representation,
}


def sample_ncdir(p: NcDirParams, rng, size: Optional[int] = None, route=SamplerRoute.DEFINITION):
    return SAMPLERS[SamplerRoute(route)](p, rng, size)


def trace_ncdir_definition(
    p: NcDirParams, rng, size: int, max_retries: int = MAX_BOUNDARY_RETRIES
) -> DefinitionTrace:
    """Definition sampler exposing Y'+ and M+ alongside each draw."""
    rng = as_generator(rng)
    return DefinitionTrace(*_draw_inside(lambda k: _definition_draws(p, rng, k), size, max_retries))


def trace_ncdir_representation(
    p: NcDirParams, rng, size: int, max_retries: int = MAX_BOUNDARY_RETRIES
) -> RepresentationTrace:
    """Representation sampler exposing the weight W and M+ alongside each draw."""
    rng = as_generator(rng)
    return RepresentationTrace(
        *_draw_inside(lambda k: _representation_draws(p, rng, k), size, max_retries)
    )


# ============== NCDIR DENSITIES ==============

def _mixture_layers(p: NcDirParams, bary: np.ndarray):
    active = np.flatnonzero(p.lam_array > 0)
    rates = p.lam_array[active] / 2.0
    if active.size == 0:
        yield float(np.exp(_log_dirichlet_density(p.alpha_array, bary)))
        return
    n = 0
    while True:
        comps = compositions(n, active.size)
        shape = np.tile(p.alpha_array, (len(comps), 1))
        shape[:, active] += comps
        log_terms = poisson.logpmf(comps, rates).sum(axis=1) + _log_dirichlet_density(shape, bary)
        yield float(np.exp(log_terms).sum())
        n += 1


def sum_ncdir_density_mixture(
    p: NcDirParams, x, ctl: SeriesControl = SeriesControl()
) -> SeriesSum:
    point = _check_point(p.D + 1, x)
    return accumulate(
        _mixture_layers(p, point.barycentric),
        ctl,
        "NcDir mixture density",
        hint="large non-centrality may need a larger max_terms",
    )


def ncdir_density_mixture(p: NcDirParams, x, ctl: SeriesControl = SeriesControl()) -> float:
    """Multi-Poisson weighted series of Dir(alpha + j) densities, by total degree of j."""
    return sum_ncdir_density_mixture(p, x, ctl).value


def sum_ncdir_density_perturbation(
    p: NcDirParams, x, ctl: SeriesControl = SeriesControl()
) -> SeriesSum:
    point = _check_point(p.D + 1, x)
    arguments = p.lam_array * point.barycentric / 2.0
    psi = sum_psi2(p.alpha_plus, p.alpha, arguments, ctl)
    central = dirichlet_density(p.alpha, point)
    return SeriesSum(central * math.exp(-p.lambda_plus / 2.0) * psi.value, psi.terms)


def ncdir_density_perturbation(p: NcDirParams, x, ctl: SeriesControl = SeriesControl()) -> float:
    """Dir(x; alpha) e^{-lambda+/2} Psi_2^(D+1)[alpha+; alpha; lambda_i x_i / 2]."""
    return sum_ncdir_density_perturbation(p, x, ctl).value


def ncdir_density(
    p: NcDirParams, x, form=DensityForm.PERTURBATION, ctl: SeriesControl = SeriesControl()
) -> SeriesSum:
    if DensityForm(form) is DensityForm.MIXTURE:
        return sum_ncdir_density_mixture(p, x, ctl)
    return sum_ncdir_density_perturbation(p, x, ctl)


# ============== CONDITIONING ON M+ ==============

def multipoisson_conditional_pmf(lam: Sequence[float], j: Sequence[int], m_plus: int) -> float:
    """
    P((M_1..M_D) = j | M+ = m_plus), i.e. the Multinomial^D(m_plus, lambda_i / lambda+)
    mass at j.
    """
    lam = np.asarray(lam, dtype=float)
    j = np.asarray(j, dtype=int)
    lambda_plus = math.fsum(lam)
    if not lambda_plus > 0:
        raise DomainError("conditioning on M+ needs lambda+ > 0")
    if len(j) != len(lam) - 1:
        raise DomainError(f"j needs {len(lam) - 1} entries, got {len(j)}")
    if np.any(j < 0) or int(j.sum()) > m_plus:
        raise DomainError(f"j must be non-negative with j+ <= m_plus={m_plus}, got {j.tolist()}")
    counts = np.append(j, m_plus - int(j.sum()))
    return float(multinomial.pmf(counts, m_plus, lam / lambda_plus))


def ncdir_conditional_density_mplus(p: NcDirParams, x, m_plus: int) -> float:
    """
    Density of X' given M+ = m_plus: a finite Multinomial mixture of
    Dir(alpha_1 + j_1, ..., alpha_D + j_D, alpha_{D+1} + m_plus - j+) densities.
    """
    point = _check_point(p.D + 1, x)
    if int(m_plus) != m_plus or m_plus < 0:
        raise DomainError(f"m_plus must be a non-negative integer, got {m_plus}")
    m_plus = int(m_plus)
    if p.is_central and m_plus > 0:
        raise DomainError("M+ > 0 has probability zero when lambda+ = 0")
    if m_plus == 0:
        return dirichlet_density(p.alpha, point)
    cells = math.comb(m_plus + p.D, p.D)
    if cells > MAX_ENUMERATED_TERMS:
        raise DomainError(
            f"conditional density would enumerate {cells} terms (cap {MAX_ENUMERATED_TERMS})"
        )
    comps = compositions(m_plus, p.D + 1)
    log_weights = multinomial.logpmf(comps, m_plus, p.lam_array / p.lambda_plus)
    log_dirichlet = _log_dirichlet_density(p.alpha_array + comps, point.barycentric)
    return float(np.exp(log_weights + log_dirichlet).sum())


# ============== MARGINALS ==============

def marginal_2d(p: NcDirParams, i: int, j: int) -> NcDirParams:
    """
    Parameters of the bivariate marginal (X'_i, X'_j).

    Indices are the 1-based coordinate labels 1..D.
    """
    if p.D < 2:
        raise DomainError(f"a bivariate marginal needs D >= 2, got D={p.D}")
    for index in (i, j):
        if not 1 <= index <= p.D:
            raise IndexError(f"coordinate index must lie in 1..{p.D}, got {index}")
    if i == j:
        raise DomainError(f"marginal indices must differ, got i=j={i}")
    rest = [k for k in range(p.D + 1) if k not in (i - 1, j - 1)]
    return NcDirParams(
        (p.alpha[i - 1], p.alpha[j - 1], math.fsum(p.alpha[k] for k in rest)),
        (p.lam[i - 1], p.lam[j - 1], math.fsum(p.lam[k] for k in rest)),
    )
