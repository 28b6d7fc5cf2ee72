"""
ncdir.src.moments

Product moments E[X'_1^r1 X'_2^r2] of the bivariate Non-central Dirichlet
distribution NcDir^2(alpha, lambda).

Five analytic evaluators are provided:

- ``moment_definition_series``: the Poisson-weighted series of Dirichlet
  moments, summed by total Poisson degree.
- ``moment_hypergeo_series``: the double series over (j3, j2) with an
  inner 2F2 in lambda_1 / 2.
- ``moment_finite_sum``: a finite double sum over j1 <= r1, j2 <= r2 of
  1F1(alpha+ + j+; alpha+ + r+ + j+; lambda+ / 2) terms.
- ``moment_11_three_f`` and ``moment_11_reduced``: the (1,1) moment as
  three Kummer functions, or as two after a contiguous-relation reduction.

``moment_mc`` and ``descriptive_moment`` give Monte Carlo estimates.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.stats import poisson

from src.dist import (
    NcDirParams,
    _dirichlet_moment,
    as_generator,
    sample_ncdir_definition,
)
from src.errors import DomainError
from src.specfun import (
    DIRECT_PRODUCT_MAX,
    SeriesControl,
    accumulate,
    compositions,
    log_pochhammer,
    pochhammer,
    rising,
    sum_pfq,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class MomentOrder:
    """Non-negative integer exponents (r1, r2) of a product moment."""

    r1: int
    r2: int

    def __post_init__(self):
        for name, r in (("r1", self.r1), ("r2", self.r2)):
            if int(r) != r or r < 0:
                raise DomainError(f"moment order {name} must be an integer >= 0, got {r}")
        object.__setattr__(self, "r1", int(self.r1))
        object.__setattr__(self, "r2", int(self.r2))

    @classmethod
    def parse(cls, text: str) -> "MomentOrder":
        """Parse ``"r1,r2"``."""
        parts = text.split(",")
        if len(parts) != 2:
            raise DomainError(f"moment order must look like 'r1,r2', got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError:
            raise DomainError(f"moment order must be two integers, got {text!r}")

    @property
    def r_plus(self) -> int:
        return self.r1 + self.r2

    def __str__(self) -> str:
        return f"({self.r1},{self.r2})"


class MomentMethod(str, Enum):
    DEFINITION_SERIES = "definition"
    HYPERGEO_SERIES = "series"
    FINITE_SUM = "finite"
    CLOSED_11 = "closed11"
    CLOSED_11_REDUCED = "closed11-reduced"


@dataclass(frozen=True)
class MomentResult:
    value: float
    method: MomentMethod
    terms_evaluated: int
    converged: bool = True

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            logger.warning(
                f"{self.method.value} moment {self.value!r} lies outside [0, 1]; "
                "tighten rel_tol or raise max_terms"
            )


def _bivariate(p: NcDirParams) -> Tuple[float, float, float, float, float, float]:
    if p.D != 2:
        raise DomainError(f"product moments are defined for D = 2, got D = {p.D}")
    a1, a2, _ = p.alpha
    l1, l2, l3 = p.lam
    return a1, a2, p.alpha_plus, l1 / 2.0, l2 / 2.0, l3 / 2.0


def _poch_ratio(a: float, b: float, l: int) -> float:
    """(a)_l / (b)_l."""
    if l > DIRECT_PRODUCT_MAX:
        return math.exp(log_pochhammer(a, l) - log_pochhammer(b, l))
    return pochhammer(a, l) / pochhammer(b, l)


def _prefactor(a1: float, a2: float, a_plus: float, order: MomentOrder) -> float:
    if order.r_plus > DIRECT_PRODUCT_MAX:
        return math.exp(
            log_pochhammer(a1, order.r1)
            + log_pochhammer(a2, order.r2)
            - log_pochhammer(a_plus, order.r_plus)
        )
    return _dirichlet_moment(a1, a2, a_plus, order.r1, order.r2)


# ============== ANALYTIC EVALUATORS ==============

def moment_definition_series(
    p: NcDirParams, order: MomentOrder, ctl: SeriesControl = SeriesControl()
) -> MomentResult:
    """
    Sum over j of P(M = j) (a1 + j1)_{r1} (a2 + j2)_{r2} / (a+ + j+)_{r+},
    grouped by total degree j+. Coordinates with lambda_i = 0 are skipped.
    """
    a1, a2, a_plus, *_ = _bivariate(p)
    active = np.flatnonzero(p.lam_array > 0)
    rates = p.lam_array[active] / 2.0
    cells = [0]

    def layers():
        if active.size == 0:
            cells[0] += 1
            yield _dirichlet_moment(a1, a2, a_plus, order.r1, order.r2)
            return
        n = 0
        while True:
            comps = compositions(n, active.size)
            j = np.zeros((len(comps), 3), dtype=np.int64)
            j[:, active] = comps
            weights = np.exp(poisson.logpmf(comps, rates).sum(axis=1))
            values = (
                rising(a1 + j[:, 0], order.r1)
                * rising(a2 + j[:, 1], order.r2)
                / pochhammer(a_plus + n, order.r_plus)
            )
            cells[0] += len(comps)
            yield float(np.dot(weights, values))
            n += 1

    total = accumulate(layers(), ctl, f"definition series {order}")
    return MomentResult(total.value, MomentMethod.DEFINITION_SERIES, cells[0])


def moment_hypergeo_series(
    p: NcDirParams, order: MomentOrder, ctl: SeriesControl = SeriesControl()
) -> MomentResult:
    """Double series in (j3, j2) with an inner 2F2 in lambda_1 / 2."""
    a1, a2, a_plus, h1, h2, h3 = _bivariate(p)
    r1, r2, r_plus = order.r1, order.r2, order.r_plus
    work = [0]

    def inner(j3: int):
        coef = 1.0
        j2 = 0
        while True:
            if coef == 0.0:
                yield 0.0
            else:
                f = sum_pfq(
                    [a1 + r1, a_plus + j2 + j3],
                    [a1, a_plus + r_plus + j2 + j3],
                    h1,
                    ctl,
                )
                work[0] += f.terms
                yield coef * f.value
            coef *= (
                (a2 + r2 + j2) * (a_plus + j3 + j2)
                / ((a2 + j2) * (a_plus + r_plus + j3 + j2))
                * h2 / (j2 + 1)
            )
            j2 += 1

    def outer():
        coef = 1.0
        j3 = 0
        while True:
            if coef == 0.0:
                yield 0.0
            else:
                yield coef * accumulate(inner(j3), ctl, f"inner j2 series {order}, j3={j3}").value
            coef *= (a_plus + j3) / (a_plus + r_plus + j3) * h3 / (j3 + 1)
            j3 += 1

    total = accumulate(outer(), ctl, f"outer j3 series {order}")
    value = _prefactor(a1, a2, a_plus, order) * math.exp(-p.lambda_plus / 2.0) * total.value
    return MomentResult(value, MomentMethod.HYPERGEO_SERIES, work[0])


def moment_finite_sum(
    p: NcDirParams, order: MomentOrder, ctl: SeriesControl = SeriesControl()
) -> MomentResult:
    """
    (r1 + 1)(r2 + 1) Kummer terms; the only infinite series left is each
    1F1(a+ + j+; a+ + r+ + j+; lambda+ / 2).

    Each Kummer value grows like exp(lambda+ / 2) before the exp(-lambda+ / 2)
    damping is applied, so past lambda+ of about 1400 its partial sum leaves
    double range and ``NonConvergent`` is raised.
    """
    a1, a2, a_plus, h1, h2, _ = _bivariate(p)
    r1, r2, r_plus = order.r1, order.r2, order.r_plus
    h = p.lambda_plus / 2.0
    terms = []
    work = 0
    for j1 in range(r1 + 1):
        for j2 in range(r2 + 1):
            weight = h1**j1 * h2**j2
            if weight == 0.0:
                continue
            j_plus = j1 + j2
            coef = (
                math.comb(r1, j1)
                * math.comb(r2, j2)
                * _poch_ratio(a_plus, a_plus + r_plus, j_plus)
                * weight
                / (pochhammer(a1, j1) * pochhammer(a2, j2))
            )
            f = sum_pfq([a_plus + j_plus], [a_plus + r_plus + j_plus], h, ctl)
            work += f.terms
            terms.append(coef * f.value)
    value = _prefactor(a1, a2, a_plus, order) * math.exp(-h) * math.fsum(terms)
    return MomentResult(value, MomentMethod.FINITE_SUM, work)


def moment_11_three_f(p: NcDirParams, ctl: SeriesControl = SeriesControl()) -> MomentResult:
    """E[X'_1 X'_2] as a combination of three 1F1 functions of lambda+ / 2."""
    a1, a2, a_plus, h1, h2, _ = _bivariate(p)
    h = p.lambda_plus / 2.0
    fs = [sum_pfq([a_plus + k], [a_plus + k + 2], h, ctl) for k in range(3)]
    damp = math.exp(-h)
    value = damp * math.fsum(
        [
            a1 * a2 / pochhammer(a_plus, 2) * fs[0].value,
            (a1 * h2 + a2 * h1) / pochhammer(a_plus + 1, 2) * fs[1].value,
            h1 * h2 / pochhammer(a_plus + 2, 2) * fs[2].value,
        ]
    )
    return MomentResult(value, MomentMethod.CLOSED_11, sum(f.terms for f in fs))


def moment_11_reduced(p: NcDirParams, ctl: SeriesControl = SeriesControl()) -> MomentResult:
    """
    E[X'_1 X'_2] with the third Kummer function eliminated by a contiguous
    relation, leaving two 1F1 evaluations. Needs lambda+ > 0.
    """
    a1, a2, a_plus, h1, h2, _ = _bivariate(p)
    if p.is_central:
        raise DomainError("the reduced (1,1) form divides by lambda+ and needs lambda+ > 0")
    h = p.lambda_plus / 2.0
    f0 = sum_pfq([a_plus], [a_plus + 2], h, ctl)
    f1 = sum_pfq([a_plus + 1], [a_plus + 3], h, ctl)
    damp = math.exp(-h)
    cross = h1 * h2 / (a_plus + 1 + h)
    value = math.fsum(
        [
            a1 * a2 / pochhammer(a_plus, 2) * damp * f0.value,
            ((a1 * h2 + a2 * h1) / (a_plus + 1) - cross) / (a_plus + 2) * damp * f1.value,
            cross / h * (1.0 - damp * f1.value),
        ]
    )
    return MomentResult(value, MomentMethod.CLOSED_11_REDUCED, f0.terms + f1.terms)


EVALUATORS: Dict[MomentMethod, Callable[..., MomentResult]] = {
    MomentMethod.DEFINITION_SERIES: moment_definition_series,
    MomentMethod.HYPERGEO_SERIES: moment_hypergeo_series,
    MomentMethod.FINITE_SUM: moment_finite_sum,
}


def compute_moment(
    p: NcDirParams,
    order: MomentOrder,
    method=MomentMethod.FINITE_SUM,
    ctl: SeriesControl = SeriesControl(),
) -> MomentResult:
    """Dispatch to one analytic evaluator; the closed forms accept only (1,1)."""
    method = MomentMethod(method)
    if method in (MomentMethod.CLOSED_11, MomentMethod.CLOSED_11_REDUCED):
        if order != MomentOrder(1, 1):
            raise DomainError(f"{method.value} only evaluates the (1,1) moment, got {order}")
        if method is MomentMethod.CLOSED_11:
            return moment_11_three_f(p, ctl)
        return moment_11_reduced(p, ctl)
    return EVALUATORS[method](p, order, ctl)


# ============== MONTE CARLO ==============

def descriptive_moment(sample: np.ndarray, order: MomentOrder, columns=(0, 1)) -> float:
    """Sample mean of x_a^r1 x_b^r2 over the rows of ``sample``."""
    sample = np.asarray(sample, dtype=float)
    if sample.ndim != 2 or len(sample) < 1:
        raise DomainError("sample must be a non-empty 2-D array")
    a, b = columns
    return float(np.mean(sample[:, a] ** order.r1 * sample[:, b] ** order.r2))


def moment_mc(p: NcDirParams, order: MomentOrder, n_draws: int, rng) -> float:
    """Monte Carlo estimate from the definition sampler."""
    _bivariate(p)
    if n_draws < 1:
        raise DomainError(f"n_draws must be >= 1, got {n_draws}")
    sample = sample_ncdir_definition(p, as_generator(rng), size=n_draws)
    return descriptive_moment(sample, order)
