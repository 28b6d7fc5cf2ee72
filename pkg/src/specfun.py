"""
ncdir.src.specfun

Scalar special-function kernels: Pochhammer symbols, generalized
hypergeometric series, Kummer's confluent function with its contiguous
recurrences, and the m-variate confluent Humbert function Psi_2.

Every infinite series in the package is truncated by the same guard rule
(see ``accumulate``): a series stops once ``guard`` consecutive terms have
fallen below ``rel_tol`` times the running sum.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import gammaln, logsumexp

from src.errors import BadParameter, DomainError, NonConvergent


# Above this many factors (or this magnitude) Pochhammer products go through log-gamma.
DIRECT_PRODUCT_MAX = 20
DIRECT_MAGNITUDE_MAX = 1e300


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite-series evaluation."""

    rel_tol: float = 1e-14
    max_terms: int = 10_000
    guard: int = 3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"SeriesControl.rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"SeriesControl.max_terms must be an integer >= 1, got {self.max_terms}")
        if int(self.guard) != self.guard or self.guard < 1:
            raise DomainError(f"SeriesControl.guard must be an integer >= 1, got {self.guard}")


@dataclass(frozen=True)
class SeriesSum:
    """Value of a truncated series together with the work spent on it."""

    value: float
    terms: int
    converged: bool = True


def accumulate(
    terms: Iterable[float],
    ctl: SeriesControl,
    series: str,
    hint: Optional[str] = None,
) -> SeriesSum:
    """
    Sum ``terms`` under the guard stopping rule.

    A finite iterator is summed completely (terminating series). Raises
    ``NonConvergent`` when ``ctl.max_terms`` terms were consumed without
    ``ctl.guard`` consecutive sub-tolerance terms.
    """
    total = 0.0
    quiet = 0
    count = 0
    last = 0.0
    for term in terms:
        count += 1
        total += term
        last = term
        if not math.isfinite(total):
            raise NonConvergent(series, count, abs(last), total, "partial sum overflowed")
        if abs(term) <= ctl.rel_tol * abs(total):
            quiet += 1
            if quiet >= ctl.guard:
                return SeriesSum(total, count)
        else:
            quiet = 0
        if count >= ctl.max_terms:
            raise NonConvergent(series, count, abs(last), total, hint)
    return SeriesSum(total, count)


# ============== POCHHAMMER ==============

def _check_poch(a: float, l: int) -> None:
    if not a > 0:
        raise DomainError(f"Pochhammer symbol needs a > 0, got a={a}")
    if int(l) != l or l < 0:
        raise DomainError(f"Pochhammer symbol needs an integer l >= 0, got l={l}")


def _direct_product(a: float, l: int) -> float:
    value = 1.0
    for k in range(l):
        value *= a + k
    return value


def log_pochhammer(a: float, l: int) -> float:
    """log((a)_l); exact product for short runs, log-gamma difference otherwise."""
    _check_poch(a, l)
    l = int(l)
    if l == 0:
        return 0.0
    if l <= DIRECT_PRODUCT_MAX:
        value = _direct_product(a, l)
        if value < DIRECT_MAGNITUDE_MAX:
            return math.log(value)
    return float(gammaln(a + l) - gammaln(a))


def pochhammer(a: float, l: int) -> float:
    """
    Ascending factorial (a)_l = Gamma(a+l)/Gamma(a).

    Short products are multiplied out; long or huge ones are exponentiated
    from ``log_pochhammer`` and saturate to ``inf`` past double range.
    """
    _check_poch(a, l)
    l = int(l)
    if l == 0:
        return 1.0
    if l <= DIRECT_PRODUCT_MAX:
        value = _direct_product(a, l)
        if value < DIRECT_MAGNITUDE_MAX:
            return value
    try:
        return math.exp(log_pochhammer(a, l))
    except OverflowError:
        return math.inf


def rising(a: ArrayLike, l: int) -> np.ndarray:
    """Elementwise (a)_l for an array of a and one integer l."""
    a = np.asarray(a, dtype=float)
    if l <= DIRECT_PRODUCT_MAX:
        out = np.ones_like(a)
        for k in range(l):
            out = out * (a + k)
        return out
    return np.exp(gammaln(a + l) - gammaln(a))


@lru_cache(maxsize=512)
def _compositions(n: int, k: int) -> np.ndarray:
    if k == 1:
        out = np.array([[n]], dtype=np.int64)
    else:
        cuts = np.array(list(combinations(range(n + k - 1), k - 1)), dtype=np.int64)
        left = np.full((len(cuts), 1), -1, dtype=np.int64)
        right = np.full((len(cuts), 1), n + k - 1, dtype=np.int64)
        out = np.diff(np.hstack([left, cuts, right]), axis=1) - 1
    out.setflags(write=False)
    return out


def compositions(n: int, k: int) -> np.ndarray:
    """All weak compositions of n into k parts, as a read-only (count, k) array."""
    if n < 0 or k < 1:
        raise DomainError(f"compositions need n >= 0 and k >= 1, got n={n}, k={k}")
    return _compositions(int(n), int(k))


# ============== HYPERGEOMETRIC SERIES ==============

def _is_pole(b: float) -> bool:
    return b <= 0 and float(b).is_integer()


def _check_pfq(upper: Sequence[float], lower: Sequence[float], x: float) -> None:
    for b in lower:
        if _is_pole(b):
            raise BadParameter(f"lower parameter {b} is a non-positive integer")
    terminating = any(_is_pole(a) for a in upper)
    p, q = len(upper), len(lower)
    if terminating:
        return
    if p > q + 1:
        raise BadParameter(f"{p}F{q} diverges for every x != 0")
    if p == q + 1 and abs(x) >= 1:
        raise BadParameter(f"{p}F{q} needs |x| < 1, got x={x}")


def _pfq_terms(upper: Sequence[float], lower: Sequence[float], x: float) -> Iterator[float]:
    term = 1.0
    i = 0
    while True:
        yield term
        ratio = math.prod(a + i for a in upper) / math.prod(b + i for b in lower)
        term *= ratio * x / (i + 1)
        i += 1


def sum_pfq(
    upper: Sequence[float],
    lower: Sequence[float],
    x: float,
    ctl: SeriesControl = SeriesControl(),
) -> SeriesSum:
    """pFq series with its term count; terms follow the ratio recurrence."""
    upper = [float(a) for a in upper]
    lower = [float(b) for b in lower]
    _check_pfq(upper, lower, x)
    name = f"{len(upper)}F{len(lower)}({upper}; {lower}; {x})"
    return accumulate(_pfq_terms(upper, lower, x), ctl, name)


def pfq(
    upper: Sequence[float],
    lower: Sequence[float],
    x: float,
    ctl: SeriesControl = SeriesControl(),
) -> float:
    """Generalized hypergeometric function pFq(upper; lower; x)."""
    return sum_pfq(upper, lower, x, ctl).value


def kummer_1f1(a: float, b: float, x: float, ctl: SeriesControl = SeriesControl()) -> float:
    """Kummer's confluent hypergeometric function 1F1(a; b; x)."""
    return pfq([a], [b], x, ctl)


def _scaled_residual(*parts: float) -> float:
    scale = max(abs(p) for p in parts)
    if scale == 0:
        return 0.0
    return abs(math.fsum(parts)) / scale


def check_1f1_recurrences(
    a: float, b: float, x: float, ctl: SeriesControl = SeriesControl()
) -> Tuple[float, float]:
    """
    Residuals of the two contiguous relations of 1F1.

    Each residual is |sum of the three terms| divided by the largest term,
    so exact identities give values at rounding level.
    """
    f = lambda a_, b_: kummer_1f1(a_, b_, x, ctl)
    base = f(a, b)
    first = _scaled_residual(
        b * (a + x) * base,
        x * (a - b) * f(a, b + 1),
        -a * b * f(a + 1, b),
    )
    second = _scaled_residual(
        (a - 1 + x) * base,
        (b - a) * f(a - 1, b),
        (1 - b) * f(a, b - 1),
    )
    return first, second


# ============== HUMBERT PSI_2 ==============

def _psi2_layers(a: float, b: np.ndarray, x: np.ndarray) -> Iterator[float]:
    """
    Degree-n layers of Psi_2, each exponentiated from its logarithm.

    log (a)_n and the log coefficients are carried separately, so a layer
    stays finite even when (a)_n alone would overflow or its coefficient
    alone would underflow.
    """
    m = len(b)
    with np.errstate(divide="ignore"):
        log_x = np.log(x)
    size = 64
    log_coeff = np.full((m, size), -np.inf)
    log_conv = np.full((m, size), -np.inf)
    log_poch = 0.0
    n = 0
    while True:
        if n == size:
            size *= 2
            log_coeff = np.concatenate([log_coeff, np.full_like(log_coeff, -np.inf)], axis=1)
            log_conv = np.concatenate([log_conv, np.full_like(log_conv, -np.inf)], axis=1)
        if n == 0:
            log_coeff[:, 0] = 0.0
        else:
            log_coeff[:, n] = log_coeff[:, n - 1] + log_x - np.log((b + n - 1) * n)
            log_poch += math.log(a + n - 1)
        # log_conv[k, n]: log of the degree-n coefficient of the product of the first k+1 series
        log_conv[0, n] = log_coeff[0, n]
        with np.errstate(divide="ignore"):
            for k in range(1, m):
                log_conv[k, n] = logsumexp(log_conv[k - 1, : n + 1] + log_coeff[k, n::-1])
        try:
            yield math.exp(log_poch + log_conv[m - 1, n])
        except OverflowError:
            yield math.inf
        n += 1


def sum_psi2(
    a: float,
    b: Sequence[float],
    x: Sequence[float],
    ctl: SeriesControl = SeriesControl(),
) -> SeriesSum:
    """Psi_2^(m) summed layer by layer in the total degree j_1 + ... + j_m."""
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.ndim != 1 or len(b) < 1:
        raise BadParameter("Psi_2 needs at least one lower parameter")
    if len(b) != len(x):
        raise BadParameter(f"Psi_2 needs len(b) == len(x), got {len(b)} and {len(x)}")
    if np.any(b <= 0):
        raise BadParameter(f"Psi_2 lower parameters must be > 0, got {b.tolist()}")
    if np.any(x < 0):
        raise BadParameter(f"Psi_2 arguments must be >= 0, got {x.tolist()}")
    return accumulate(
        _psi2_layers(float(a), b, x),
        ctl,
        f"Psi2^({len(b)})",
        hint="large non-centrality may need a larger max_terms",
    )


def humbert_psi2(
    a: float,
    b: Sequence[float],
    x: Sequence[float],
    ctl: SeriesControl = SeriesControl(),
) -> float:
    """
    m-variate confluent Humbert function Psi_2^(m)[a; b_1..b_m; x_1..x_m].

    The value itself grows like exp((sum of sqrt(x_i))^2); past double range
    the partial sum overflows and ``NonConvergent`` is raised.
    """
    return sum_psi2(a, b, x, ctl).value
