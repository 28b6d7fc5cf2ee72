"""
ncdir.src.quadrature

Conical-product Gauss-Jacobi rules on the 2-simplex, weighted by a
Dirichlet density. Used to check that the NcDir density forms integrate
to one.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from src.dist import dirichlet_density
from src.errors import DomainError, NonConvergent


logger = logging.getLogger(__name__)


def _beta_rule(a: float, b: float, n: int):
    """Nodes and normalized weights of an n-point rule for E[g(U)], U ~ Beta(a, b)."""
    t, w = roots_jacobi(n, b - 1.0, a - 1.0)
    return (1.0 + t) / 2.0, w / w.sum()


class DirichletStroudRule:
    """
    n x n product rule for expectations under Dir^2(alpha).

    Uses X1 = U and X2 = (1 - U) V with U ~ Beta(a1, a2 + a3) and
    V ~ Beta(a2, a3) independent.
    """

    def __init__(self, alpha: Sequence[float], n: int):
        if len(alpha) != 3 or any(a <= 0 for a in alpha):
            raise DomainError(f"Dirichlet weight needs 3 positive parameters, got {alpha}")
        if n < 1:
            raise DomainError(f"rule order must be >= 1, got {n}")
        a1, a2, a3 = (float(a) for a in alpha)
        u, wu = _beta_rule(a1, a2 + a3, n)
        v, wv = _beta_rule(a2, a3, n)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        self.n = n
        self.points = np.column_stack([uu.ravel(), ((1.0 - uu) * vv).ravel()])
        self.weights = np.outer(wu, wv).ravel()

    def expectation(self, f: Callable[[np.ndarray], float]) -> float:
        values = np.array([f(point) for point in self.points])
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    order: int
    error_estimate: float


def integrate_simplex(
    f: Callable[[np.ndarray], float],
    alpha: Sequence[float],
    tol: float = 1e-9,
    start: int = 8,
    max_order: int = 128,
) -> QuadratureResult:
    """
    Integral of f over the open 2-simplex.

    ``f`` is integrated as E[f(X) / Dir(X; alpha)] under X ~ Dir(alpha), so
    choosing alpha to match the singular behaviour of f at the edges keeps
    the integrand smooth. The order doubles until two successive rules
    agree to ``tol`` relative.
    """
    integrand = lambda x: f(x) / dirichlet_density(alpha, x)
    n = start
    previous = DirichletStroudRule(alpha, n).expectation(integrand)
    current, error = previous, float("inf")
    while n < max_order:
        n *= 2
        current = DirichletStroudRule(alpha, n).expectation(integrand)
        error = abs(current - previous)
        logger.debug(f"order {n}: {current:.17g} (change {error:.3e})")
        if error <= tol * abs(current):
            return QuadratureResult(current, n, error)
        previous = current
    raise NonConvergent("simplex quadrature", n, error, current, "raise max_order")
