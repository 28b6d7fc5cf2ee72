"""
ncdir.src.sim

Monte Carlo validation of the analytic moments and timing comparison of
the finite-sum and series evaluators.

Validation draws ``n_series`` independent series of ``n_draws_per_series``
definition-sampler draws per parameter set, takes the descriptive moment
of every series, and Z-tests the mean of those series moments against the
finite-sum value.

Seeding: the master ``RngSeed`` spawns one child per parameter set and
each child spawns one stream per series, so results do not depend on the
number of workers.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, Generator
from scipy.special import erfc

from src.dist import NcDirParams, RngSeed, sample_ncdir_definition
from src.errors import ConsistencyError, DomainError
from src.moments import (
    MomentMethod,
    MomentOrder,
    descriptive_moment,
    moment_finite_sum,
    moment_hypergeo_series,
)
from src.specfun import SeriesControl


logger = logging.getLogger(__name__)

DEFAULT_SEED = 20_190_611
MIN_REPS_FOR_Z = 30
CHECK_REL_TOL = 1e-9

REFERENCE_PARAM_SETS: Tuple[NcDirParams, ...] = (
    NcDirParams((0.5, 0.6, 0.4), (1.7, 6.4, 3.8)),
    NcDirParams((0.2, 0.3, 1.6), (1.3, 5.5, 4.2)),
    NcDirParams((1.0, 1.4, 1.0), (4.8, 1.9, 1.5)),
    NcDirParams((1.7, 3.1, 2.4), (2.9, 3.7, 0.8)),
)

DEFAULT_ORDERS: Tuple[MomentOrder, ...] = (
    MomentOrder(1, 1),
    MomentOrder(1, 2),
    MomentOrder(2, 1),
    MomentOrder(2, 2),
)


class Tail(str, Enum):
    TWO_TAILED = "two-tailed"


@dataclass(frozen=True)
class ValidationConfig:
    n_series: int = 30
    n_draws_per_series: int = 10_000
    orders: Tuple[MomentOrder, ...] = DEFAULT_ORDERS
    param_sets: Tuple[NcDirParams, ...] = REFERENCE_PARAM_SETS
    seed: RngSeed = RngSeed(DEFAULT_SEED)
    alpha_level: float = 0.05
    ctl: SeriesControl = field(default_factory=SeriesControl)
    workers: int = 1

    def __post_init__(self):
        if self.n_series < 2:
            raise DomainError(f"n_series must be >= 2, got {self.n_series}")
        if self.n_draws_per_series < 1:
            raise DomainError(f"n_draws_per_series must be >= 1, got {self.n_draws_per_series}")
        if not 0 < self.alpha_level < 1:
            raise DomainError(f"alpha_level must lie in (0, 1), got {self.alpha_level}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if not self.orders or not self.param_sets:
            raise DomainError("validation needs at least one order and one parameter set")
        if MomentOrder(0, 0) in self.orders:
            raise DomainError("order (0,0) is identically 1 and has no sampling variance to test")
        for p in self.param_sets:
            if p.D != 2:
                raise DomainError(f"validation runs on bivariate parameter sets, got D = {p.D}")


@dataclass(frozen=True)
class ZTestReport:
    param_set: NcDirParams
    order: MomentOrder
    target_mu: float
    sample_mean: float
    sample_sd: float
    z_stat: float
    p_value: float
    n_series: int
    tail: Tail = Tail.TWO_TAILED

    def rejected(self, alpha_level: float) -> bool:
        return self.p_value <= alpha_level

    def as_record(self) -> dict:
        return {
            **_param_columns(self.param_set),
            "r1": self.order.r1,
            "r2": self.order.r2,
            "target_mu": self.target_mu,
            "sample_mean": self.sample_mean,
            "sample_sd": self.sample_sd,
            "z_stat": self.z_stat,
            "p_value": self.p_value,
            "n_series": self.n_series,
            "tail": self.tail.value,
        }


@dataclass(frozen=True)
class TimingReport:
    param_set: NcDirParams
    method: MomentMethod
    mean_seconds: float
    sd_seconds: float
    median_seconds: float
    n_reps: int
    p_value_noninferiority: float
    ctl: SeriesControl = field(default_factory=SeriesControl)

    def __post_init__(self):
        if not self.mean_seconds > 0:
            raise DomainError(f"mean_seconds must be > 0, got {self.mean_seconds}")

    def as_record(self) -> dict:
        return {
            **_param_columns(self.param_set),
            "method": self.method.value,
            "mean_seconds": self.mean_seconds,
            "sd_seconds": self.sd_seconds,
            "median_seconds": self.median_seconds,
            "n_reps": self.n_reps,
            "p_value": self.p_value_noninferiority,
            "rel_tol": self.ctl.rel_tol,
            "max_terms": self.ctl.max_terms,
        }


def _param_columns(p: NcDirParams) -> dict:
    columns = {f"alpha{i + 1}": a for i, a in enumerate(p.alpha)}
    columns.update({f"lambda{i + 1}": l for i, l in enumerate(p.lam)})
    return columns


# ============== Z TESTS ==============

def z_statistic(sample_mean: float, sample_sd: float, n: int, mu0: float) -> float:
    if n < 2:
        raise DomainError(f"a Z test needs n >= 2, got {n}")
    if not sample_sd > 0:
        raise DomainError(f"degenerate sample sd {sample_sd}; the Z statistic is undefined")
    return (sample_mean - mu0) * math.sqrt(n) / sample_sd


def two_tailed_z(sample_mean: float, sample_sd: float, n: int, mu0: float) -> float:
    """Two-sided normal p-value of H0: mean == mu0."""
    z = z_statistic(sample_mean, sample_sd, n, mu0)
    return min(1.0, float(erfc(abs(z) / math.sqrt(2.0))))


def one_tailed_z(diff: float, se: float) -> float:
    """
    P(Z <= diff / se): one-sided p-value of H0: diff >= 0 against diff < 0.

    With diff = mean(sum) - mean(series), a small value says the
    finite sum is faster.
    """
    if not se > 0:
        raise DomainError(f"degenerate standard error {se}; the Z statistic is undefined")
    return 0.5 * float(erfc(-(diff / se) / math.sqrt(2.0)))


# ============== VALIDATION ==============

def series_streams(seed: RngSeed, n_param_sets: int, n_series: int) -> List[List[Generator]]:
    """One independent PCG64 stream per (parameter set, series)."""
    return [
        [Generator(PCG64(grandchild)) for grandchild in child.spawn(n_series)]
        for child in seed.sequence().spawn(n_param_sets)
    ]


def _series_moments(
    p: NcDirParams, orders: Sequence[MomentOrder], n_draws: int, rng: Generator
) -> np.ndarray:
    sample = sample_ncdir_definition(p, rng, size=n_draws)
    return np.array([descriptive_moment(sample, order) for order in orders])


def run_validation(cfg: ValidationConfig) -> List[ZTestReport]:
    """Z test of every (parameter set, order) pair; reports keep input order."""
    logger.info(
        f"[VALIDATE] {len(cfg.param_sets)} parameter set(s) x {len(cfg.orders)} order(s), "
        f"{cfg.n_series} series of {cfg.n_draws_per_series} draws, seed {cfg.seed.seed}"
    )
    streams = series_streams(cfg.seed, len(cfg.param_sets), cfg.n_series)
    reports: List[ZTestReport] = []
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for p, p_streams in zip(cfg.param_sets, streams):
            targets = [moment_finite_sum(p, order, cfg.ctl).value for order in cfg.orders]
            task = partial(_series_moments, p, cfg.orders, cfg.n_draws_per_series)
            per_series = np.array(list(pool.map(task, p_streams)))
            means = per_series.mean(axis=0)
            sds = per_series.std(axis=0, ddof=1)
            for k, order in enumerate(cfg.orders):
                mean, sd = float(means[k]), float(sds[k])
                report = ZTestReport(
                    param_set=p,
                    order=order,
                    target_mu=targets[k],
                    sample_mean=mean,
                    sample_sd=sd,
                    z_stat=z_statistic(mean, sd, cfg.n_series, targets[k]),
                    p_value=two_tailed_z(mean, sd, cfg.n_series, targets[k]),
                    n_series=cfg.n_series,
                )
                reports.append(report)
                logger.info(
                    f"[VALIDATE] alpha={p.alpha} lambda={p.lam} {order}: "
                    f"mu={report.target_mu:.5f} mean={mean:.5f} p={report.p_value:.5f}"
                )
    rejected = sum(r.rejected(cfg.alpha_level) for r in reports)
    logger.info(f"[VALIDATE] {rejected} of {len(reports)} test(s) rejected at {cfg.alpha_level}")
    return reports


# ============== TIMING ==============

@dataclass(frozen=True)
class BenchConfig:
    param_sets: Tuple[NcDirParams, ...] = REFERENCE_PARAM_SETS
    orders: Tuple[MomentOrder, ...] = DEFAULT_ORDERS
    n_reps: int = 30
    ctl: SeriesControl = field(default_factory=SeriesControl)
    check_values: bool = False


def _time_all(evaluator, p, orders, ctl, timer) -> float:
    start = timer()
    for order in orders:
        evaluator(p, order, ctl)
    return timer() - start


def _check_agreement(p: NcDirParams, orders: Sequence[MomentOrder], ctl: SeriesControl) -> None:
    for order in orders:
        finite = moment_finite_sum(p, order, ctl).value
        series = moment_hypergeo_series(p, order, ctl).value
        if not math.isclose(finite, series, rel_tol=CHECK_REL_TOL):
            raise ConsistencyError(
                f"finite sum {finite!r} and series {series!r} disagree for "
                f"alpha={p.alpha} lambda={p.lam} order {order}"
            )


def run_timing(
    param_sets: Sequence[NcDirParams],
    orders: Sequence[MomentOrder],
    n_reps: int,
    ctl: SeriesControl = SeriesControl(),
    check_values: bool = False,
    timer: Callable[[], float] = time.perf_counter,
) -> List[TimingReport]:
    """
    Wall-clock time of evaluating all ``orders`` with each evaluator, in
    interleaved repetitions, plus a one-sided test that the finite sum is
    not slower than the series.
    """
    if n_reps < 2:
        raise DomainError(f"n_reps must be >= 2, got {n_reps}")
    if n_reps < MIN_REPS_FOR_Z:
        logger.warning(f"[BENCH] n_reps={n_reps} < {MIN_REPS_FOR_Z} weakens the Z approximation")
    reports: List[TimingReport] = []
    for p in param_sets:
        if check_values:
            _check_agreement(p, orders, ctl)
        times = np.empty((2, n_reps))
        for rep in range(n_reps):
            times[0, rep] = _time_all(moment_finite_sum, p, orders, ctl, timer)
            times[1, rep] = _time_all(moment_hypergeo_series, p, orders, ctl, timer)
        means, sds, medians = times.mean(axis=1), times.std(axis=1, ddof=1), np.median(times, axis=1)
        sum_mean, series_mean = float(means[0]), float(means[1])
        sum_sd, series_sd = float(sds[0]), float(sds[1])
        se = math.sqrt(sum_sd**2 / n_reps + series_sd**2 / n_reps)
        p_value = one_tailed_z(sum_mean - series_mean, se)
        logger.info(
            f"[BENCH] alpha={p.alpha} lambda={p.lam}: sum {sum_mean:.3e}s, "
            f"series {series_mean:.3e}s, p={p_value:.5f}"
        )
        for k, method in enumerate((MomentMethod.FINITE_SUM, MomentMethod.HYPERGEO_SERIES)):
            reports.append(
                TimingReport(
                    param_set=p,
                    method=method,
                    mean_seconds=float(means[k]),
                    sd_seconds=float(sds[k]),
                    median_seconds=float(medians[k]),
                    n_reps=n_reps,
                    p_value_noninferiority=p_value,
                    ctl=ctl,
                )
            )
    return reports


def run_bench(cfg: BenchConfig) -> List[TimingReport]:
    return run_timing(cfg.param_sets, cfg.orders, cfg.n_reps, cfg.ctl, cfg.check_values)
