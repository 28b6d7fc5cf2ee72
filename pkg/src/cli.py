"""
ncdir.src.cli

Command-line front end: sample, density, moment, validate and bench.

Each ``cmd_*`` function takes the parsed namespace and returns a frame
(or a pipeline result); ``run`` wires parsing, execution and output.
"""

import argparse
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from config.settings import RunSettings, SeriesSettings
from src.datasource import SampleSource
from src.dist import (
    DensityForm,
    NcDirParams,
    SamplerRoute,
    dirichlet_mixed_moment,
    ncdir_density,
    sample_ncdir,
)
from src.errors import DomainError
from src.moments import (
    MomentMethod,
    MomentOrder,
    compute_moment,
    descriptive_moment,
    moment_mc,
)
from src.parser import RunConfigParser
from src.pipeline import ReportPipeline
from src.transformer import SampleTransformer
from src.validator import ReportValidator
from src.writer import ArtifactWriter, OutputFormat, RunManifest


logger = logging.getLogger(__name__)

MC = "mc"
METHOD_CHOICES = [m.value for m in MomentMethod] + [MC]


# ============== ARGUMENT PARSING ==============

def _params_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--alpha", help="comma-separated alpha_1..alpha_{D+1}")
    parent.add_argument("--lambda", dest="lam", help="comma-separated lambda_1..lambda_{D+1}")
    parent.add_argument("--config", type=Path, help="JSON run config holding one parameter set")
    return parent


def _series_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--rel-tol", type=float, help="series relative tolerance")
    parent.add_argument("--max-terms", type=int, help="series term budget")
    return parent


def _output_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--format",
        dest="fmt",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.TABLE.value,
    )
    parent.add_argument("--out", type=Path, help="write to this file (plus a manifest)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncdir",
        description="Non-central Dirichlet sampling, densities and product moments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    params, series, output = _params_parent(), _series_parent(), _output_parent()

    sample = sub.add_parser("sample", parents=[params, output], help="draw NcDir samples")
    sample.add_argument("-n", type=int, default=1000, help="number of draws")
    sample.add_argument(
        "--route", choices=[r.value for r in SamplerRoute], default=SamplerRoute.DEFINITION.value
    )
    sample.add_argument("--seed", type=int)

    density = sub.add_parser("density", parents=[params, series, output], help="evaluate the density")
    density.add_argument("--x", required=True, help="comma-separated x_1..x_D")
    density.add_argument(
        "--form", choices=[f.value for f in DensityForm], default=DensityForm.PERTURBATION.value
    )

    moment = sub.add_parser("moment", parents=[params, series, output], help="E[X1^r1 X2^r2]")
    moment.add_argument("--order", default="1,1", help="r1,r2")
    moment.add_argument("--method", choices=METHOD_CHOICES, default=MomentMethod.FINITE_SUM.value)
    moment.add_argument("-n", type=int, default=10_000, help="draws for --method mc")
    moment.add_argument("--seed", type=int)
    moment.add_argument("--sample", type=Path, help="sample CSV for --method mc")
    moment.add_argument(
        "--central-check", action="store_true", help="also print the central Dirichlet moment"
    )

    validate = sub.add_parser("validate", parents=[output], help="Monte Carlo Z tests")
    validate.add_argument("--config", type=Path)
    validate.add_argument("--seed", type=int)
    validate.add_argument("--workers", type=int)

    bench = sub.add_parser("bench", parents=[output], help="time finite sum against series")
    bench.add_argument("--config", type=Path)
    bench.add_argument("-n", dest="n_reps", type=int, help="repetitions")
    bench.add_argument("--check-values", action="store_true")
    return parser


# ============== HELPERS ==============

def resolve_params(args: argparse.Namespace) -> NcDirParams:
    """Inline flags, else the single parameter set of --config."""
    if args.alpha is not None or args.lam is not None:
        if args.alpha is None or args.lam is None:
            raise DomainError("--alpha and --lambda must be given together")
        return NcDirParams.parse(args.alpha, args.lam)
    if args.config is None:
        raise DomainError("give --alpha and --lambda, or --config")
    parser = RunConfigParser(args.config)
    parser.parse()
    sets = parser.param_sets()
    if len(sets) != 1:
        raise DomainError(f"{args.config} holds {len(sets)} parameter sets; expected exactly 1")
    return sets[0]


def _control(args: argparse.Namespace):
    return SeriesSettings.from_env().control(args.rel_tol, args.max_terms)


def _default_config(name: str) -> Path:
    return RunSettings.from_env().CONFIG_DIR / name


def _emit(args, df: pd.DataFrame, manifest: RunManifest) -> None:
    ArtifactWriter(args.fmt).write(df, args.out, manifest)


# ============== COMMANDS ==============

def cmd_sample(args: argparse.Namespace) -> pd.DataFrame:
    p = resolve_params(args)
    if args.n < 1:
        raise DomainError(f"-n must be >= 1, got {args.n}")
    seed = RunSettings.from_env().seed(args.seed)
    logger.info(f"[SAMPLE] {args.n} draw(s), route {args.route}, seed {seed.seed}")
    draws = sample_ncdir(p, seed.generator(), size=args.n, route=args.route)
    df = ReportValidator(SampleTransformer(draws).transform(), "sample").validate()
    manifest = RunManifest(
        "sample", {**p.to_dict(), "n": args.n, "route": args.route}, seed=seed.seed
    )
    _emit(args, df, manifest)
    return df


def cmd_density(args: argparse.Namespace) -> pd.DataFrame:
    p = resolve_params(args)
    try:
        x = tuple(float(v) for v in args.x.split(","))
    except ValueError:
        raise DomainError(f"--x must be a comma-separated list of numbers, got {args.x!r}")
    result = ncdir_density(p, x, args.form, _control(args))
    df = pd.DataFrame(
        [{"value": result.value, "form": args.form, "terms_evaluated": result.terms}]
    )
    manifest = RunManifest("density", {**p.to_dict(), "x": list(x), "form": args.form})
    _emit(args, df, manifest)
    return df


def cmd_moment(args: argparse.Namespace) -> pd.DataFrame:
    from_sample = args.method == MC and args.sample is not None
    # a sample file carries its own moments; parameters are only needed to label them
    if from_sample and args.alpha is None and args.lam is None and args.config is None:
        p = None
    else:
        p = resolve_params(args)
    order = MomentOrder.parse(args.order)
    seed = None
    if from_sample:
        value = descriptive_moment(SampleSource(args.sample).to_array(), order)
        row = {"value": value, "method": MC, "terms_evaluated": None, "converged": True}
    elif args.method == MC:
        seed = RunSettings.from_env().seed(args.seed)
        value = moment_mc(p, order, args.n, seed.generator())
        row = {"value": value, "method": MC, "terms_evaluated": args.n, "converged": True}
    else:
        result = compute_moment(p, order, args.method, _control(args))
        row = {
            "value": result.value,
            "method": result.method.value,
            "terms_evaluated": result.terms_evaluated,
            "converged": result.converged,
        }
    row["rounded"] = f"{row['value']:.5f}"
    if args.central_check:
        if p is None:
            raise DomainError("--central-check needs --alpha and --lambda, or --config")
        central = dirichlet_mixed_moment(p.alpha, order)
        if not p.is_central:
            logger.warning("--central-check compares against the lambda = 0 Dirichlet moment")
        row["central_value"] = central
        row["central_match"] = math.isclose(row["value"], central, rel_tol=1e-15, abs_tol=0.0)
    df = pd.DataFrame([row])
    manifest = RunManifest(
        "moment",
        {
            **(p.to_dict() if p is not None else {"sample": str(args.sample)}),
            "order": [order.r1, order.r2],
            "method": args.method,
        },
        seed=None if seed is None else seed.seed,
    )
    _emit(args, df, manifest)
    return df


def cmd_validate(args: argparse.Namespace):
    settings = RunSettings.from_env()
    parser = RunConfigParser(args.config or _default_config("validation.json"))
    parser.parse()
    seed = args.seed if args.seed is not None else settings.SEED
    workers = args.workers if args.workers is not None else settings.WORKERS
    cfg = parser.to_validation_config(seed=seed, workers=workers)
    manifest = RunManifest(
        "validate",
        {
            "param_sets": [p.to_dict() for p in cfg.param_sets],
            "orders": [[o.r1, o.r2] for o in cfg.orders],
            "n_series": cfg.n_series,
            "n_draws_per_series": cfg.n_draws_per_series,
        },
        seed=cfg.seed.seed,
    )
    return ReportPipeline.validation(cfg, fmt=args.fmt, out=args.out, manifest=manifest).run()


def cmd_bench(args: argparse.Namespace):
    parser = RunConfigParser(args.config or _default_config("bench.json"))
    parser.parse()
    cfg = parser.to_bench_config(n_reps=args.n_reps, check_values=args.check_values)
    manifest = RunManifest(
        "bench",
        {
            "param_sets": [p.to_dict() for p in cfg.param_sets],
            "orders": [[o.r1, o.r2] for o in cfg.orders],
            "n_reps": cfg.n_reps,
            "rel_tol": cfg.ctl.rel_tol,
            "max_terms": cfg.ctl.max_terms,
        },
    )
    return ReportPipeline.timing(cfg, fmt=args.fmt, out=args.out, manifest=manifest).run()


COMMANDS = {
    "sample": cmd_sample,
    "density": cmd_density,
    "moment": cmd_moment,
    "validate": cmd_validate,
    "bench": cmd_bench,
}


def run(argv: Optional[Sequence[str]] = None):
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)
