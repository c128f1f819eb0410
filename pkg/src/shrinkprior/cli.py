"""Command line entry point.

Exit codes: 0 on success, 2 for malformed input, 3 when the request falls
outside the domain of an operation (including non-integrable priors).
"""
import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np

from shrinkprior import __version__
from shrinkprior.experiments import (
    parse_grid,
    prior_density_sweep,
    risk_sweep,
    shrink_sweep,
    write_density_csv,
    write_risk_csv,
    write_shrink_csv,
)
from shrinkprior.modules.estimator import approaches_from_above, baranchik_check, bayes_estimate, james_stein
from shrinkprior.modules.minimax import (
    certify,
    check_corollary1,
    check_hyper_ib,
    check_log_adjusted,
    check_theorem1,
)
from shrinkprior.modules.quadrature import QuadConfig, Scheme
from shrinkprior.modules.sampler import (
    SamplerConfig,
    acceptance_rate,
    chain_shrinkage_factor,
    posterior_mean,
    run_chain,
    write_trace_csv,
)
from shrinkprior.prior_manager import PriorManager
from shrinkprior.prior_manager.manager import NAMED_PREFIX
from shrinkprior.shrink import Bayes, Identity, JamesStein
from shrinkprior.util import logger
from shrinkprior.util.errors import DomainError, IntegrabilityError, ValidationError
from shrinkprior.util.logger import quiesce_logger, set_logger_verbosity

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DOMAIN = 3

CHECKS = {
    "certify": certify,
    "theorem1": check_theorem1,
    "corollary1": check_corollary1,
    "log-adjusted": check_log_adjusted,
    "hyper-ib": check_hyper_ib,
}
BASELINES = {"james_stein": JamesStein, "identity": Identity}


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


@dataclass
class RunManifest:
    subcommand: str
    argv: List[str]
    priors: List[dict] = field(default_factory=list)
    seed: Optional[int] = None
    config_paths: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def write(self, path):
        with open(path, "w") as handle:
            json.dump(asdict(self), handle, indent=2)

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            with open(path) as handle:
                document = json.load(handle)
            return cls(**document)
        except (OSError, json.JSONDecodeError, TypeError) as e:
            raise ValidationError(f"could not read manifest {path}: {e}") from e


def _quad_config(args) -> QuadConfig:
    return QuadConfig(rel_tol=args.rel_tol, scheme=Scheme(args.scheme))


def _parse_y(text: str) -> np.ndarray:
    try:
        if os.path.isfile(text):
            values = np.loadtxt(text, delimiter=",", ndmin=1).ravel()
        else:
            values = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as e:
        raise ValidationError(f"--y must be a CSV file of numbers or comma separated numbers, got {text!r}: {e}") from e
    if len(values) == 0:
        raise ValidationError("--y is empty")
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"--y must be finite, got {values}")
    return values


def _config_paths(sources) -> List[str]:
    return [os.path.abspath(s) for s in sources if not s.startswith(NAMED_PREFIX) and os.path.isfile(s)]


def _finish(args, priors, outputs, seed=None):
    manifest = RunManifest(
        subcommand=args.command,
        argv=args.argv,
        priors=[spec.to_dict() for spec in priors],
        seed=seed,
        config_paths=_config_paths(getattr(args, "priors", None) or [args.prior]),
        outputs=[os.path.abspath(path) for path in outputs],
    )
    for path in outputs:
        manifest.write(f"{path}.manifest.json")
        logger.message(f"wrote {path}")
    return EXIT_OK


def _emit(document):
    print(json.dumps(document, indent=2))


def cmd_minimax_check(args):
    spec = PriorManager().load(args.prior, args.p)
    report = CHECKS[args.method](spec)
    if args.json:
        _emit(report.to_dict())
    else:
        logger.message(f"{report.verdict.value} via {report.rule.value}")
        logger.message(f"margin {report.margin:.6g}, b threshold {report.b_threshold:.6g}")
        logger.message(report.details)
    return EXIT_OK


def cmd_estimate(args):
    y = _parse_y(args.y)
    spec = PriorManager().load(args.prior, args.p or len(y))
    estimate = bayes_estimate(spec, y, _quad_config(args))
    norm_sq = float(y @ y)
    document = {
        "y_norm": float(np.sqrt(norm_sq)),
        "phi": norm_sq * float(1.0 - estimate @ y / norm_sq) if norm_sq > 0 else 0.0,
        "estimate": estimate.tolist(),
    }
    if spec.p >= 3 and norm_sq > 0:
        document["james_stein"] = james_stein(y).tolist()
    _emit(document)
    return EXIT_OK


def cmd_shrink_curve(args):
    spec = PriorManager().load(args.prior, args.p)
    curve = shrink_sweep(spec, parse_grid(args.grid), _quad_config(args))
    monotone, bounded = baranchik_check(curve)
    logger.experiment(
        f"phi limit {curve.limit:.6g}; overshoot expected: {approaches_from_above(spec)}; "
        f"monotone on grid: {monotone}; within [0, 2(p-2)]: {bounded}"
    )
    write_shrink_csv(curve, args.out)
    return _finish(args, [spec], [args.out])


def _label(source: str, index: int) -> str:
    if source.startswith(NAMED_PREFIX):
        return source[len(NAMED_PREFIX):]
    if os.path.isfile(source):
        return os.path.splitext(os.path.basename(source))[0]
    return f"prior_{index + 1}"


def cmd_risk_sweep(args):
    manager = PriorManager()
    cfg = _quad_config(args)
    specs = [manager.load(source, args.p) for source in args.priors]
    estimators = [Bayes(spec, cfg, name=_label(source, i)) for i, (source, spec) in enumerate(zip(args.priors, specs))]
    estimators.extend(BASELINES[name]() for name in args.baselines)
    curve = risk_sweep(
        estimators, args.p, parse_grid(args.grid), args.reps, args.seed, threads=args.threads, progress=not args.quiet
    )
    write_risk_csv(curve, args.out)
    return _finish(args, specs, [args.out], seed=args.seed)


def cmd_sample_posterior(args):
    y = _parse_y(args.y)
    spec = PriorManager().load(args.prior, args.p or len(y))
    cfg = SamplerConfig(
        iterations=args.iters,
        burn_in=args.burn,
        seed=args.seed,
        rao_blackwell=not args.plain,
        chain_id=args.chain_id,
    )
    trace = run_chain(spec, y, cfg, progress=not args.quiet)
    phi, se = chain_shrinkage_factor(trace)
    logger.message(f"acceptance {acceptance_rate(trace):.4f}; phi {phi:.6g} +/- {se:.2g}")
    write_trace_csv(trace, args.out, include_beta=args.include_beta)
    _emit({"posterior_mean": posterior_mean(trace).tolist(), "phi": phi, "phi_se": se})
    return _finish(args, [spec], [args.out], seed=args.seed)


def cmd_prior_density(args):
    spec = PriorManager().load(args.prior, args.p)
    curve = prior_density_sweep(spec, parse_grid(args.grid))
    write_density_csv(curve, args.out)
    return _finish(args, [spec], [args.out])


def cmd_list_priors(args):
    manager = PriorManager()
    filters = {"family": args.family} if args.family else {}
    priors = manager.get_filtered_priors(**filters)
    if args.json:
        _emit(priors)
    else:
        for name, entry in priors.items():
            logger.message(f"{name:<14} p >= {entry['min_p']:<3} {entry['description']}")
    return EXIT_OK


def cmd_replay(args):
    manifest = RunManifest.read(args.manifest)
    if manifest.version != __version__:
        logger.warning(f"manifest was written by version {manifest.version}, replaying with {__version__}")
    logger.message(f"replaying {manifest.subcommand}: {' '.join(manifest.argv)}")
    return main(manifest.argv)


def _add_prior(parser, required_p=True):
    parser.add_argument("--prior", required=True, help="named:<name>, a JSON file or inline JSON")
    parser.add_argument("--p", type=int, required=required_p, help="dimension")


def _add_quadrature(parser):
    parser.add_argument("--rel-tol", type=float, default=1e-10)
    parser.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.DOUBLE_EXPONENTIAL.value)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="shrinkprior", description="Minimax shrinkage under U-shaped priors")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("-q", "--quiet", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("minimax-check", help="certify minimaxity of a prior")
    _add_prior(sub)
    sub.add_argument("--method", choices=sorted(CHECKS), default="certify")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=cmd_minimax_check)

    sub = commands.add_parser("estimate", help="Bayes estimate for one observation")
    _add_prior(sub, required_p=False)
    sub.add_argument("--y", required=True, help="comma separated values or a CSV file")
    _add_quadrature(sub)
    sub.set_defaults(handler=cmd_estimate)

    sub = commands.add_parser("shrink-curve", help="shrinkage factor phi over a |y| grid")
    _add_prior(sub)
    sub.add_argument("--grid", default="0.1:10:0.1")
    sub.add_argument("--out", required=True)
    _add_quadrature(sub)
    sub.set_defaults(handler=cmd_shrink_curve)

    sub = commands.add_parser("risk-sweep", help="Monte Carlo quadratic risk over a |beta| grid")
    sub.add_argument("--priors", nargs="+", required=True)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--baselines", nargs="*", choices=sorted(BASELINES), default=["james_stein"])
    sub.add_argument("--grid", default="0:10:1")
    sub.add_argument("--reps", type=int, default=20_000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=None, help="worker count, 0 for one per CPU")
    sub.add_argument("--out", required=True)
    _add_quadrature(sub)
    sub.set_defaults(handler=cmd_risk_sweep)

    sub = commands.add_parser("sample-posterior", help="run the Metropolis-within-Gibbs chain")
    _add_prior(sub, required_p=False)
    sub.add_argument("--y", required=True)
    sub.add_argument("--iters", type=int, default=100_000)
    sub.add_argument("--burn", type=int, default=1000)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--chain-id", type=int, default=0)
    sub.add_argument("--plain", action="store_true", help="draw beta instead of recording its conditional mean")
    sub.add_argument("--include-beta", action="store_true")
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=cmd_sample_posterior)

    sub = commands.add_parser("prior-density", help="log pi(kappa) over a kappa grid")
    _add_prior(sub)
    sub.add_argument("--grid", default="0.01:0.99:0.01")
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=cmd_prior_density)

    sub = commands.add_parser("list-priors", help="list the named prior catalog")
    sub.add_argument("--family", choices=["constant", "log_adjusted", "hyper_ib"])
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(handler=cmd_list_priors)

    sub = commands.add_parser("replay", help="re-run the command recorded in a manifest")
    sub.add_argument("--manifest", required=True)
    sub.set_defaults(handler=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        set_logger_verbosity(args.verbose)
        quiesce_logger(args.quiet)
        args.argv = argv
        return args.handler(args)
    except ValidationError as e:
        logger.error(str(e))
        return EXIT_INVALID
    except (DomainError, IntegrabilityError) as e:
        logger.error(str(e))
        return EXIT_DOMAIN
    except OSError as e:
        logger.error(f"{e.filename}: {e.strerror}")
        return EXIT_INVALID
