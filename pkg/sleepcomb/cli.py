"""Command-line front end for sleepcomb.

Subcommands:
    verify-hard          heaviness and richness of a hard instance
    verify-extensible    both extensible-structure properties
    reduce-disjunction   online disjunction learning through a sleeping learner
    reduce-per-action    per-action regret through the ranking reduction
    run-game             a learner against the random adversary
    oracle               solver against enumeration on random rounds

Verdicts and the key=value summary line go to stdout; logs go to stderr.

Exit codes:
    0: Success / PASS
    1: Verification FAIL or runtime error
    2: Usage or validation error
    130: Interrupted
"""

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, NoReturn, Optional

import numpy as np

from sleepcomb import config as settings
from sleepcomb.adversaries import RandomAdversary, random_losses
from sleepcomb.config import DEFAULT_CONFIG_FILE, SleepcombConfig
from sleepcomb.core import (
    best_ranking_bruteforce,
    per_action_regret,
    ranking_regret,
    run_game,
)
from sleepcomb.disjunctions import (
    LabeledStream,
    best_disjunction,
    iid_noisy,
    iid_realizable,
    load_stream,
    parse_disjunction,
    random_disjunction,
)
from sleepcomb.errors import InvalidInstance, SleepcombError, TooLarge
from sleepcomb.extensible import extend, verify_property1, verify_property2
from sleepcomb.graphs import load_graph
from sleepcomb.hard_instances import build_hard, verify_heaviness, verify_richness
from sleepcomb.learners import LearnerConfig, LearnerKind, make_learner
from sleepcomb.logging import get_logger, setup_logging
from sleepcomb.problems import FAMILY_CLASSES, Family, ProblemInstance, random_instance
from sleepcomb.reductions import (
    DisjunctionLearner,
    PerActionWrapper,
    WrapperMode,
    comparator_for_wrapper,
    dphi_regret_sum,
    run_disjunction,
    run_per_action,
)
from sleepcomb.report import (
    CSV_COLUMNS,
    format_summary,
    seed_suffixed,
    sidecar_path,
    write_history_csv,
    write_summary_json,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

FAMILIES = [family.value for family in Family]
LEARNERS = [kind.value for kind in LearnerKind]


class ValidationError(Exception):
    """Raised when user input is invalid; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one CLI run, built from parsed arguments."""

    command: str
    family: Optional[str] = None
    n: Optional[int] = None
    p: Optional[int] = None
    rounds: Optional[int] = None
    seed: Optional[int] = None
    learner: Optional[str] = None
    eta: Optional[float] = None
    adversary: Optional[str] = None
    target: Optional[str] = None
    mode: Optional[str] = None
    p_multiplier: int = 2
    graph: Optional[str] = None
    out: Optional[str] = None
    trials: int = 1
    literal_heaviness: bool = False
    paper_mincut_gadget: bool = False

    RANDOMIZED = ("reduce-disjunction", "reduce-per-action", "run-game", "oracle")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        names = [name for name in cls.__dataclass_fields__ if hasattr(args, name)]
        fields = {name: getattr(args, name) for name in names}
        run = cls(**fields)
        run.validate()
        return run

    def validate(self) -> None:
        """Reject non-positive numbers and randomized runs without a seed.

        Raises:
            ValidationError: On any invalid parameter.
        """
        for name in ("n", "p", "rounds", "trials", "p_multiplier"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValidationError(f"--{name.replace('_', '-')} must be positive, got {value}")
        if self.eta is not None and not self.eta > 0:
            raise ValidationError(f"--eta must be positive, got {self.eta}")
        if self.seed is None and self.command in self.RANDOMIZED:
            raise ValidationError(f"{self.command} needs --seed")
        if self.seed is not None and self.seed < 0:
            raise ValidationError(f"--seed must be non-negative, got {self.seed}")
        if self.trials > 1 and self.out is None:
            raise ValidationError("--trials needs --out for the per-seed files")


def _add_logging_options(parser: argparse.ArgumentParser) -> None:
    log_group = parser.add_argument_group("Logging options")
    log_group.add_argument(
        "--log-level",
        choices=["DEBUG", "VERBOSE", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="Set the logging level (default: $SLEEPCOMB_LOG_LEVEL or WARNING)",
    )
    log_group.add_argument("--log-file", type=str, help="Also write logs to this file")
    log_group.add_argument(
        "-v", "--verbose", action="store_true", help="Equivalent to --log-level VERBOSE"
    )
    log_group.add_argument(
        "-q", "--quiet", action="store_true", help="Equivalent to --log-level ERROR"
    )


def _add_run_options(parser: argparse.ArgumentParser, rounds_required: bool = True) -> None:
    parser.add_argument(
        "--T", dest="rounds", type=int, required=rounds_required, help="Number of rounds"
    )
    parser.add_argument("--seed", type=int, help="Seed for every randomized component")
    parser.add_argument("--out", type=str, help="Per-round CSV path (summary JSON next to it)")
    parser.add_argument(
        "--trials", type=int, default=1, help="Run K seeds (seed, seed+1, ...) in parallel"
    )
    parser.add_argument("--eta", type=float, help="Hedge learning rate override")


def create_argument_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="sleepcomb",
        description="Online sleeping combinatorial optimization: verifiers and reductions.",
        epilog="CSV columns: " + ", ".join(CSV_COLUMNS),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--config",
        type=str,
        default=DEFAULT_CONFIG_FILE,
        help=f"YAML configuration file (default: {DEFAULT_CONFIG_FILE})",
    )
    _add_logging_options(parser)
    commands = parser.add_subparsers(dest="command", required=True)

    hard = commands.add_parser("verify-hard", help="Check heaviness and richness")
    hard.add_argument("--family", choices=FAMILIES, required=True)
    hard.add_argument("--n", type=int, required=True)
    hard.add_argument(
        "--literal-heaviness",
        action="store_true",
        help="Count only the labeled special elements",
    )

    ext = commands.add_parser("verify-extensible", help="Check both extension properties")
    ext.add_argument("--family", choices=FAMILIES, required=True)
    ext.add_argument("--n", type=int, default=1, help="Base hard-instance parameter (default: 1)")
    ext.add_argument("--p", type=int, default=1, help="Number of bit positions (default: 1)")
    ext.add_argument(
        "--paper-mincut-gadget",
        action="store_true",
        help="Use 2p parallel s-t edges for min-cut (fails property 2)",
    )

    disj = commands.add_parser("reduce-disjunction", help="Learn disjunctions online")
    disj.add_argument("--n", type=int, required=True)
    disj.add_argument("--family", choices=FAMILIES, default=Family.K_SUBSETS.value)
    disj.add_argument("--learner", choices=LEARNERS, default=LearnerKind.HEDGE.value)
    disj.add_argument(
        "--adversary",
        default="iid-realizable",
        help="iid-realizable, iid-noisy:<q> or file:<path>",
    )
    disj.add_argument("--target", help="Target disjunction, e.g. 'x1|~x3' (default: random)")
    _add_run_options(disj, rounds_required=False)

    per_action = commands.add_parser("reduce-per-action", help="Per-action regret via rankings")
    per_action.add_argument("--family", choices=FAMILIES, required=True)
    per_action.add_argument("--n", type=int, required=True)
    per_action.add_argument(
        "--inner", dest="learner", choices=LEARNERS, default=LearnerKind.FTL.value
    )
    per_action.add_argument("--mode", choices=[m.value for m in WrapperMode], default="det")
    per_action.add_argument("--p-multiplier", type=int, default=2)
    _add_run_options(per_action)

    game = commands.add_parser("run-game", help="Play a learner against random rounds")
    game.add_argument("--family", choices=FAMILIES, required=True)
    game.add_argument("--n", type=int, help="Hard-instance parameter")
    game.add_argument("--graph", help="Graph file (instead of --n) for graph families")
    game.add_argument("--learner", choices=LEARNERS, default=LearnerKind.HEDGE.value)
    _add_run_options(game)

    oracle = commands.add_parser("oracle", help="Compare solver and enumeration")
    oracle.add_argument("--family", choices=FAMILIES, required=True)
    oracle.add_argument("--n", type=int, help="Use the hard instance (default: random instances)")
    oracle.add_argument("--T", dest="rounds", type=int, default=100, help="Number of checks")
    oracle.add_argument("--seed", type=int)

    return parser


def _load_settings(path: str) -> SleepcombConfig:
    if not os.path.exists(path) and path != DEFAULT_CONFIG_FILE:
        raise ValidationError(f"Config file not found: {path}")
    return SleepcombConfig.from_file(path).with_env_overrides()


def _emit(line: str) -> None:
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def _learner_config(run: RunConfig, loss_scale: float = 1.0) -> LearnerConfig:
    return LearnerConfig(LearnerKind(run.learner), run.eta, run.seed, loss_scale)


def _write_outputs(run: RunConfig, history, summary: Dict[str, Any]) -> None:
    if run.out is None:
        return
    write_history_csv(history, run.out)
    write_summary_json(summary, sidecar_path(run.out))


def _cmd_verify_hard(run: RunConfig) -> int:
    hard = build_hard(Family(run.family), run.n)
    results = [verify_heaviness(hard, literal=run.literal_heaviness), verify_richness(hard)]
    for result in results:
        _emit(result.format())
        logger.info("%s on %s n=%d: %s", result.name, run.family, run.n, result.verdict)
    return EXIT_OK if all(results) else EXIT_FAIL


def _cmd_verify_extensible(run: RunConfig) -> int:
    base = build_hard(Family(run.family), run.n).instance
    ext = extend(base, run.p, paper_mincut_gadget=run.paper_mincut_gadget)
    results = [verify_property1(ext), verify_property2(ext)]
    for result in results:
        _emit(result.format())
        logger.info("%s on %s n=%d p=%d: %s", result.name, run.family, run.n, run.p, result.verdict)
    return EXIT_OK if all(results) else EXIT_FAIL


def _disjunction_stream(run: RunConfig) -> LabeledStream:
    adversary = run.adversary or "iid-realizable"
    if adversary.startswith("file:"):
        try:
            stream = load_stream(adversary[len("file:"):])
        except OSError as e:
            raise ValidationError(f"Cannot read stream file: {e}") from e
        if stream.n != run.n:
            raise ValidationError(f"Stream has n={stream.n}, --n is {run.n}")
        rounds = len(stream) if run.rounds is None else run.rounds
        if rounds > len(stream):
            raise ValidationError(f"Stream has only {len(stream)} rounds, --T is {rounds}")
        return stream.head(rounds)

    if run.rounds is None:
        raise ValidationError("--T is required for generated streams")
    rng = np.random.default_rng(run.seed)
    if run.target is None:
        target = random_disjunction(run.n, rng)
    else:
        try:
            target = parse_disjunction(run.target, run.n)
        except InvalidInstance as e:
            raise ValidationError(str(e)) from e
    if adversary == "iid-realizable":
        return iid_realizable(target, run.rounds, run.seed)
    if adversary.startswith("iid-noisy:"):
        try:
            flip = float(adversary[len("iid-noisy:"):])
        except ValueError:
            raise ValidationError(f"Bad noise level in {adversary!r}") from None
        if not 0.0 <= flip < 0.5:
            raise ValidationError("Noise level must lie in [0, 0.5)")
        return iid_noisy(target, run.rounds, flip, run.seed)
    raise ValidationError(f"Unknown adversary {adversary!r}")


def _cmd_reduce_disjunction(run: RunConfig) -> Dict[str, Any]:
    stream = _disjunction_stream(run)
    hard = build_hard(Family(run.family), run.n)
    n_actions = hard.instance.size()
    learner = make_learner(_learner_config(run, loss_scale=run.n + 1), n_actions, len(stream))
    disj = DisjunctionLearner(run.n, hard=hard, inner=learner)
    result = run_disjunction(disj, stream)
    best, best_errors = best_disjunction(stream)
    bound = 4 * (run.n + 1) * math.sqrt(len(stream) * math.log(max(n_actions, 2)))
    summary = {
        "command": run.command,
        "family": run.family,
        "n": run.n,
        "T": len(stream),
        "seed": run.seed,
        "learner": run.learner,
        "source": stream.source,
        "mistakes": result.mistakes,
        "best_phi": str(best),
        "best_errors": best_errors,
        "regret_best": result.regret(best),
        "dphi_regret_sum": dphi_regret_sum(result, best),
        "sanity_bound": bound,
        "algo_loss": result.history.total_loss(),
    }
    _write_outputs(run, result.history, summary)
    return summary


def _derived_count(wrapper_ext) -> Optional[int]:
    try:
        return len(wrapper_ext.derived.awake_actions(wrapper_ext.permanently_sleeping))
    except TooLarge:
        return None


def _cmd_reduce_per_action(run: RunConfig) -> Dict[str, Any]:
    base = build_hard(Family(run.family), run.n).instance
    learner_settings = _learner_config(run)

    def inner_factory(ext):
        return make_learner(learner_settings, _derived_count(ext), run.rounds)

    wrapper = PerActionWrapper(
        base,
        run.rounds,
        inner_factory,
        WrapperMode(run.mode),
        seed=run.seed,
        p_multiplier=run.p_multiplier,
    )
    adversary = RandomAdversary(base.ground, run.seed)
    history = run_per_action(wrapper, adversary)

    worst_gap = None
    chain_holds = True
    max_regret = None
    for action in base.enumerate():
        regret = per_action_regret(history, action)
        comparator = comparator_for_wrapper(wrapper, action)
        bound = ranking_regret(wrapper.derived_history, comparator)
        chain_holds = chain_holds and regret <= bound
        if max_regret is None or regret > max_regret:
            max_regret, worst_gap = regret, bound - regret
    summary = {
        "command": run.command,
        "family": run.family,
        "n": run.n,
        "T": run.rounds,
        "seed": run.seed,
        "inner": run.learner,
        "mode": run.mode,
        "p": wrapper.p,
        "skipped": history.skipped_count(),
        "algo_loss": history.total_loss(),
        "max_per_action_regret": max_regret,
        "chain_slack": worst_gap,
        "chain_holds": chain_holds,
        "distinct_patterns": len(set(wrapper.patterns)),
    }
    _write_outputs(run, history, summary)
    return summary


def _game_instance(run: RunConfig) -> ProblemInstance:
    family = Family(run.family)
    if run.graph is not None:
        if family in (Family.K_SUBSETS, Family.TRUNCATED_PERM):
            raise ValidationError(f"--graph is not supported for {family.value}")
        try:
            return FAMILY_CLASSES[family](load_graph(run.graph))
        except OSError as e:
            raise ValidationError(f"Cannot read graph file: {e}") from e
    if run.n is None:
        raise ValidationError("run-game needs --n or --graph")
    return build_hard(family, run.n).instance


def _cmd_run_game(run: RunConfig) -> Dict[str, Any]:
    instance = _game_instance(run)
    n_actions = instance.size()
    learner = make_learner(_learner_config(run), n_actions, run.rounds)
    adversary = RandomAdversary(instance.ground, run.seed, instance.loss_range)
    history = run_game(instance, adversary, learner, run.rounds)

    actions = instance.enumerate()
    regrets = [per_action_regret(history, action) for action in actions]
    summary: Dict[str, Any] = {
        "command": run.command,
        "family": run.family,
        "n": run.n,
        "T": run.rounds,
        "seed": run.seed,
        "learner": run.learner,
        "actions": n_actions,
        "skipped": history.skipped_count(),
        "algo_loss": history.total_loss(),
        "expected_loss": history.total_loss(expected=True),
        "max_per_action_regret": max(regrets),
    }
    if n_actions <= settings.current().permutation_cap:
        ranking, _ = best_ranking_bruteforce(history, instance)
        summary["best_ranking_regret"] = ranking_regret(history, ranking, instance)
    _write_outputs(run, history, summary)
    return summary


def _cmd_oracle(run: RunConfig) -> int:
    family = Family(run.family)
    rng = np.random.default_rng(run.seed)
    fixed = build_hard(family, run.n).instance if run.n is not None else None
    sleep_probability = settings.current().sleep_probability
    for check in range(1, run.rounds + 1):
        instance = fixed if fixed is not None else random_instance(family, rng)
        sleeping = frozenset(
            label for label in instance.ground if rng.random() < sleep_probability
        )
        losses = random_losses(
            [label for label in instance.ground if label not in sleeping], rng, instance.loss_range
        )
        solved = instance.min_loss_awake(sleeping, losses)
        brute = instance.min_loss_awake_bruteforce(sleeping, losses)
        agree = (solved is None) == (brute is None) and (
            solved is None
            or (
                solved[1] == brute[1]
                and instance.contains(solved[0])
                and sleeping.isdisjoint(solved[0])
            )
        )
        if not agree:
            _emit(f"oracle: FAIL (check {check}) solver={solved} enumeration={brute}")
            return EXIT_FAIL
    _emit(f"oracle: PASS ({run.rounds} checked)")
    return EXIT_OK


SIMULATIONS = {
    "reduce-disjunction": _cmd_reduce_disjunction,
    "reduce-per-action": _cmd_reduce_per_action,
    "run-game": _cmd_run_game,
}


def run_trial(run: RunConfig, config_data: Dict[str, Any]) -> Dict[str, Any]:
    """Run one simulation; module-level so worker processes can import it."""
    settings.activate(SleepcombConfig.from_dict(config_data))
    return SIMULATIONS[run.command](run)


def _run_simulation(run: RunConfig) -> int:
    config_data = settings.current().to_dict()
    if run.trials == 1:
        _emit(format_summary(run_trial(run, config_data)))
        return EXIT_OK

    runs = [
        replace(run, seed=run.seed + k, out=seed_suffixed(run.out, run.seed + k), trials=1)
        for k in range(run.trials)
    ]
    logger.info("Running %d trials in parallel", len(runs))
    with ProcessPoolExecutor() as pool:
        summaries = list(pool.map(run_trial, runs, [config_data] * len(runs)))
    for summary in summaries:
        _emit(format_summary(summary))
    return EXIT_OK


def run_cli(args_list: Optional[List[str]] = None) -> int:
    """Run the CLI application.

    Args:
        args_list: Optional list of command line arguments (for testing)

    Returns:
        Exit code (0 for success/PASS, 1 for FAIL or error, 2 for usage errors)
    """
    parser = create_argument_parser()
    try:
        args = parser.parse_args(args_list)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.quiet:
        log_level = "ERROR"
    elif args.verbose:
        log_level = "VERBOSE"
    else:
        log_level = args.log_level
    setup_logging(log_level=log_level, log_file=args.log_file)
    logger.debug("CLI arguments: %s", vars(args))

    try:
        settings.activate(_load_settings(args.config))
        run = RunConfig.from_args(args)
        logger.debug("Run configuration: %s", asdict(run))
    except (ValidationError, InvalidInstance) as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_USAGE

    try:
        logger.info("Starting %s", run.command)
        if run.command == "verify-hard":
            return _cmd_verify_hard(run)
        if run.command == "verify-extensible":
            return _cmd_verify_extensible(run)
        if run.command == "oracle":
            return _cmd_oracle(run)
        return _run_simulation(run)
    except ValidationError as e:
        logger.error("Invalid arguments: %s", e)
        return EXIT_USAGE
    except SleepcombError as e:
        logger.error("%s failed: %s", run.command, e)
        return EXIT_FAIL
    except Exception:
        logger.exception("Unexpected error during %s", run.command)
        return EXIT_FAIL


def main() -> NoReturn:
    """Main entry point for the CLI application."""
    try:
        sys.exit(run_cli())
    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        sys.exit(EXIT_INTERRUPTED)
    except Exception:
        logger.exception("Fatal error occurred")
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":
    main()
