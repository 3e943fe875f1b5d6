"""Command-line interface for treemax."""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

import immutabledict

from treemax.checkers.levels import ApCondition, LevelwiseCondition, MsCondition
from treemax.checkers.pairs import rho_optimize
from treemax.checkers.sawyer import SawyerCondition
from treemax.checkers.search import ExtremalCondition, SuffCondCondition
from treemax.core.conditions import BaseCondition, ConditionReport
from treemax.core.errors import (
    AdmissibilityError,
    BudgetExceededError,
    ConfigError,
    CrossCheckError,
    HorizonError,
)
from treemax.core.geometry import KaryTree
from treemax.experiments.runner import ExperimentRunner
from treemax.experiments.tables import ResultTable
from treemax.selftest import run_suites
from treemax.utils.config import RunConfig
from treemax.utils.io import (
    hashed_params,
    output_stem,
    read_config_dict,
    render_report,
    render_table,
    write_report,
    write_table,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

# Flag name -> RunConfig field
_FLAGS = immutabledict.immutabledict({
    "k": ("k", int, "Branching number of the tree."),
    "p": ("p", float, "Exponent p > 1."),
    "q": ("q", float, "Strong-type exponent q >= p."),
    "delta": ("delta", float, "Level-wise exponent delta < 1."),
    "s": ("s", float, "Exponent s >= 1 of M_s."),
    "beta": ("beta", float, "Pair-condition exponent beta in (0, 1)."),
    "alpha": ("alpha", float, "Pair-condition exponent alpha in [beta, p)."),
    "weight": ("weight", str, "Level weight: power:a=<rational> or table:[v0,v1,...] (log_k values)."),
    "jmax": ("j_max", int, "Largest level scanned."),
    "rmax": ("r_max", int, "Largest radius scanned."),
    "depth": ("depth", int, "Truncation depth of searched vertex sets."),
    "truncation": ("truncation_depth", int, "Truncation depth of the tree for ball scans."),
    "centers": ("centers", int, "Deepest ball center in the testing scan."),
    "radii": ("radii", int, "Largest ball radius in the testing scan."),
    "horizon": ("level_horizon", int, "Level horizon of profile computations."),
    "windows": ("windows", str, "Comma-separated window lengths, e.g. 25,50."),
    "geometry": ("geometry", str, "Averaging sets of the A_p product: sphere or ball."),
    "budget": ("budget", int, "Maximum number of candidate evaluations."),
    "seed": ("seed", int, "Random seed."),
    "j": ("j", int, "Level of the test function."),
    "r": ("r", int, "Radius."),
    "wE": ("wE", float, "Weight of E."),
    "wF": ("wF", float, "Weight of F."),
    "out": ("out", str, "Directory for output files."),
    "format": ("format", str, "Output format: csv or json."),
    "mode": ("mode", str, "report, or assert against --constant."),
    "constant": ("constant", float, "Constant checked in assert mode."),
})


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    for flag, (dest, kind, help_text) in _FLAGS.items():
        parser.add_argument(f"--{flag}", dest=dest, type=kind, default=None, help=help_text)
    parser.add_argument("--linear", action="store_true", default=None,
                        help="Print magnitudes as k**value instead of log base k.")
    parser.add_argument("--selftest", action="store_true",
                        help="Run the oracle-equivalence suite of this command and exit.")
    parser.add_argument("--config", type=str, help="Path to a flat key=value config file.")
    parser.add_argument("--verbose", action="store_true", default=None, help="Enable verbose logging.")
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Returns:
        Parsed arguments.
    """
    parser = argparse.ArgumentParser(
        prog="treemax",
        description="Weighted maximal operators on the rooted k-ary tree.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=command.help, description=command.help)
    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file and command-line flags, in that order.

    Raises:
        ConfigError: On a malformed config file or value.
        AdmissibilityError: On inadmissible exponents.
    """
    config_dict: Dict[str, Any] = {}
    if args.config:
        config_dict.update(read_config_dict(args.config))
    for dest, _, _ in _FLAGS.values():
        value = getattr(args, dest)
        if value is not None:
            config_dict[dest] = value
    for dest in ("linear", "verbose"):
        if getattr(args, dest):
            config_dict[dest] = True
    return RunConfig.from_dict(config_dict).validate()


def setup_logging(verbose: bool) -> None:
    """Set up logging.

    Args:
        verbose: Whether to enable verbose logging.
    """
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def _emit_report(report: ConditionReport, config: RunConfig, name: str) -> int:
    print(render_report(report, "json", config.linear), end="")
    if config.out:
        stem = output_stem(name, config.k, config.p, hashed_params(config))
        path = write_report(report, config.out, stem, config.format, config.linear)
        logging.info(f"Generated: {path}")
    if config.mode == "assert" and report.violates(config.constant):
        print(
            f"Assertion failed: sup {report.empirical_sup:.6g} > {config.constant} "
            f"at witness {json.dumps(report.witness, sort_keys=True)}",
            file=sys.stderr,
        )
        return EXIT_VIOLATION
    return EXIT_OK


def _emit_table(table: ResultTable, config: RunConfig) -> int:
    print(render_table(table, config.format, config.linear), end="")
    if config.out:
        stem = output_stem(table.name, table.k, config.p, hashed_params(config))
        path = write_table(table, config.out, stem, config.format, config.linear)
        logging.info(f"Generated: {path}")
    return EXIT_OK


def _kwargs(config: RunConfig, **names: str) -> Dict[str, Any]:
    """Keyword arguments from config fields that are set, keyed by parameter name."""
    return {param: getattr(config, field) for param, field in names.items() if getattr(config, field) is not None}


def _check(condition: BaseCondition, config: RunConfig, name: str) -> int:
    logging.info(f"Checking {condition.condition_id} with {condition.get_condition_args()}")
    report = condition.check(KaryTree(config.k))
    return _emit_report(report, config, name)


def run_check_levelwise(config: RunConfig) -> int:
    condition = LevelwiseCondition(
        config.level_weight(), config.p, config.params().require("delta").delta,
        **_kwargs(config, j_max="j_max", r_max="r_max"),
    )
    return _check(condition, config, "levelwise")


def run_check_ap(config: RunConfig) -> int:
    condition = ApCondition(
        config.level_weight(), config.p, config.geometry, **_kwargs(config, j_max="j_max", r_max="r_max")
    )
    return _check(condition, config, f"ap_{config.geometry}")


def run_check_ms(config: RunConfig) -> int:
    condition = MsCondition(
        config.level_weight(), config.params().require("s").s,
        **_kwargs(config, j_max="j_max", horizon="level_horizon"),
    )
    return _check(condition, config, "ms")


def run_check_sawyer(config: RunConfig) -> int:
    condition = SawyerCondition(
        config.level_weight(), config.p,
        **_kwargs(config, center_depths="centers", radii="radii", truncation_depth="truncation_depth"),
    )
    return _check(condition, config, "sawyer")


def _search_kwargs(config: RunConfig) -> Dict[str, Any]:
    kwargs = _kwargs(config, budget="budget", depth="depth")
    depth = kwargs.get("depth", 4)
    if config.r_max is not None:
        kwargs["r_max"] = min(config.r_max, 2 * depth)
    kwargs["seed"] = config.seed
    return kwargs


def run_check_suffcond(config: RunConfig) -> int:
    params = config.params().require("beta", "alpha")
    condition = SuffCondCondition(config.level_weight(), params, **_search_kwargs(config))
    return _check(condition, config, "suffcond")


def run_search_extremal(config: RunConfig) -> int:
    params = config.params().require("beta", "alpha")
    condition = ExtremalCondition(config.level_weight(), params, **_search_kwargs(config))
    return _check(condition, config, "extremal")


def run_rho_optimize(config: RunConfig) -> int:
    if config.wE is None or config.wF is None:
        raise ConfigError("rho-optimize needs --wE and --wF")
    delta = config.params().require("delta").delta
    r = config.r if config.r is not None else 0
    optimum = rho_optimize(config.p, delta, r, config.wE, config.wF, config.k)
    payload = {"rho": optimum.rho, "constant": optimum.constant}
    if config.linear:
        payload.update(value=optimum.value, bound=optimum.bound)
    else:
        payload.update(value_logk=optimum.log_value, bound_logk=optimum.log_bound)
    print(json.dumps(payload, indent=4, sort_keys=True))
    return EXIT_OK


def _experiment(experiment_id: str, **names: str) -> Callable[[RunConfig], int]:
    def run(config: RunConfig) -> int:
        kwargs = _kwargs(config, k="k", p="p", **names)
        runner = ExperimentRunner()
        table = runner.run(experiment_id, **kwargs)
        if config.verbose:
            runner.print_summary(table, file=sys.stderr)
        return _emit_table(table, config)
    return run


def run_geometry_selftest(config: RunConfig) -> int:
    results = run_suites(["geometry", "operators"])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


class _Command:
    def __init__(self, handler: Callable[[RunConfig], int], suites: List[str], help_text: str):
        self.handler = handler
        self.suites = suites
        self.help = help_text


COMMANDS = immutabledict.immutabledict({
    "geometry-selftest": _Command(
        run_geometry_selftest, ["geometry", "operators"],
        "Closed-form sphere and ball counts and operators against enumeration."),
    "check-suffcond": _Command(
        run_check_suffcond, ["conditions"],
        "Pair condition w-measure of {d(x,y)=r} <~ k^(r beta) w(E)^(alpha/p) w(F)^(1-alpha/p) on level slices."),
    "check-levelwise": _Command(
        run_check_levelwise, ["conditions"],
        "Level-wise condition w(T_i ∩ S(x,r)) <~ k^((r+i-j)(p-delta)/2) k^(r delta) w(x)."),
    "check-ap": _Command(
        run_check_ap, ["conditions"], "A_p product over spheres or balls."),
    "check-ms": _Command(
        run_check_ms, ["conditions"], "M_s w <~ w with a certified radius tail."),
    "check-sawyer": _Command(
        run_check_sawyer, ["conditions"], "Sawyer testing condition over a family of balls."),
    "search-extremal": _Command(
        run_search_extremal, ["conditions"], "Extremal-set search for the pair condition."),
    "exp-thmneg1": _Command(
        _experiment("thmneg1", delta="delta", j_max="j_max", s="s"), ["experiments"],
        "Sphere A_p blow-up of k^(-delta j) while M_s w <~ w."),
    "exp-neg2": _Command(
        _experiment("neg2", j="j", windows="windows", horizon="level_horizon"), ["experiments"],
        "Strong (p,p) failure of M° for k^((p-1)j) on the indicator of T_j."),
    "exp-kalpha": _Command(
        _experiment("kalpha", j_max="j_max", r_max="r_max", horizon="level_horizon"), ["experiments"],
        "Level-wise condition of k^((p-1)j) at delta = 1-p with strong, weak and dual tables."),
    "exp-a1ap": _Command(
        _experiment("a1ap", weight="weight", s="s", j_max="j_max", depth="depth", horizon="level_horizon"),
        ["experiments"],
        "M_s w <~ w, the implied pair condition, series of sphere averages and dual strong type."),
    "exp-sawyer": _Command(
        _experiment("sawyer", truncation="truncation_depth", center_depth_max="centers",
                    radius_max="radii", j="j", windows="windows"),
        ["experiments"],
        "Sawyer testing constant next to failing strong (p,p) partial sums."),
    "rho-optimize": _Command(
        run_rho_optimize, ["conditions"], "Closed-form minimizer of the pairing bound in rho."),
})


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = parse_args(argv)
    try:
        config = load_config(args)
    except (ConfigError, AdmissibilityError) as e:
        print(f"treemax: {e}", file=sys.stderr)
        return EXIT_CONFIG

    setup_logging(config.verbose)
    logging.debug(f"Configuration: {config}")
    command = COMMANDS[args.command]

    if args.selftest:
        results = run_suites(command.suites)
        return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION

    try:
        return command.handler(config)
    except (ConfigError, AdmissibilityError, HorizonError, BudgetExceededError) as e:
        print(f"treemax: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CrossCheckError as e:
        print(f"treemax: cross-check failed: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
