"""
Command line interface for subcut
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click
from click.core import ParameterSource

from .config import RunSpec, load_config_file, merge_config, parse_widths
from .core import CutExperiment, RunSummary, format_summary, run_spec
from .cutopt import RunTrace
from .errors import (
    ConfigError,
    DimensionError,
    FormatVersionError,
    GeneratorError,
    InstanceFormatError,
    InstanceValidationError,
    LogDomainError,
    LpError,
)
from .milp import load_instance, save_instance
from .net import save_checkpoint
from .types import BnbStatus, ExitCode

USAGE_ERRORS = (
    ConfigError,
    DimensionError,
    FormatVersionError,
    GeneratorError,
    InstanceFormatError,
    InstanceValidationError,
)
NUMERICAL_ERRORS = (LpError, LogDomainError, ArithmeticError)

# option name -> config key, for values taken from the command line only when given
_CONFIG_OPTIONS = {
    "widths": "widths",
    "init": "init",
    "variant": "variant",
    "alpha": "alpha",
    "beta": "beta",
    "max_steps": "max_steps",
    "max_inner": "max_inner",
    "max_outer": "max_outer",
    "conv_tol": "conv_tol",
    "conv_window": "conv_window",
    "seed": "seed",
    "node_limit": "node_limit",
    "jobs": "jobs",
    "frac_tol": "frac_tol",
    "timing": "timing",
}


def _fail(error: Exception, code: ExitCode):
    click.echo(f"Error: {error}", err=True)
    sys.exit(code)


def _resolve_config(ctx: click.Context, config_path: Optional[str]) -> Dict[str, Any]:
    """Defaults, then --config, then flags given explicitly on this command line"""
    overrides = {}
    for name, key in _CONFIG_OPTIONS.items():
        if name in ctx.params and ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE:
            value = ctx.params[name]
            overrides[key] = parse_widths(value) if key == "widths" else value
    file_config = load_config_file(Path(config_path)) if config_path else None
    return merge_config(file_config, overrides)


def _parse_params(pairs: Tuple[str, ...]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise GeneratorError(f"Expected key=value, got {pair!r}")
        if raw.lower() == "none":
            params[key] = None
            continue
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError as e:
                raise GeneratorError(f"Parameter {key} needs a number, got {raw!r}") from e
    return params


@click.group()
@click.option("--verbose", "-v", count=True, help="Log progress to stderr (-vv for debug)")
def main(verbose):
    """Subadditive Cut Optimizer - learn GMI cut weights by gradient descent"""
    if verbose:
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.DEBUG if verbose > 1 else logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )


@main.command()
@click.argument("family", type=click.Choice(["setcover", "indepset", "mixed"]))
@click.option("--param", "-p", "params", multiple=True, help="Generator parameter key=value")
@click.option("--seed", type=int, default=0, show_default=True, help="Random seed")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Instance file")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def generate(ctx, family, params, seed, out, config_path):
    """Generate a seeded benchmark instance"""
    try:
        config = _resolve_config(ctx, config_path)
        experiment = CutExperiment(config)
        instance = experiment.generate(family, config["seed"], _parse_params(params))
        save_instance(instance, Path(out))
    except USAGE_ERRORS as e:
        _fail(e, ExitCode.USAGE)
    except OSError as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)

    click.echo(f"🧩 {experiment.generators[family].describe(instance)} -> {out}")


@main.command()
@click.option("--instance", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--rounds", type=int, default=None, help="Number of GMI rounds K")
@click.option("--widths", default=None, help="Comma list of widths, 'all' keeps every cut")
@click.option("--frac-tol", type=float, default=None, help="Fractionality threshold")
@click.option("--node-limit", type=int, default=None, help="B&B budget for the reference optimum")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Checkpoint file")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def baseline(ctx, instance, rounds, widths, frac_tol, node_limit, out, config_path):
    """Classical GMI rounds: per-round dual bound and gap"""
    try:
        config = _resolve_config(ctx, config_path)
        round_widths: List[Optional[int]] = list(config["widths"])
        if rounds is not None:
            if rounds < 1:
                raise ConfigError("--rounds must be at least 1")
            if len(round_widths) == 1:
                round_widths = round_widths * rounds
            elif len(round_widths) != rounds:
                raise ConfigError(f"{len(round_widths)} widths given for {rounds} rounds")
        experiment = CutExperiment(config)
        milp = load_instance(Path(instance))
        result = experiment.baseline(milp, round_widths)
        if out:
            save_checkpoint(result.net, Path(out))
    except USAGE_ERRORS as e:
        _fail(e, ExitCode.USAGE)
    except NUMERICAL_ERRORS as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)
    except OSError as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)

    for index, bound in enumerate(result.bounds):
        label = "LP" if index == 0 else f"round {index}"
        gap = result.gap(bound)
        gap_text = "" if gap is None else f", gap {gap:.6g}"
        click.echo(f"{label}: bound {bound:.10g}{gap_text}")
    if result.optimum is not None:
        click.echo(f"Optimum: {result.optimum:.10g}")


def _output_paths(
    instances: List[Path], trace: Optional[str], out: Optional[str]
) -> List[Tuple[Optional[Path], Optional[Path]]]:
    """One (trace, checkpoint) pair per instance; several instances use directories"""
    if len(instances) == 1:
        return [(Path(trace) if trace else None, Path(out) if out else None)]
    for directory in (trace, out):
        if directory:
            Path(directory).mkdir(parents=True, exist_ok=True)
    return [
        (
            Path(trace) / f"{path.stem}.csv" if trace else None,
            Path(out) / f"{path.stem}.json" if out else None,
        )
        for path in instances
    ]


@main.command()
@click.option(
    "--instance",
    "instances",
    type=click.Path(exists=True, dir_okay=False),
    multiple=True,
    required=True,
    help="Instance file (repeatable)",
)
@click.option("--trace", default=None, help="Trace CSV (directory with several instances)")
@click.option("--out", default=None, help="Best-net checkpoint (directory with several instances)")
@click.option("--widths", default="32", help="Comma list of layer widths")
@click.option("--init", type=click.Choice(["gmi", "random"]), default="gmi")
@click.option("--variant", type=click.Choice(["gmi", "log"]), default="gmi")
@click.option("--alpha", type=float, default=1e-3, help="Learning rate")
@click.option("--beta", type=float, default=1e-4, help="Noise scale")
@click.option("--max-steps", type=int, default=2000, help="Total gradient-step budget")
@click.option("--max-inner", type=int, default=1000, help="Gradient steps per LP solve")
@click.option("--max-outer", type=int, default=100000, help="LP solve budget")
@click.option("--conv-tol", type=float, default=1e-6)
@click.option("--conv-window", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("--frac-tol", type=float, default=1e-3)
@click.option("--timing/--no-timing", default=False, help="Record wall-clock seconds")
@click.option("--jobs", type=int, default=1, help="Parallel worker processes")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def optimize(ctx, instances, trace, out, config_path, **_):
    """Run two-step optimization from a GMI or random start"""
    try:
        config = _resolve_config(ctx, config_path)
        paths = [Path(p) for p in instances]
        outputs = _output_paths(paths, trace, out)
        specs = [
            RunSpec.from_config(config, path, trace=trace_path, out=out_path)
            for path, (trace_path, out_path) in zip(paths, outputs)
        ]
        if config["jobs"] > 1 and len(specs) > 1:
            with ProcessPoolExecutor(max_workers=config["jobs"]) as pool:
                summaries: List[RunSummary] = list(
                    pool.map(run_spec, specs, [config] * len(specs))
                )
        else:
            experiment = CutExperiment(config)
            summaries = [experiment.optimize(spec) for spec in specs]
    except USAGE_ERRORS as e:
        _fail(e, ExitCode.USAGE)
    except NUMERICAL_ERRORS as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)
    except OSError as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)

    for summary in summaries:
        click.echo(format_summary(summary))


@main.command("solve-exact")
@click.option("--instance", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--node-limit", type=int, default=10000, show_default=True)
@click.option("--write-optimum", is_flag=True, help="Store known_optimum in the instance file")
@click.option("--node-log", type=click.Path(dir_okay=False), default=None, help="Node log file")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.pass_context
def solve_exact(ctx, instance, node_limit, write_optimum, node_log, config_path):
    """Branch and bound to the exact MILP optimum"""
    try:
        experiment = CutExperiment(_resolve_config(ctx, config_path))
        milp = load_instance(Path(instance))
        if node_log:
            with open(node_log, "w") as stream:
                result = experiment.solve_exact(milp, node_log=stream)
        else:
            result = experiment.solve_exact(milp)
    except USAGE_ERRORS as e:
        _fail(e, ExitCode.USAGE)
    except NUMERICAL_ERRORS as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)
    except (OSError, ValueError) as e:
        _fail(e, ExitCode.NUMERICAL_FAILURE)

    if result.status == BnbStatus.INFEASIBLE:
        click.echo(f"❌ Infeasible ({result.nodes} nodes)")
        sys.exit(ExitCode.INFEASIBLE)

    if result.status == BnbStatus.NODE_LIMIT:
        click.echo(f"⏱️  Node limit reached after {result.nodes} nodes")
        click.echo(f"Lower bound: {result.lower_bound:.10g}")
        if result.incumbent is not None:
            click.echo(f"Incumbent: {result.optimum:.10g} at x={_format_point(result.incumbent)}")
        else:
            click.echo("Incumbent: none")
        sys.exit(ExitCode.NODE_LIMIT)

    click.echo(f"✅ Optimum: {result.optimum:.10g} ({result.nodes} nodes)")
    click.echo(f"x = {_format_point(result.incumbent)}")
    if write_optimum:
        try:
            save_instance(milp.with_known_optimum(result.optimum), Path(instance))
        except OSError as e:
            _fail(e, ExitCode.NUMERICAL_FAILURE)
        click.echo(f"Wrote known_optimum to {instance}")


def _format_point(incumbent) -> str:
    x, _ = incumbent
    return "(" + ", ".join(f"{v:g}" for v in x) + ")"


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", type=click.Choice(["text", "json"]), default="text", help="Output format")
@click.option("--name", default=None, help="Run name shown in the report")
def report(trace_path, format, name):
    """Summarize a trace CSV"""
    try:
        trace = RunTrace.read_csv(Path(trace_path))
    except (ValueError, KeyError) as e:
        _fail(e, ExitCode.USAGE)
    if not trace.records:
        _fail(ValueError(f"{trace_path} has no records"), ExitCode.USAGE)

    click.echo(CutExperiment().report_trace(trace, name or Path(trace_path).stem, format))


if __name__ == "__main__":
    main()
