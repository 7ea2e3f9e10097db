"""
app.py
------
Command-line entry point.

    python app.py --config config/recipes/ensemble_m1_desk.yaml --seed 7 ensemble
    python app.py --seed 7 --out out/report report --network net.json
    python app.py annealed

Precedence: command-line flags > recipe values > RBN_* environment defaults.
Exit codes: 0 success, 1 usage / configuration / input-file error, 2 runtime failure.
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError

from src.experiments.generate_networks import generate_networks
from src.experiments.supervisor import ExperimentSupervisor
from src.network.errors import ConfigError, NetworkFileError
from src.schema.experiment_models import MAX_SEED, ExperimentConfig
from src.utils.logger import get_logger, pretty_print

logger = get_logger("src.app")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


@dataclass
class GlobalOptions:
    config_path: Optional[str]
    seed: Optional[int]
    out_dir: Optional[str]
    threads: Optional[int]
    fmt: Optional[str]


class ExitCodeGroup(click.Group):
    """Maps failures onto the documented exit codes."""

    def parse_args(self, ctx, args):
        try:
            return super().parse_args(ctx, args)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except (ConfigError, ValidationError, NetworkFileError) as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(EXIT_USAGE)
        except Exception as e:
            logger.exception("run failed")
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            ctx.exit(EXIT_RUNTIME)


def load_config(opts: GlobalOptions, kind: str, check_kind: bool = True, **fields: Any) -> ExperimentConfig:
    overrides: Dict[str, Any] = {
        "seed": opts.seed,
        "threads": opts.threads,
        "out_dir": opts.out_dir,
        "format": opts.fmt,
        **fields,
    }
    if opts.config_path:
        config = ExperimentConfig.from_yaml(opts.config_path, defaults={"kind": kind}, **overrides)
    else:
        config = ExperimentConfig.model_validate(
            {"kind": kind, **{k: v for k, v in overrides.items() if v is not None}}
        )
    if check_kind and config.kind != kind:
        raise ConfigError(f"recipe is for {config.kind!r}, not {kind!r}")
    return config


def run_kind(ctx: click.Context, kind: str, **fields: Any):
    config = load_config(ctx.obj, kind, **fields)
    result = ExperimentSupervisor().run(config, Path(config.out_dir))
    pretty_print(kind, result.summary)


@click.group(cls=ExitCodeGroup)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML experiment recipe.")
@click.option("--seed", type=click.IntRange(0, MAX_SEED - 1), help="Master seed (u64).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--threads", type=click.IntRange(min=1), help="Worker processes.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Table format.")
@click.pass_context
def cli(ctx, config_path, seed, out_dir, threads, fmt):
    """Random Boolean network sensitivity experiments."""
    ctx.obj = GlobalOptions(config_path, seed, out_dir, threads, fmt)


@cli.command()
@click.pass_context
def gen(ctx):
    """Write generated networks as network files."""
    # any recipe with families will do
    config = load_config(ctx.obj, "ensemble_DA_SA", check_kind=False)
    paths = generate_networks(config, Path(config.out_dir))
    click.echo(f"wrote {len(paths)} networks to {Path(config.out_dir) / 'networks'}")


@cli.command()
@click.option("--network", "network_path", type=click.Path(dir_okay=False), help="Network file to analyze.")
@click.option("--dump-cycles", is_flag=True, help="Include cycle states in the attractor table.")
@click.pass_context
def report(ctx, network_path, dump_cycles):
    """DA, SA and attractors of a single network."""
    run_kind(ctx, "single_net_report", network_path=network_path, dump_cycles=dump_cycles or None)


@cli.command()
@click.pass_context
def ensemble(ctx):
    """DA and SA over network ensembles."""
    run_kind(ctx, "ensemble_DA_SA")


@cli.command("critical-scan")
@click.pass_context
def critical_scan(ctx):
    """Ensembles on the critical curve for a range of k."""
    run_kind(ctx, "critical_scan")


@cli.command()
@click.pass_context
def m5m6(ctx):
    """Theory vs experiment for the complementary function sets."""
    run_kind(ctx, "m5m6_table")


@cli.command()
@click.pass_context
def annealed(ctx):
    """Annealed fixed points of the bias map."""
    run_kind(ctx, "annealed")


@cli.command()
@click.pass_context
def avalanche(ctx):
    """Gene knock-out avalanches."""
    run_kind(ctx, "avalanche")


@cli.command()
@click.option("--avalanche-csv", type=click.Path(dir_okay=False), help="Reuse an avalanches.csv instead of simulating.")
@click.pass_context
def ratio(ctx, avalanche_csv):
    """Ratio test of avalanche distributions across SA_i bins."""
    fields = {}
    if avalanche_csv:
        config = load_config(ctx.obj, "ratio_test")
        fields["ratio"] = {**config.ratio.model_dump(), "avalanche_csv": avalanche_csv}
    run_kind(ctx, "ratio_test", **fields)


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="app.py", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
