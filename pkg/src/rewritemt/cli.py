"""Command-line entry points for the rewriting pipeline.

Each stage is a subcommand; `run` executes several in dependency order.
Exit codes: 0 success, 2 configuration error, 3 backend failure, 4 data
error.
"""

from __future__ import annotations

import logging
import sys

import click

from .config import PipelineConfig
from .corpus import LanguagePair
from .errors import (
    BackendError,
    BackendTimeout,
    BackendUnreachable,
    ConfigError,
    RewriteMtError,
)
from .pipeline import STAGES, Pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_DATA = 4

DEFAULT_RUN_STAGES = "rewrite,translate,score,select,evaluate,readability,pareto,report"


def _common_options(func):
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="JSON config file (see README for keys)."),
        click.option("--corpus", "corpus_path", type=click.Path(), required=True,
                     help="Line-delimited segment file."),
        click.option("--out", "out_dir", type=click.Path(), required=True,
                     help="Output directory for stage record files."),
        click.option("--pair", "pair_text", default=None,
                     help="Language pair like en-de (required without --config)."),
        click.option("--seed", type=int, default=None, help="Override config seed."),
        click.option("--force", is_flag=True, help="Regenerate even if outputs exist."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load_config(config_path, pair_text, seed) -> PipelineConfig:
    if config_path:
        config = PipelineConfig.from_file(config_path)
        if pair_text:
            config = PipelineConfig.from_dict(
                dict(_config_as_dict(config), pair=pair_text))
    elif pair_text:
        config = PipelineConfig(pair=LanguagePair.parse(pair_text))
    else:
        raise ConfigError("either --config or --pair is required")
    if seed is not None:
        config.seed = seed
    return config


def _config_as_dict(config: PipelineConfig) -> dict:
    return {
        "pair": str(config.pair),
        "methods": list(config.methods),
        "backends": config.backends,
        "generation_backend": config.generation_backend,
        "mt_backend": config.mt_backend,
        "scorer_backend": config.scorer_backend,
        "metricx_backend": config.metricx_backend,
        "cache_dir": config.cache_dir,
        "seed": config.seed,
        "max_inflight": config.max_inflight,
        "max_tokens": config.max_tokens,
        "selection_method": config.selection_method,
        "selection_mode": config.selection_mode,
        "postedit_modes": list(config.postedit_modes),
        "humaneval_pairwise": config.humaneval_pairwise,
        "humaneval_likert": config.humaneval_likert,
    }


def _execute(stages, config_path, corpus_path, out_dir, pair_text, seed, force) -> int:
    try:
        config = _load_config(config_path, pair_text, seed)
        pipeline = Pipeline(config, corpus_path, out_dir, force=force)
        executed = pipeline.run(stages)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except (BackendUnreachable, BackendError, BackendTimeout) as exc:
        click.echo(f"backend failure: {exc}", err=True)
        return EXIT_BACKEND
    except (RewriteMtError, ValueError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    ran = ", ".join(executed) if executed else "nothing (outputs already present)"
    click.echo(f"done: {ran}")
    return EXIT_OK


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info-level logging.")
def cli(verbose):
    """Batch harness for input rewriting, selection, and MT evaluation."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


def _stage_command(stage: str, help_text: str):
    @cli.command(name=stage, help=help_text)
    @_common_options
    def command(config_path, corpus_path, out_dir, pair_text, seed, force):
        sys.exit(_execute([stage], config_path, corpus_path, out_dir,
                          pair_text, seed, force))
    return command


_stage_command("rewrite", "Generate rewrites for every segment and method.")
_stage_command("translate", "Translate originals and rewrites.")
_stage_command("score", "Score inputs and translations with the configured metrics.")
_stage_command("select", "Pick original vs rewrite per segment by translatability.")
_stage_command("postedit", "Post-edit translations (Owo / Ow / I+O modes).")
_stage_command("ftdata", "Build the positive-rewrite fine-tuning dataset and SFT files.")
_stage_command("evaluate", "Aggregate scores into evaluation rows with significance.")
_stage_command("readability", "Compute readability indices for inputs and outputs.")
_stage_command("pareto", "Compute the translatability/meaning-preservation frontier.")
_stage_command("humaneval", "Summarize human annotation exports.")
_stage_command("report", "Render the report from persisted stage outputs.")


@cli.command(name="run", help="Run several stages in dependency order.")
@_common_options
@click.option("--stages", "stages_text", default=DEFAULT_RUN_STAGES,
              show_default=True, help="Comma-separated stage list.")
def run_command(config_path, corpus_path, out_dir, pair_text, seed, force, stages_text):
    stages = [s.strip() for s in stages_text.split(",") if s.strip()]
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        click.echo(f"config error: unknown stages {unknown}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(_execute(stages, config_path, corpus_path, out_dir, pair_text, seed, force))


def main():
    cli()


if __name__ == "__main__":
    main()
