"""
Command-line entry point.

Results go to stdout as JSON (or aligned tables with ``--pretty``); logs
and structured error documents go to stderr. Exit codes: 0 on success, 2
for usage and configuration errors, 1 for failures while running.
"""

from __future__ import annotations

import json
import logging
import sys
from argparse import ArgumentParser
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import IO, TYPE_CHECKING, Any, NoReturn

from pyage.ablation import (
    compare_variants,
    format_table,
    k_sweep,
    run_ablation,
    run_clustering,
    run_link_prediction,
)
from pyage.config import VARIANTS, RunConfig
from pyage.data import load_dataset, resolve_dataset
from pyage.errors import AgeError, ConfigurationError
from pyage.evaluation import SelectionContext, score_dbi
from pyage.export import staged_directory, write_json, write_matrix_tsv, write_snapshots
from pyage.graph import laplacians
from pyage.spectral import spectrum_summary
from pyage.variant import make_variant
from pyage.variants.base import smoothed_features

if TYPE_CHECKING:
    from argparse import Namespace
    from collections.abc import Sequence

    from pyage.ablation import ResultRow
    from pyage.graph import Graph
    from pyage.smoothing import KMode

log = logging.getLogger(__file__)

__all__ = ("CommandOutcome", "UsageError", "build_parser", "dispatch", "main")


class UsageError(ConfigurationError):
    """Bad command line."""


@dataclass
class CommandOutcome:
    """
    Result of one command.

    Attributes:
        exit_code: 0 iff the command succeeded.
        artifacts: files written by the command.
        metrics: the JSON document printed on stdout, if any.
    """

    exit_code: int
    artifacts: list[Path] = field(default_factory=list)
    metrics: dict[str, Any] | None = None


class _Parser(ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _k_value(text: str) -> KMode:
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"--k must be 'auto' or a number, got {text!r}") from None


def _k_list(text: str) -> list[KMode]:
    return [_k_value(item.strip()) for item in text.split(",") if item.strip()]


def build_parser() -> ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--config",
        help="RunConfig JSON file, or 'defaults' for the dataset preset",
    )
    common.add_argument("--dataset", help="dataset name or path, or 'sbm'")
    common.add_argument("--data-dir", help="dataset root (default $AGE_DATA_DIR)")
    common.add_argument("--t", type=int, help="number of filter layers")
    common.add_argument("--k", type=_k_value, help="filter coefficient or 'auto'")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--variant", choices=VARIANTS)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--verbose", action="store_true", help="log progress")

    parser = _Parser(prog="pyage", description="Adaptive graph encoder")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser(
        "embed", parents=[common], help="train and write embedding snapshots"
    )
    commands.add_parser(
        "cluster", parents=[common], help="node clustering with DBI selection"
    )
    commands.add_parser(
        "linkpred", parents=[common], help="link prediction on held-out edges"
    )
    spectrum = commands.add_parser(
        "spectrum", parents=[common], help="eigenvalue summary of the Laplacian"
    )
    spectrum.add_argument(
        "--smoothed", action="store_true", help="also write the smoothed features"
    )
    spectrum.add_argument(
        "--estimate-only", action="store_true", help="skip the histogram"
    )
    commands.add_parser("ablate", parents=[common], help="ablation ladder table")
    commands.add_parser("variants", parents=[common], help="compare the variants")
    ksweep = commands.add_parser(
        "ksweep", parents=[common], help="clustering for several filter coefficients"
    )
    ksweep.add_argument(
        "--ks",
        type=_k_list,
        default=[0.5, 2 / 3, 1.0, "auto"],
        help="comma-separated coefficients, 'auto' for 1/lambda_max",
    )
    return parser


def load_config(args: Namespace) -> RunConfig:
    """Config file or dataset preset, then the command-line overrides."""
    if args.config in (None, "defaults"):
        config = RunConfig.for_dataset(args.dataset)
    else:
        config = RunConfig.from_json(args.config)
    mode = "linkpred" if args.command == "linkpred" else "cluster"
    config = config.with_overrides(
        dataset=args.dataset,
        t=args.t,
        k=args.k,
        seed=args.seed,
        out=args.out,
        variant=args.variant,
        mode=mode,
    )
    if config.dataset is None:
        raise UsageError("no dataset given (use --dataset or a config file)")
    return config


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _rows_document(rows: Sequence[ResultRow]) -> dict[str, Any]:
    return {"rows": [row.to_dict() for row in rows]}


def _run(
    args: Namespace, config: RunConfig, g: Graph, stdout: IO[str]
) -> CommandOutcome:
    out_dir = Path(config.out)
    command = args.command

    if command == "embed":
        hook = None
        if g.class_count is not None:
            context = SelectionContext(
                m=g.class_count, seed=config.seed, restarts=config.spectral_restarts
            )
            hook = partial(score_dbi, context=context)
        snapshots = make_variant(config).train(g, hook)
        artifacts = write_snapshots(snapshots, out_dir, config, g.node_ids)
        doc = {"snapshots": len(snapshots), "out": str(out_dir)}
        print(json.dumps(doc), file=stdout)
        return CommandOutcome(0, artifacts, doc)

    if command == "spectrum":
        summary = spectrum_summary(
            laplacians(g).l_sym,
            bins=config.spectrum_bins,
            dense_cap=config.dense_cap,
            estimate_only=args.estimate_only,
            seed=config.seed,
        )
        doc = summary.to_dict()
        with staged_directory(out_dir) as staging:
            names = [write_json(doc, staging / "spectrum.json").name]
            if args.smoothed:
                _, x_smooth = smoothed_features(g, config)
                smoothed = staging / "smoothed.tsv"
                names.append(write_matrix_tsv(x_smooth, smoothed, g.node_ids).name)
        print(json.dumps(doc, indent=2 if args.pretty else None), file=stdout)
        return CommandOutcome(0, [out_dir / name for name in names], doc)

    if command in ("cluster", "linkpred"):
        run = (
            run_clustering(g, config)
            if command == "cluster"
            else run_link_prediction(g, config)
        )
        doc = run.metrics()
        print(json.dumps(doc, indent=2 if args.pretty else None), file=stdout)
        return CommandOutcome(0, [], doc)

    if command == "ablate":
        rows = run_ablation(g, config)
    elif command == "variants":
        rows = compare_variants(g, config)
    else:
        rows = k_sweep(g, config, args.ks)
    doc = _rows_document(rows)
    print(format_table(rows) if args.pretty else json.dumps(doc), file=stdout)
    return CommandOutcome(0, [], doc)


def _report(error: Exception, stderr: IO[str]) -> None:
    if isinstance(error, AgeError):
        doc = error.to_dict()
    else:
        doc = {"error": type(error).__name__, "message": str(error)}
    print(json.dumps(doc), file=stderr)


def dispatch(
    argv: Sequence[str],
    stdout: IO[str] | None = None,
    stderr: IO[str] | None = None,
) -> CommandOutcome:
    """Parse ``argv``, run the command and report; never exits the process."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        config = load_config(args)
    except SystemExit as e:
        # --help
        return CommandOutcome(e.code if isinstance(e.code, int) else 0)
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=stderr)
        _report(e, stderr)
        return CommandOutcome(2)
    except ConfigurationError as e:
        _report(e, stderr)
        return CommandOutcome(2)

    _configure_logging(args.verbose)
    try:
        g = load_dataset(resolve_dataset(config.dataset, args.data_dir, config.seed))
        return _run(args, config, g, stdout)
    except (AgeError, OSError) as e:
        log.debug("command %s failed", args.command, exc_info=True)
        _report(e, stderr)
        return CommandOutcome(1)
    except Exception as e:
        log.error("command %s crashed", args.command, exc_info=True)
        _report(e, stderr)
        return CommandOutcome(1)


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()
