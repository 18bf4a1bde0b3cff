"""
dtembed - Distributional Thesaurus embedding pipeline
build-dt -> embed -> combine / retrofit -> evaluate
"""

import argparse
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.dt_builder import LMI_VARIANTS
from core.exceptions import ConfigError, DTEmbedError, ParseError
from core.line import LINE_ORDERS
from pipeline.commands import (
    cmd_build_dt, cmd_combine, cmd_compare, cmd_embed, cmd_eval, cmd_export_schemas, cmd_retrofit
)
from pipeline.config import (
    COMBINE_METHOD_NAMES, COMMAND_OPTIONS, EVAL_TASKS, GLOBAL_OPTIONS, METHOD_PRESETS, Config,
    PipelineConfig, load_config_file, resolve_options
)
from utils.helpers import resolve_workers
from utils.logger import PipelineLogger, setup_logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--deterministic", action="store_true", default=None,
                        help="single-threaded, bit-reproducible run")
    parser.add_argument("--report", help="JSON report path (default: <output>.json or stdout)")


def _add_eval_options(parser: argparse.ArgumentParser):
    parser.add_argument("--grid", help="analogy weight grid: 'default', 'v1,v2,..' or 'w1s;w2s'")
    parser.add_argument("--strict", action="store_true", default=None,
                        help="fail on the first out-of-vocabulary word")
    parser.add_argument("--normalize-analogy", action="store_true", default=None,
                        help="unit-normalise vectors before analogy scoring")
    parser.add_argument("--nouns", help="noun list; keep only items made of these words")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtembed",
        description="Distributional Thesaurus graph construction, embedding, combination and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-dt", help="word-feature counts -> DT edge list")
    p.add_argument("counts", help="TSV: word<TAB>feature<TAB>count")
    p.add_argument("-o", "--output", required=True, help="edge-list TSV to write")
    p.add_argument("--min-overlap", type=int, help="minimum shared features t for an edge (required)")
    p.add_argument("--top-k", type=int, help="features kept per word (default 1000)")
    p.add_argument("--lmi-variant", choices=LMI_VARIANTS)
    _add_common(p)

    p = sub.add_parser("embed", help="DT edge list -> word vectors")
    p.add_argument("edges", help="edge-list TSV")
    p.add_argument("-o", "--output", required=True, help="vector file to write")
    p.add_argument("--method", choices=sorted(METHOD_PRESETS))
    p.add_argument("--min-edge-weight", type=int, help="keep edges with weight >= this (default 50)")
    p.add_argument("--dim", type=int, help="vector dimension (default 128)")
    p.add_argument("--walks", type=int, help="walks per node (default 10)")
    p.add_argument("--walk-length", type=int, help="nodes per walk (default 80)")
    p.add_argument("--p", type=float, help="return parameter (default 1)")
    p.add_argument("--q", type=float, help="in-out parameter (default 1)")
    p.add_argument("--unweighted", action="store_true", default=None, help="ignore edge weights in walks")
    p.add_argument("--window", type=int, help="skip-gram window (default 10)")
    p.add_argument("--negatives", type=int, help="negative samples per pair (default 5)")
    p.add_argument("--epochs", type=int, help="training epochs (default 5)")
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--min-learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--line-order", choices=LINE_ORDERS)
    p.add_argument("--edge-samples", type=int, help="LINE arc samples (default epochs x 100 x arcs)")
    _add_common(p)

    p = sub.add_parser("combine", help="combine two or more vector files")
    p.add_argument("vectors", nargs="+", help="vector files, in coordinate order")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--method", type=str.upper, choices=COMBINE_METHOD_NAMES)
    p.add_argument("--target-dim", type=int, help="output dimension for PCA/TSVD (default 300)")
    p.add_argument("--normalize-parts", action="store_true", default=None)
    p.add_argument("--standardize", action="store_true", default=None, help="correlation PCA")
    _add_common(p)

    p = sub.add_parser("retrofit", help="pull vectors toward DT neighbours")
    p.add_argument("vectors")
    p.add_argument("edges")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--min-edge-weight", type=int, help="neighbours need weight > this (default 500)")
    p.add_argument("--iterations", type=int, help="sweeps (default 10)")
    p.add_argument("--alpha", type=float, help="anchor weight (default 1)")
    _add_common(p)

    for command, task in EVAL_TASKS.items():
        p = sub.add_parser(command, help=f"{task} evaluation")
        p.add_argument("vectors")
        p.add_argument("datasets", nargs="+")
        _add_eval_options(p)
        _add_common(p)

    p = sub.add_parser("compare", help="evaluate several vector files side by side")
    p.add_argument("--system", action="append", default=[], metavar="NAME=PATH", required=True)
    p.add_argument("--sim", action="append", default=[], metavar="PATH")
    p.add_argument("--syn", action="append", default=[], metavar="PATH")
    p.add_argument("--analogy", action="append", default=[], metavar="PATH")
    p.add_argument("--common-vocabulary", action="store_true", default=None,
                   help="keep only items covered by every system")
    _add_eval_options(p)
    _add_common(p)

    p = sub.add_parser("export-schemas", help="write JSON Schemas of every report")
    p.add_argument("directory")

    return parser


def _parse_systems(entries: Sequence[str]) -> List[Tuple[str, str]]:
    systems = []
    for entry in entries:
        name, sep, path = entry.partition("=")
        if not sep or not name or not path:
            raise ConfigError(f"--system expects NAME=PATH, got '{entry}'")
        systems.append((name, path))
    return systems


def _inputs(args: argparse.Namespace) -> List[str]:
    command = args.command
    if command == "build-dt":
        return [args.counts]
    if command == "embed":
        return [args.edges]
    if command == "combine":
        return list(args.vectors)
    if command == "retrofit":
        return [args.vectors, args.edges]
    if command in EVAL_TASKS:
        return [args.vectors] + list(args.datasets)
    return []


def run(args: argparse.Namespace, env: Config, plog: PipelineLogger) -> int:
    """Resolve configuration and dispatch one subcommand"""
    command = args.command
    if command == "export-schemas":
        cmd_export_schemas(args.directory)
        return EXIT_OK

    file_values: Dict[str, str] = load_config_file(args.config, command) if args.config else {}
    names = set(GLOBAL_OPTIONS) | set(COMMAND_OPTIONS[command])
    cli = {name: getattr(args, name, None) for name in names}
    settings = resolve_options(command, cli, file_values)

    deterministic = settings["deterministic"]
    config = PipelineConfig(
        command=command,
        inputs=_inputs(args),
        output=getattr(args, "output", None),
        report=args.report,
        seed=settings["seed"],
        deterministic=deterministic,
        workers=resolve_workers(env.THREADS, deterministic),
        progress=sys.stderr.isatty() and env.LOG_LEVEL in ("DEBUG", "INFO"),
        version=env.VERSION,
        settings=settings,
    )

    systems: List[Tuple[str, str]] = []
    datasets: Dict[str, List[str]] = {}
    if command == "compare":
        systems = _parse_systems(args.system)
        datasets = {"sim": args.sim, "syn": args.syn, "analogy": args.analogy}
        config.inputs = [path for _, path in systems]
        if not any(datasets.values()):
            raise ConfigError("compare needs at least one of --sim, --syn, --analogy")
    config.validate_paths(*[p for p in (settings.get("nouns"),) if p])

    plog.startup(env.VERSION, command, config.seed, deterministic)

    if command == "build-dt":
        cmd_build_dt(config)
    elif command == "embed":
        cmd_embed(config)
    elif command == "combine":
        cmd_combine(config)
    elif command == "retrofit":
        cmd_retrofit(config)
    elif command in EVAL_TASKS:
        document = cmd_eval(config, EVAL_TASKS[command])
        if document.failures and not document.reports:
            plog.error("every dataset failed")
            return EXIT_FAILURE
    elif command == "compare":
        document = cmd_compare(config, systems, datasets)
        if all(not result.reports for result in document.systems):
            plog.error("no system produced a score")
            return EXIT_FAILURE
    return EXIT_OK


def handle_error(error: Exception, plog: PipelineLogger) -> int:
    """Global error handler: map an exception to an exit status"""
    if isinstance(error, (ParseError, ConfigError)):
        plog.error(str(error), context=type(error).__name__)
        return EXIT_USAGE

    elif isinstance(error, DTEmbedError):
        plog.error(str(error), context=type(error).__name__)
        return EXIT_FAILURE

    else:
        plog.logger.critical(f"Fatal error: {error}", exc_info=True)
        return EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    env = Config()
    plog = PipelineLogger(setup_logger("dtembed", env.LOG_FILE, env.LOG_LEVEL))
    args = build_parser().parse_args(argv)

    started = time.perf_counter()
    try:
        env.validate()
        code = run(args, env, plog)
    except KeyboardInterrupt:
        plog.warning("stopped by user")
        return EXIT_INTERRUPTED
    except Exception as e:
        return handle_error(e, plog)

    plog.shutdown(time.perf_counter() - started)
    return code


if __name__ == "__main__":
    sys.exit(main())
