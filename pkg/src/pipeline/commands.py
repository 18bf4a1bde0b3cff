"""
Pipeline subcommands
Each command reads its inputs, runs one stage and writes its artifacts plus a JSON report
"""

import logging
import os
import sys
from typing import Dict, List, Optional, Tuple

from core.combiner import combine, retrofit, vocabulary_coverage
from core.datasets import Dataset, filter_by_nouns, restrict_to_vocabulary
from core.dt_builder import build_thesaurus
from core.embedding import EmbeddingMatrix
from core.evaluator import eval_analogy, eval_similarity, eval_synonym
from core.exceptions import ConfigError, DTEmbedError, EmptyGraphError
from core.line import LINE_ORDERS, line_embed
from core.sgns import train_sgns
from core.walks import filter_edges, generate_walks
from pipeline.config import METHOD_PRESETS, PipelineConfig
from storage.formats import (
    DATASET_READERS, export_schemas, read_counts, read_edges, read_embedding,
    read_word_list, write_edges, write_embedding, write_report
)
from storage.models import (
    BuildStats, CombineReport, CompareDocument, DatasetFailure, EmbedMetadata, EvalDocument,
    EvalReport, RetrofitReport, SystemResult
)
from utils.decorators import log_command
from utils.helpers import format_table
from utils.logger import PipelineLogger

logger = logging.getLogger(__name__)
plog = PipelineLogger(logging.getLogger("dtembed"))


def _emit_report(config: PipelineConfig, report, kind: str = "report"):
    path = config.report_path
    if path:
        write_report(path, report)
        plog.artifact(kind, path)
    else:
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")


@log_command("build-dt")
def cmd_build_dt(config: PipelineConfig) -> BuildStats:
    """Counts TSV -> DT edge list + build stats"""
    counts_path = config.inputs[0]
    plog.stage("Reading counts", counts_path)
    counts = read_counts(counts_path)
    plog.stage(
        "Building thesaurus",
        f"{len(counts.word_marginals)} words, {len(counts.feature_marginals)} features, "
        f"k={config.get('top_k')}, t={config.get('min_overlap')}, lmi={config.get('lmi_variant')}",
    )
    graph = build_thesaurus(counts, config.builder_config())
    plog.graph("DT graph", graph.number_of_nodes(), graph.number_of_edges())

    write_edges(config.output, graph)
    plog.artifact("edge list", config.output)

    stats = BuildStats(
        run=config.to_report(),
        nodes=graph.number_of_nodes(),
        edges=graph.number_of_edges(),
        isolated_nodes=graph.number_of_nodes() - len(graph.non_isolated_nodes()),
        merged_duplicates=counts.merged_duplicates,
        weight_histogram={str(w): n for w, n in graph.weight_histogram().items()},
    )
    _emit_report(config, stats, "build stats")
    return stats


@log_command("embed")
def cmd_embed(config: PipelineConfig) -> EmbedMetadata:
    """Edge list -> filtered graph -> DeepWalk / node2vec / LINE vectors"""
    method = config.get("method").lower()
    if method not in METHOD_PRESETS:
        raise ConfigError(f"Unknown embedding method '{method}' (choose from {sorted(METHOD_PRESETS)})")
    preset = METHOD_PRESETS[method]
    if method == "deepwalk" and (config.get("p") != 1.0 or config.get("q") != 1.0):
        plog.warning(f"deepwalk ignores p={config.get('p')}, q={config.get('q')}; using p=q=1")
        config.settings["p"], config.settings["q"] = preset["p"], preset["q"]

    graph = read_edges(config.inputs[0])
    plog.graph("Input graph", graph.number_of_nodes(), graph.number_of_edges())
    min_weight = config.get("min_edge_weight")
    filtered = filter_edges(graph, min_weight)
    plog.graph(f"After weight >= {min_weight}", filtered.number_of_nodes(), filtered.number_of_edges())
    if filtered.number_of_edges() == 0:
        raise EmptyGraphError(f"No edge has weight >= {min_weight}; nothing to embed")

    walks = tokens = None
    line_order = None
    sgns_config = config.sgns_config()
    if preset["walks"]:
        walk_config = config.walk_config()
        plog.stage("Generating walks", f"r={walk_config.walks_per_node}, l={walk_config.walk_length}, "
                                       f"p={walk_config.p}, q={walk_config.q}")
        corpus = generate_walks(filtered, walk_config, progress=config.progress)
        walks, tokens = len(corpus), corpus.num_tokens
        plog.stage("Training skip-gram", f"d={sgns_config.dimension}, window={sgns_config.window}, "
                                         f"negatives={sgns_config.negatives}, epochs={sgns_config.epochs}")
        embedding = train_sgns(corpus, sgns_config, progress=config.progress)
        equivalent = walk_config.is_deepwalk
    else:
        line_order = config.get("line_order")
        if line_order not in LINE_ORDERS:
            raise ConfigError(f"--line-order must be one of {LINE_ORDERS}, got '{line_order}'")
        plog.stage("Training LINE", f"order={line_order}, d={sgns_config.dimension}")
        embedding = line_embed(filtered, line_order, sgns_config, progress=config.progress)
        equivalent = False
    plog.memory()

    write_embedding(config.output, embedding)
    plog.artifact("vectors", config.output)

    metadata = EmbedMetadata(
        run=config.to_report(),
        method=method,
        line_order=line_order,
        min_edge_weight=min_weight,
        nodes_embedded=len(embedding),
        edges_after_filter=filtered.number_of_edges(),
        dimension=embedding.dimension,
        walks=walks,
        walk_tokens=tokens,
        equivalent_to_deepwalk=equivalent,
    )
    _emit_report(config, metadata, "run metadata")
    return metadata


@log_command("combine")
def cmd_combine(config: PipelineConfig) -> CombineReport:
    """Two or more vector files -> CC / PCA / TSVD combination"""
    if len(config.inputs) < 2:
        raise ConfigError(f"combine needs at least two vector files, got {len(config.inputs)}")
    embeddings = []
    for path in config.inputs:
        embedding = read_embedding(path)
        plog.stage("Loaded vectors", f"{path}: {len(embedding)} x {embedding.dimension}")
        embeddings.append(embedding)

    combine_config = config.combine_config()
    combined, model = combine(embeddings, combine_config)
    coverage = vocabulary_coverage(embeddings, combined)
    plog.coverage(coverage.input_vocab_sizes, coverage.output_vocab_size, coverage.dropped_examples)
    if model is not None and model.n_components < combine_config.target_dim:
        plog.warning(f"Kept {model.n_components} of {combine_config.target_dim} requested components")

    write_embedding(config.output, combined)
    plog.artifact("vectors", config.output)

    report = CombineReport(
        run=config.to_report(),
        method=combine_config.method,
        inputs=[os.path.basename(p) for p in config.inputs],
        dimension=combined.dimension,
        requested_dim=None if model is None else combine_config.target_dim,
        explained_variance=None if model is None else model.explained_variance.tolist(),
        coverage=coverage,
    )
    _emit_report(config, report, "coverage report")
    return report


@log_command("retrofit")
def cmd_retrofit(config: PipelineConfig) -> RetrofitReport:
    """Vectors + DT edge list -> retrofitted vectors"""
    vectors_path, edges_path = config.inputs
    embedding = read_embedding(vectors_path)
    graph = read_edges(edges_path)
    retrofit_config = config.retrofit_config()
    plog.stage("Retrofitting", f"{len(embedding)} words, weight > {retrofit_config.min_edge_weight}, "
                               f"{retrofit_config.iterations} sweeps")

    changes: List[float] = []

    def on_sweep(sweep: int, max_change: float):
        changes.append(max_change)
        logger.debug(f"Sweep {sweep}: max change {max_change:.3e}")

    result = retrofit(embedding, graph, retrofit_config, on_sweep=on_sweep)
    write_embedding(config.output, result)
    plog.artifact("vectors", config.output)

    report = RetrofitReport(
        run=config.to_report(),
        min_edge_weight=retrofit_config.min_edge_weight,
        iterations=retrofit_config.iterations,
        vocab_size=len(result),
        sweep_max_change=changes,
    )
    _emit_report(config, report)
    return report


def _load_dataset(task: str, path: str, nouns: Optional[List[str]]) -> Dataset:
    dataset = DATASET_READERS[task](path)
    if nouns is not None:
        dataset = filter_by_nouns(dataset, nouns)
    return dataset


def _score(task: str, embedding: EmbeddingMatrix, dataset: Dataset, config: PipelineConfig) -> EvalReport:
    strict = config.get("strict")
    if task == "sim":
        return eval_similarity(embedding, dataset, strict=strict)
    if task == "syn":
        return eval_synonym(embedding, dataset, strict=strict)
    return eval_analogy(embedding, dataset, config.grid(), strict=strict,
                        normalize=config.get("normalize_analogy"))


def _failure(path: str, error: Exception) -> DatasetFailure:
    plog.error(str(error), context=os.path.basename(path))
    return DatasetFailure(dataset=os.path.basename(path), error_type=type(error).__name__, message=str(error))


@log_command("eval")
def cmd_eval(config: PipelineConfig, task: str) -> EvalDocument:
    """
    One report per dataset; a failing dataset is listed and the run continues
    """
    vectors_path, dataset_paths = config.inputs[0], config.inputs[1:]
    if not dataset_paths:
        raise ConfigError("No dataset files given")
    embedding = read_embedding(vectors_path)
    nouns = read_word_list(config.get("nouns")) if config.get("nouns") else None

    document = EvalDocument(run=config.to_report(), task=task, vectors=os.path.basename(vectors_path))
    for path in dataset_paths:
        try:
            report = _score(task, embedding, _load_dataset(task, path, nouns), config)
        except DTEmbedError as e:
            document.failures.append(_failure(path, e))
            continue
        document.reports.append(report)
        weights = f" w=({report.weights.w1}, {report.weights.w2})" if report.weights else ""
        plog.success(f"{report.dataset}: {report.metric}={report.value:.4f} "
                     f"({report.pairs_evaluated} scored, {report.pairs_skipped_oov} OOV){weights}")

    _emit_report(config, document)
    return document


@log_command("compare")
def cmd_compare(config: PipelineConfig, systems: List[Tuple[str, str]],
                datasets: Dict[str, List[str]]) -> CompareDocument:
    """Evaluate several named vector files on the same datasets"""
    if not systems:
        raise ConfigError("compare needs at least one --system NAME=PATH")
    embeddings = {name: read_embedding(path) for name, path in systems}
    nouns = read_word_list(config.get("nouns")) if config.get("nouns") else None

    loaded: List[Tuple[str, str, Dataset]] = []
    load_failures: List[Tuple[str, Exception]] = []
    for task in ("sim", "syn", "analogy"):
        for path in datasets.get(task, []):
            try:
                dataset = _load_dataset(task, path, nouns)
                if config.get("common_vocabulary"):
                    dataset = restrict_to_vocabulary(dataset, [e.vocabulary for e in embeddings.values()])
                loaded.append((task, path, dataset))
            except DTEmbedError as e:
                load_failures.append((path, e))

    results = []
    for name, path in systems:
        result = SystemResult(system=name, vectors=os.path.basename(path))
        for failed_path, error in load_failures:
            result.failures.append(_failure(failed_path, error))
        for task, dataset_path, dataset in loaded:
            try:
                result.reports.append(_score(task, embeddings[name], dataset, config))
            except DTEmbedError as e:
                result.failures.append(_failure(dataset_path, e))
        results.append(result)

    best: Dict[str, str] = {}
    best_value: Dict[str, float] = {}
    for result in results:
        for report in result.reports:
            if report.dataset not in best_value or report.value > best_value[report.dataset]:
                best[report.dataset], best_value[report.dataset] = result.system, report.value

    dataset_names = [d.name for _, _, d in loaded]
    rows = []
    for result in results:
        values = {r.dataset: f"{r.value:.3f}" for r in result.reports}
        rows.append([result.system] + [values.get(n, "-") for n in dataset_names])
    logger.info("\n" + format_table(["system"] + dataset_names, rows))

    document = CompareDocument(run=config.to_report(), systems=results, best_by_dataset=best)
    _emit_report(config, document, "comparison")
    return document


@log_command("export-schemas")
def cmd_export_schemas(directory: str) -> List[str]:
    written = export_schemas(directory)
    for path in written:
        plog.artifact("schema", path)
    return written
