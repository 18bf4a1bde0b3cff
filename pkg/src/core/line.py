"""
LINE: edge-sampling training of first- and second-order proximity
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Tuple

import numpy as np
from tqdm import tqdm

from core.dt_builder import DTGraph
from core.embedding import EmbeddingMatrix
from core.exceptions import ConfigError, EmptyGraphError
from core.sgns import NegativeSamplingTrainer, SGNSConfig
from core.walks import AliasTable

logger = logging.getLogger(__name__)

LINE_ORDERS = ("first", "second", "both")
_ORDER_CODES = {"first": 1, "second": 2}


class EdgeSampler:
    """
    Draws directed arcs with probability proportional to edge weight
    Each undirected edge contributes two arcs, stored edge-major
    """

    def __init__(self, graph: DTGraph):
        edges = graph.edges()
        if not edges:
            raise EmptyGraphError("LINE needs a graph with at least one edge")

        self.nodes = graph.non_isolated_nodes()
        self.index = {node: i for i, node in enumerate(self.nodes)}
        self.edges = edges

        n_arcs = 2 * len(edges)
        self.sources = np.empty(n_arcs, dtype=np.int64)
        self.targets = np.empty(n_arcs, dtype=np.int64)
        weights = np.empty(n_arcs, dtype=np.float64)
        for k, (u, v, w) in enumerate(edges):
            a, b = self.index[u], self.index[v]
            self.sources[2 * k], self.targets[2 * k] = a, b
            self.sources[2 * k + 1], self.targets[2 * k + 1] = b, a
            weights[2 * k] = weights[2 * k + 1] = w
        self.table = AliasTable(weights)

        self.degrees = np.zeros(len(self.nodes), dtype=np.float64)
        np.add.at(self.degrees, self.sources, weights)

    @property
    def num_arcs(self) -> int:
        return len(self.sources)

    def sample(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        arcs = self.table.sample(rng, size)
        return self.sources[arcs], self.targets[arcs]

    def sample_edges(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Undirected edge indices into `edges`"""
        return self.table.sample(rng, size) // 2


def _train_order(sampler: EdgeSampler, order: str, config: SGNSConfig, progress: bool) -> np.ndarray:
    total = config.edge_samples or config.epochs * 100 * sampler.num_arcs
    trainer = NegativeSamplingTrainer(
        len(sampler.nodes), config, sampler.degrees,
        total_work=total, shared_context=(order == "first"),
    )

    per_epoch = -(-total // config.epochs)
    code = _ORDER_CODES[order]

    def run_slice(epoch: int, part: int, count: int):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 2, code, epoch, part]))
        for start in range(0, count, config.batch_size):
            size = min(config.batch_size, count - start)
            src, tgt = sampler.sample(rng, size)
            trainer.train_batch(src, tgt, rng, size)

    remaining = total
    bar = tqdm(total=config.epochs, desc=f"line-{order}", unit="epoch", disable=not progress)
    for epoch in range(config.epochs):
        count = min(per_epoch, remaining)
        remaining -= count
        if config.workers > 1:
            shares = [len(s) for s in np.array_split(np.arange(count), config.workers)]
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                list(pool.map(lambda p: run_slice(epoch, p, shares[p]), range(config.workers)))
        else:
            run_slice(epoch, 0, count)
        trainer.check_finite()
        bar.update(1)
    bar.close()

    logger.debug(f"LINE {order}-order: {total} arc samples over {sampler.num_arcs} arcs")
    return trainer.vectors.copy()


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


def line_embed(graph: DTGraph, order: str = "second", config: SGNSConfig = None,
               progress: bool = False) -> EmbeddingMatrix:
    """
    Vectors for every non-isolated node
    first: shared vectors, log s(u_j . u_i); second: separate context vectors, log s(c_j . u_i)
    both: d//2 first-order and d - d//2 second-order dimensions, each half unit-normalised
    """
    config = config or SGNSConfig()
    if order not in LINE_ORDERS:
        raise ConfigError(f"LINE order must be one of {LINE_ORDERS}, got '{order}'")
    sampler = EdgeSampler(graph)

    if order == "both":
        if config.dimension < 2:
            raise ConfigError("LINE order 'both' needs dimension >= 2")
        first_dim = config.dimension // 2
        first = _train_order(sampler, "first", replace(config, dimension=first_dim), progress)
        second = _train_order(
            sampler, "second", replace(config, dimension=config.dimension - first_dim), progress
        )
        vectors = np.hstack([_unit_rows(first), _unit_rows(second)])
    else:
        vectors = _train_order(sampler, order, config, progress)

    return EmbeddingMatrix(sampler.nodes, vectors)
