"""
Random walks over the DT graph
First-order (DeepWalk) and second-order biased (node2vec) walks with alias sampling
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
from cachetools import LRUCache
from tqdm import tqdm

from core.dt_builder import DTGraph
from core.exceptions import ConfigError, EmptyGraphError

logger = logging.getLogger(__name__)


class AliasTable:
    """
    Walker/Vose alias table: O(n) build, O(1) draw
    Reference: https://en.wikipedia.org/wiki/Alias_method
    """

    def __init__(self, weights: Sequence[float]):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 1 or len(weights) == 0:
            raise ValueError("Alias table needs a non-empty 1-d weight vector")
        if np.any(weights < 0) or not np.isfinite(weights).all() or weights.sum() <= 0:
            raise ValueError("Alias table weights must be finite, non-negative and not all zero")

        n = len(weights)
        scaled = weights * n / weights.sum()
        self.size = n
        self.prob = np.ones(n, dtype=np.float64)
        self.alias = np.arange(n, dtype=np.int64)

        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = g
            scaled[g] = (scaled[g] + scaled[s]) - 1.0
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # Leftovers are numerically ~1
        for i in small + large:
            self.prob[i] = 1.0

    def pick(self, u_column: float, u_coin: float) -> int:
        """Draw one index from two uniforms in [0, 1)"""
        column = min(int(u_column * self.size), self.size - 1)
        return column if u_coin < self.prob[column] else int(self.alias[column])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        columns = rng.integers(0, self.size, size=size)
        coins = rng.random(size)
        return np.where(coins < self.prob[columns], columns, self.alias[columns])

    def probabilities(self) -> np.ndarray:
        """Exact distribution encoded by the table"""
        dist = self.prob.copy()
        np.add.at(dist, self.alias, 1.0 - self.prob)
        return dist / self.size


@dataclass
class WalkConfig:
    """Random walk settings; p = q = 1 gives DeepWalk"""
    walks_per_node: int = 10
    walk_length: int = 80
    p: float = 1.0
    q: float = 1.0
    seed: int = 0
    weighted: bool = True
    partitions: int = 8
    workers: int = 1
    cache_size: int = 100_000

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ConfigError(f"walks_per_node must be >= 1, got {self.walks_per_node}")
        if self.walk_length < 2:
            raise ConfigError(f"walk_length must be >= 2, got {self.walk_length}")
        if not self.p > 0 or not self.q > 0:
            raise ConfigError(f"p and q must be > 0, got p={self.p}, q={self.q}")
        if self.partitions < 1 or self.workers < 1:
            raise ConfigError("partitions and workers must be >= 1")
        if self.cache_size < 1:
            raise ConfigError(f"cache_size must be >= 1, got {self.cache_size}")

    @property
    def is_deepwalk(self) -> bool:
        return self.p == 1.0 and self.q == 1.0


@dataclass
class WalkCorpus:
    """Walks as index arrays into `nodes`"""
    nodes: List[str]
    walks: List[np.ndarray]

    def __len__(self) -> int:
        return len(self.walks)

    def __iter__(self) -> Iterator[List[str]]:
        for walk in self.walks:
            yield [self.nodes[i] for i in walk]

    @property
    def num_tokens(self) -> int:
        return int(sum(len(w) for w in self.walks))

    def token_counts(self) -> np.ndarray:
        counts = np.zeros(len(self.nodes), dtype=np.int64)
        for walk in self.walks:
            np.add.at(counts, walk, 1)
        return counts

    @classmethod
    def from_words(cls, walks: Sequence[Sequence[str]]) -> "WalkCorpus":
        nodes = sorted({w for walk in walks for w in walk})
        index = {w: i for i, w in enumerate(nodes)}
        arrays = [np.array([index[w] for w in walk], dtype=np.int64) for walk in walks]
        return cls(nodes=nodes, walks=arrays)


def filter_edges(graph: DTGraph, min_weight: int) -> DTGraph:
    """Subgraph of edges with weight >= min_weight; isolated nodes dropped"""
    if min_weight < 0:
        raise ConfigError(f"min_weight must be >= 0, got {min_weight}")
    kept = [(u, v, w) for u, v, w in graph.edges() if w >= min_weight]
    logger.debug(f"Edge filter >= {min_weight}: kept {len(kept)} of {graph.number_of_edges()} edges")
    return DTGraph.from_edges(kept)


class RandomWalker:
    """Second-order walk sampler over the non-isolated nodes of a graph"""

    def __init__(self, graph: DTGraph, config: WalkConfig):
        self.config = config
        self.nodes = graph.non_isolated_nodes()
        if not self.nodes:
            raise EmptyGraphError("Every node is isolated; nothing to walk on")
        self.index = {node: i for i, node in enumerate(self.nodes)}

        self._neighbors: List[np.ndarray] = []
        self._weights: List[np.ndarray] = []
        self._neighbor_sets: List[frozenset] = []
        self._first_step: List[AliasTable] = []
        for node in self.nodes:
            nbrs = graph.neighbors(node)
            ids = np.array([self.index[n] for n in nbrs], dtype=np.int64)
            if config.weighted:
                weights = np.array([graph.weight(node, n) for n in nbrs], dtype=np.float64)
            else:
                weights = np.ones(len(nbrs), dtype=np.float64)
            self._neighbors.append(ids)
            self._weights.append(weights)
            self._neighbor_sets.append(frozenset(ids.tolist()))
            self._first_step.append(AliasTable(weights))

        self._edge_tables: LRUCache = LRUCache(maxsize=config.cache_size)
        self._lock = threading.Lock()

    def _bias(self, prev: int, cur: int) -> np.ndarray:
        """Unnormalised transition weights from edge (prev -> cur)"""
        nbrs = self._neighbors[cur]
        alpha = np.full(len(nbrs), 1.0 / self.config.q)
        prev_nbrs = self._neighbor_sets[prev]
        for k, x in enumerate(nbrs.tolist()):
            if x == prev:
                alpha[k] = 1.0 / self.config.p
            elif x in prev_nbrs:
                alpha[k] = 1.0
        return self._weights[cur] * alpha

    def _edge_table(self, prev: int, cur: int) -> AliasTable:
        if self.config.is_deepwalk:
            return self._first_step[cur]
        key = (prev, cur)
        with self._lock:
            table = self._edge_tables.get(key)
        if table is None:
            table = AliasTable(self._bias(prev, cur))
            with self._lock:
                self._edge_tables[key] = table
        return table

    def transition_probabilities(self, cur: str, prev: Optional[str] = None) -> Dict[str, float]:
        """Exact next-hop law from `cur`, given the previous node if any"""
        c = self.index[cur]
        if prev is None:
            weights = self._weights[c]
        else:
            weights = self._bias(self.index[prev], c)
        probs = weights / weights.sum()
        return {self.nodes[x]: float(pr) for x, pr in zip(self._neighbors[c].tolist(), probs)}

    def walk(self, start: int, rng: np.random.Generator) -> np.ndarray:
        length = self.config.walk_length
        path = np.empty(length, dtype=np.int64)
        path[0] = start
        uniforms = rng.random((length - 1, 2))

        first = self._first_step[start]
        path[1] = self._neighbors[start][first.pick(uniforms[0, 0], uniforms[0, 1])]
        for step in range(2, length):
            prev, cur = int(path[step - 2]), int(path[step - 1])
            table = self._edge_table(prev, cur)
            path[step] = self._neighbors[cur][table.pick(uniforms[step - 1, 0], uniforms[step - 1, 1])]
        return path

    def _run_partition(self, starts: np.ndarray, seed: np.random.SeedSequence) -> List[np.ndarray]:
        rng = np.random.default_rng(seed)
        walks = []
        for _ in range(self.config.walks_per_node):
            for start in rng.permutation(starts).tolist():
                walks.append(self.walk(start, rng))
        return walks

    def simulate(self, progress: bool = False) -> WalkCorpus:
        """
        All walks, partitioned by start node
        Each partition has its own seed, so the corpus does not depend on `workers`
        """
        starts = np.arange(len(self.nodes), dtype=np.int64)
        n_parts = min(self.config.partitions, len(starts))
        parts = np.array_split(starts, n_parts)
        seeds = np.random.SeedSequence(self.config.seed).spawn(n_parts)

        walks: List[np.ndarray] = []
        bar = tqdm(total=n_parts, desc="walks", unit="partition", disable=not progress)
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                for chunk in pool.map(self._run_partition, parts, seeds):
                    walks.extend(chunk)
                    bar.update(1)
        else:
            for part, seed in zip(parts, seeds):
                walks.extend(self._run_partition(part, seed))
                bar.update(1)
        bar.close()

        logger.debug(f"Generated {len(walks)} walks over {len(self.nodes)} nodes")
        return WalkCorpus(nodes=list(self.nodes), walks=walks)


def generate_walks(graph: DTGraph, config: WalkConfig, progress: bool = False) -> WalkCorpus:
    """`walks_per_node` walks of `walk_length` nodes from every non-isolated node"""
    return RandomWalker(graph, config).simulate(progress=progress)
