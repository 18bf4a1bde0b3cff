"""
Distributional Thesaurus construction
LMI feature ranking, top-k truncation and pairwise feature overlap
"""

import heapq
import logging
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import networkx as nx
import numpy as np

from core.exceptions import (
    ConfigError, CountsValidationError, EmptyVocabularyError, GraphValidationError
)

logger = logging.getLogger(__name__)

LMI_VARIANTS = ("normalized", "unnormalized")


@dataclass
class FeatureCounts:
    """Sparse word x feature co-occurrence counts with marginals"""
    entries: Dict[Tuple[str, str], int]
    word_marginals: Dict[str, int]
    feature_marginals: Dict[str, int]
    total: int
    merged_duplicates: int = 0

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[str, str, int]]) -> "FeatureCounts":
        """
        Aggregate (word, feature, count) triples
        Repeated pairs are summed, zero counts are dropped
        """
        table: Dict[Tuple[str, str], int] = {}
        merged = 0
        for word, feature, count in entries:
            if count < 0:
                raise CountsValidationError(
                    f"Negative count {count} for word '{word}' and feature '{feature}'"
                )
            if count == 0:
                continue
            key = (word, feature)
            if key in table:
                merged += 1
                table[key] += count
            else:
                table[key] = count

        word_marginals: Dict[str, int] = defaultdict(int)
        feature_marginals: Dict[str, int] = defaultdict(int)
        for (word, feature), count in table.items():
            word_marginals[word] += count
            feature_marginals[feature] += count

        return cls(
            entries=table,
            word_marginals=dict(word_marginals),
            feature_marginals=dict(feature_marginals),
            total=sum(word_marginals.values()),
            merged_duplicates=merged,
        )

    def validate(self):
        """Check that the marginals agree with the stored entries"""
        if not self.entries:
            raise CountsValidationError("Feature counts are empty")

        word_sums: Dict[str, int] = defaultdict(int)
        feature_sums: Dict[str, int] = defaultdict(int)
        for (word, feature), count in self.entries.items():
            if count <= 0:
                raise CountsValidationError(
                    f"Non-positive stored count {count} for word '{word}' and feature '{feature}'"
                )
            word_sums[word] += count
            feature_sums[feature] += count

        for word in sorted(set(word_sums) | set(self.word_marginals)):
            if word_sums.get(word, 0) != self.word_marginals.get(word, 0):
                raise CountsValidationError(
                    f"Inconsistent marginal for word '{word}': "
                    f"stored {self.word_marginals.get(word, 0)}, entries sum to {word_sums.get(word, 0)}"
                )
        for feature in sorted(set(feature_sums) | set(self.feature_marginals)):
            if feature_sums.get(feature, 0) != self.feature_marginals.get(feature, 0):
                raise CountsValidationError(
                    f"Inconsistent marginal for feature '{feature}': "
                    f"stored {self.feature_marginals.get(feature, 0)}, entries sum to {feature_sums.get(feature, 0)}"
                )

        expected_total = sum(word_sums.values())
        if self.total != expected_total:
            raise CountsValidationError(
                f"Inconsistent total: stored {self.total}, entries sum to {expected_total}"
            )


@dataclass
class ScoredFeatureList:
    """Per-word (feature, score) lists; `ranked` lists are descending by score"""
    scores: Dict[str, List[Tuple[str, float]]]
    ranked: bool = False

    def __len__(self) -> int:
        return len(self.scores)

    def feature_sets(self) -> Dict[str, FrozenSet[str]]:
        return {word: frozenset(f for f, _ in items) for word, items in self.scores.items()}


@dataclass
class BuilderConfig:
    """DT builder settings"""
    min_overlap: int
    top_k: int = 1000
    lmi_variant: str = "normalized"
    workers: int = 1

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.min_overlap < 1:
            raise ConfigError(f"min_overlap must be >= 1, got {self.min_overlap}")
        if self.lmi_variant not in LMI_VARIANTS:
            raise ConfigError(f"lmi_variant must be one of {LMI_VARIANTS}, got '{self.lmi_variant}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


class DTGraph:
    """
    Undirected word graph with positive integer weights
    Backed by a networkx Graph; isolated words are kept as nodes
    """

    def __init__(self, graph: Optional[nx.Graph] = None):
        self._graph = graph if graph is not None else nx.Graph()

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[str, str, int]],
                   nodes: Iterable[str] = ()) -> "DTGraph":
        graph = nx.Graph()
        graph.add_nodes_from(sorted(set(nodes)))
        for u, v, weight in edges:
            if u == v:
                raise GraphValidationError(f"Self-loop on '{u}' is not allowed")
            if weight <= 0:
                raise GraphValidationError(f"Edge ({u}, {v}) has non-positive weight {weight}")
            graph.add_edge(u, v, weight=int(weight))
        return cls(graph)

    @property
    def graph(self) -> nx.Graph:
        return self._graph

    @property
    def nodes(self) -> List[str]:
        return sorted(self._graph.nodes)

    def number_of_nodes(self) -> int:
        return self._graph.number_of_nodes()

    def number_of_edges(self) -> int:
        return self._graph.number_of_edges()

    def __contains__(self, word: str) -> bool:
        return word in self._graph

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DTGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges() == other.edges()

    def edges(self) -> List[Tuple[str, str, int]]:
        """All edges once, as (u, v, weight) with u < v, sorted"""
        result = []
        for u, v, data in self._graph.edges(data=True):
            a, b = (u, v) if u < v else (v, u)
            result.append((a, b, data["weight"]))
        result.sort()
        return result

    def weight(self, u: str, v: str) -> int:
        data = self._graph.get_edge_data(u, v)
        return data["weight"] if data else 0

    def has_edge(self, u: str, v: str) -> bool:
        return self._graph.has_edge(u, v)

    def neighbors(self, word: str) -> List[str]:
        return sorted(self._graph.neighbors(word))

    def degree(self, word: str) -> int:
        return self._graph.degree(word)

    def non_isolated_nodes(self) -> List[str]:
        return sorted(n for n in self._graph.nodes if self._graph.degree(n) > 0)

    def weight_histogram(self) -> Dict[int, int]:
        counts = Counter(weight for _, _, weight in self.edges())
        return dict(sorted(counts.items()))


def compute_lmi(counts: FeatureCounts, variant: str = "normalized") -> ScoredFeatureList:
    """
    Lexicographer's mutual information for every stored (word, feature)
    normalized:   F(w,f) * log2(F(w,f) * N / (F(w) * F(f)))
    unnormalized: F(w,f) * log2(F(w,f) / (F(w) * F(f)))
    """
    if variant not in LMI_VARIANTS:
        raise ConfigError(f"lmi_variant must be one of {LMI_VARIANTS}, got '{variant}'")
    counts.validate()

    keys = sorted(counts.entries)
    joint = np.array([counts.entries[key] for key in keys], dtype=np.float64)
    word_freq = np.array([counts.word_marginals[w] for w, _ in keys], dtype=np.float64)
    feature_freq = np.array([counts.feature_marginals[f] for _, f in keys], dtype=np.float64)

    if variant == "normalized":
        ratio = (joint * float(counts.total)) / (word_freq * feature_freq)
    else:
        ratio = joint / (word_freq * feature_freq)
    lmi = joint * np.log2(ratio)

    scores: Dict[str, List[Tuple[str, float]]] = defaultdict(list)
    for (word, feature), score in zip(keys, lmi.tolist()):
        scores[word].append((feature, score))

    logger.debug(f"LMI computed for {len(keys)} pairs over {len(scores)} words")
    return ScoredFeatureList(scores=dict(scores), ranked=False)


def top_k_features(scored: ScoredFeatureList, k: int) -> ScoredFeatureList:
    """Keep each word's k best features; ties broken by feature name"""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")

    ranked = {
        word: heapq.nsmallest(k, items, key=lambda item: (-item[1], item[0]))
        for word, items in scored.scores.items()
    }
    return ScoredFeatureList(scores=ranked, ranked=True)


def _count_overlaps(buckets: List[List[int]]) -> Counter:
    """Pair-overlap counts contributed by a slice of inverted-index buckets"""
    local: Counter = Counter()
    for holders in buckets:
        if len(holders) > 1:
            local.update(combinations(holders, 2))
    return local


def build_dt_graph(feature_sets: Union[ScoredFeatureList, Mapping[str, Iterable[str]]],
                   config: BuilderConfig) -> DTGraph:
    """
    Connect every word pair sharing at least `min_overlap` features
    Edge weight is the size of the feature-set intersection
    """
    if isinstance(feature_sets, ScoredFeatureList):
        feature_sets = feature_sets.feature_sets()
    if not feature_sets:
        raise EmptyVocabularyError("Cannot build a DT graph from an empty vocabulary")

    words = sorted(feature_sets)
    index = {word: i for i, word in enumerate(words)}

    # Inverted index: feature -> ascending word ids holding it
    inverted: Dict[str, List[int]] = defaultdict(list)
    for word in words:
        for feature in set(feature_sets[word]):
            inverted[feature].append(index[word])
    buckets = [sorted(inverted[feature]) for feature in sorted(inverted)]

    workers = min(config.workers, max(1, len(buckets)))
    if workers > 1:
        size = (len(buckets) + workers - 1) // workers
        slices = [buckets[i:i + size] for i in range(0, len(buckets), size)]
        overlaps: Counter = Counter()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # Partial counts are summed; addition order does not change the result
            for partial in pool.map(_count_overlaps, slices):
                overlaps.update(partial)
    else:
        overlaps = _count_overlaps(buckets)

    graph = nx.Graph()
    graph.add_nodes_from(words)
    kept = 0
    for (i, j), weight in sorted(overlaps.items()):
        if weight >= config.min_overlap:
            graph.add_edge(words[i], words[j], weight=weight)
            kept += 1

    logger.debug(
        f"DT graph: {len(words)} words, {len(buckets)} features, "
        f"{len(overlaps)} overlapping pairs, {kept} edges at t={config.min_overlap}"
    )
    return DTGraph(graph)


def build_thesaurus(counts: FeatureCounts, config: BuilderConfig) -> DTGraph:
    """Full build: LMI -> top-k -> overlap graph"""
    scored = compute_lmi(counts, variant=config.lmi_variant)
    ranked = top_k_features(scored, config.top_k)
    return build_dt_graph(ranked, config)
