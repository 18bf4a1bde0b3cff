"""
Synthetic inputs with planted structure
Small count tables and graphs whose expected clustering is known in advance
"""

from itertools import combinations
from typing import List, Tuple

import numpy as np

from core.dt_builder import DTGraph, FeatureCounts
from core.exceptions import ConfigError


def planted_cluster_counts(clusters: int = 2, words_per_cluster: int = 10,
                           features_per_cluster: int = 30, shared_features: int = 5,
                           density: float = 0.8, max_count: int = 20,
                           seed: int = 0) -> FeatureCounts:
    """
    Word-feature counts where words of one cluster draw mostly from that cluster's features
    Every word also touches a pool of shared features, so clusters are not trivially disjoint
    """
    if clusters < 1 or words_per_cluster < 1 or features_per_cluster < 1:
        raise ConfigError("clusters, words_per_cluster and features_per_cluster must be >= 1")
    if not 0 < density <= 1:
        raise ConfigError(f"density must be in (0, 1], got {density}")

    rng = np.random.default_rng(seed)
    shared = [f"shared_f{j:03d}" for j in range(shared_features)]
    entries: List[Tuple[str, str, int]] = []
    for c in range(clusters):
        features = [f"c{c}_f{j:03d}" for j in range(features_per_cluster)]
        for i in range(words_per_cluster):
            word = f"c{c}_w{i:03d}"
            mask = rng.random(features_per_cluster) < density
            mask[rng.integers(features_per_cluster)] = True
            for feature in np.array(features)[mask].tolist():
                entries.append((word, feature, int(rng.integers(1, max_count + 1))))
            for feature in shared:
                if rng.random() < 0.5:
                    entries.append((word, feature, int(rng.integers(1, max_count + 1))))
    return FeatureCounts.from_entries(entries)


def clique_members(cluster: int, size: int) -> List[str]:
    return [f"c{cluster}_n{i:03d}" for i in range(size)]


def planted_cliques(clusters: int = 2, size: int = 50, weight: int = 100,
                    bridge_weight: int = 1) -> DTGraph:
    """Disjoint weighted cliques chained by one light edge between consecutive cliques"""
    if clusters < 1 or size < 2:
        raise ConfigError("Need at least one clique of two or more nodes")
    edges = []
    for c in range(clusters):
        members = clique_members(c, size)
        edges.extend((u, v, weight) for u, v in combinations(members, 2))
        if c > 0 and bridge_weight > 0:
            edges.append((clique_members(c - 1, size)[0], members[0], bridge_weight))
    return DTGraph.from_edges(edges)
