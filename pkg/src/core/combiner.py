"""
Vector combination: concatenation, PCA, truncated SVD and graph retrofitting
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from core.dt_builder import DTGraph
from core.embedding import EmbeddingMatrix
from core.exceptions import (
    ConfigError, DimensionMismatchError, EmptyVocabularyError, InsufficientDataError
)
from storage.models import CoverageReport

logger = logging.getLogger(__name__)

COMBINE_METHODS = ("CC", "PCA", "TSVD")
MAX_DROPPED_EXAMPLES = 20


@dataclass
class CombineConfig:
    method: str = "PCA"
    target_dim: int = 300
    normalize_parts: bool = False
    standardize: bool = False

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method not in COMBINE_METHODS:
            raise ConfigError(f"method must be one of {COMBINE_METHODS}, got '{self.method}'")
        if self.target_dim < 1:
            raise ConfigError(f"target_dim must be >= 1, got {self.target_dim}")


@dataclass
class RetrofitConfig:
    """Neighbours are DT edges strictly heavier than `min_edge_weight`"""
    min_edge_weight: int = 500
    iterations: int = 10
    alpha: float = 1.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.min_edge_weight < 0:
            raise ConfigError(f"min_edge_weight must be >= 0, got {self.min_edge_weight}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")


@dataclass
class PCAModel:
    """
    Fitted projection: rows of `components` are orthonormal directions,
    ordered by descending explained variance
    """
    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    singular_values: np.ndarray
    requested_dim: int
    scale: Optional[np.ndarray] = None

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def input_dimension(self) -> int:
        return self.components.shape[1]


def concat_all(embeddings: Sequence[EmbeddingMatrix], normalize_parts: bool = False) -> EmbeddingMatrix:
    """
    Concatenate over the shared vocabulary, coordinates in input order
    The output vocabulary is sorted
    """
    if not embeddings:
        raise ConfigError("Nothing to concatenate")
    shared = set(embeddings[0].vocabulary)
    for emb in embeddings[1:]:
        shared &= set(emb.vocabulary)
    if not shared:
        sizes = ", ".join(str(len(emb)) for emb in embeddings)
        raise EmptyVocabularyError(f"Vocabularies share no word (sizes: {sizes})")

    vocabulary = sorted(shared)
    parts = []
    for emb in embeddings:
        block = emb.subset(vocabulary).vectors
        if normalize_parts:
            norms = np.linalg.norm(block, axis=1, keepdims=True)
            block = np.divide(block, norms, out=np.zeros_like(block), where=norms > 0)
        parts.append(block)
    return EmbeddingMatrix(vocabulary, np.hstack(parts))


def concat(e1: EmbeddingMatrix, e2: EmbeddingMatrix,
           config: Optional[CombineConfig] = None) -> EmbeddingMatrix:
    normalize = config.normalize_parts if config else False
    return concat_all([e1, e2], normalize_parts=normalize)


def vocabulary_coverage(inputs: Sequence[EmbeddingMatrix], output: EmbeddingMatrix) -> CoverageReport:
    kept = set(output.vocabulary)
    seen = set()
    for emb in inputs:
        seen.update(emb.vocabulary)
    dropped = sorted(seen - kept)
    return CoverageReport(
        input_vocab_sizes=[len(emb) for emb in inputs],
        output_vocab_size=len(output),
        dropped_count=len(dropped),
        dropped_examples=dropped[:MAX_DROPPED_EXAMPLES],
    )


def _orient(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude coordinate is positive"""
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), pivots])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def _fit_basis(data: np.ndarray, target_dim: int, min_rows: int) -> Tuple[np.ndarray, np.ndarray]:
    n, d = data.shape
    if n < min_rows:
        raise InsufficientDataError(f"Need at least {min_rows} vectors to fit, got {n}")
    if target_dim < 1 or target_dim > min(n, d):
        raise ConfigError(f"target_dim must be in [1, min(|V|={n}, d={d})], got {target_dim}")

    _, s, vt = linalg.svd(data, full_matrices=False)
    tol = s[0] * max(n, d) * np.finfo(np.float64).eps if len(s) and s[0] > 0 else 0.0
    rank = int(np.count_nonzero(s > tol)) if tol > 0 else 0
    if rank == 0:
        raise InsufficientDataError("Data matrix has rank 0; no direction to keep")
    kept = min(target_dim, rank)
    if kept < target_dim:
        logger.warning(f"Requested {target_dim} components but data rank is {rank}; keeping {kept}")
    return _orient(vt[:kept]), s[:kept]


def pca_fit(e: EmbeddingMatrix, target_dim: int, standardize: bool = False) -> PCAModel:
    """Principal directions of the mean-centred vectors via SVD"""
    data = e.vectors
    mean = data.mean(axis=0)
    centred = data - mean
    scale = None
    if standardize:
        scale = centred.std(axis=0, ddof=1) if len(data) > 1 else np.ones(data.shape[1])
        scale[scale == 0] = 1.0
        centred = centred / scale

    components, singular = _fit_basis(centred, target_dim, min_rows=2)
    return PCAModel(
        mean=mean,
        components=components,
        explained_variance=singular ** 2 / (len(data) - 1),
        singular_values=singular,
        requested_dim=target_dim,
        scale=scale,
    )


def svd_fit(e: EmbeddingMatrix, target_dim: int) -> PCAModel:
    """Top right-singular directions of the raw (uncentred) vectors"""
    components, singular = _fit_basis(e.vectors, target_dim, min_rows=1)
    return PCAModel(
        mean=np.zeros(e.dimension),
        components=components,
        explained_variance=singular ** 2 / max(len(e) - 1, 1),
        singular_values=singular,
        requested_dim=target_dim,
    )


def pca_transform(model: PCAModel, e: EmbeddingMatrix) -> EmbeddingMatrix:
    if e.dimension != model.input_dimension:
        raise DimensionMismatchError(
            f"Model expects {model.input_dimension}-d vectors, got {e.dimension}-d"
        )
    centred = e.vectors - model.mean
    if model.scale is not None:
        centred = centred / model.scale
    return EmbeddingMatrix(e.vocabulary, centred @ model.components.T)


def pca_inverse_transform(model: PCAModel, e: EmbeddingMatrix) -> EmbeddingMatrix:
    """Map projected vectors back to the input space"""
    if e.dimension != model.n_components:
        raise DimensionMismatchError(
            f"Model has {model.n_components} components, got {e.dimension}-d vectors"
        )
    restored = e.vectors @ model.components
    if model.scale is not None:
        restored = restored * model.scale
    return EmbeddingMatrix(e.vocabulary, restored + model.mean)


def truncated_svd(e: EmbeddingMatrix, target_dim: int) -> EmbeddingMatrix:
    return pca_transform(svd_fit(e, target_dim), e)


def combine(embeddings: Sequence[EmbeddingMatrix],
            config: CombineConfig) -> Tuple[EmbeddingMatrix, Optional[PCAModel]]:
    """Concatenate the inputs, then reduce with PCA or TSVD when asked"""
    if len(embeddings) < 2:
        raise ConfigError(f"Combination needs at least two embeddings, got {len(embeddings)}")
    joined = concat_all(embeddings, normalize_parts=config.normalize_parts)
    if config.method == "CC":
        return joined, None

    total_dim = sum(emb.dimension for emb in embeddings)
    if config.target_dim > total_dim:
        raise ConfigError(f"target_dim {config.target_dim} exceeds combined dimension {total_dim}")

    if config.method == "PCA":
        model = pca_fit(joined, config.target_dim, standardize=config.standardize)
    else:
        model = svd_fit(joined, config.target_dim)
    logger.debug(f"{config.method}: {joined.dimension} -> {model.n_components} dimensions")
    return pca_transform(model, joined), model


def retrofit(e: EmbeddingMatrix, graph: DTGraph, config: RetrofitConfig,
             on_sweep: Optional[Callable[[int, float], None]] = None) -> EmbeddingMatrix:
    """
    Gauss-Seidel sweeps in sorted vocabulary order:
    q_i <- (alpha * qhat_i + sum_j beta_ij * q_j) / (alpha + sum_j beta_ij), beta_ij = 1/|N(i)|
    Words without qualifying neighbours keep their vectors
    """
    ordered = e.sorted()
    words = ordered.vocabulary
    index = {w: i for i, w in enumerate(words)}
    if not any(w in graph for w in words):
        raise EmptyVocabularyError(
            f"No embedding word occurs in the graph ({len(words)} words, {graph.number_of_nodes()} nodes)"
        )

    neighbourhoods: List[np.ndarray] = []
    for word in words:
        if word in graph:
            ids = [index[n] for n in graph.neighbors(word)
                   if n in index and graph.weight(word, n) > config.min_edge_weight]
        else:
            ids = []
        neighbourhoods.append(np.array(ids, dtype=np.int64))

    anchors = ordered.vectors
    current = anchors.copy()
    alpha = config.alpha
    linked = sum(1 for ids in neighbourhoods if len(ids))
    logger.debug(f"Retrofitting {linked} of {len(words)} words at weight > {config.min_edge_weight}")

    for sweep in range(1, config.iterations + 1):
        max_change = 0.0
        for i, ids in enumerate(neighbourhoods):
            if not len(ids):
                continue
            beta = 1.0 / len(ids)
            updated = (alpha * anchors[i] + beta * current[ids].sum(axis=0)) / (alpha + beta * len(ids))
            max_change = max(max_change, float(np.linalg.norm(updated - current[i])))
            current[i] = updated
        if on_sweep is not None:
            on_sweep(sweep, max_change)

    return EmbeddingMatrix(words, current)
