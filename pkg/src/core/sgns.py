"""
Skip-gram with negative sampling over walk corpora
Same update rule as word2vec's train_sg_pair, applied to mini-batches of pairs
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit
from tqdm import tqdm

from core.embedding import EmbeddingMatrix
from core.exceptions import ConfigError, DivergenceError, InsufficientDataError
from core.walks import WalkCorpus

logger = logging.getLogger(__name__)


@dataclass
class SGNSConfig:
    """Training settings shared by skip-gram and LINE"""
    dimension: int = 128
    window: int = 10
    negatives: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    epochs: int = 5
    seed: int = 0
    batch_size: int = 256
    shrink_window: bool = True
    noise_power: float = 0.75
    chunk_walks: int = 1000
    edge_samples: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {self.dimension}")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.negatives < 1:
            raise ConfigError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0 or not 0 <= self.min_learning_rate <= self.learning_rate:
            raise ConfigError(
                f"need 0 <= min_learning_rate <= learning_rate, learning_rate > 0; "
                f"got {self.min_learning_rate}, {self.learning_rate}"
            )
        if self.batch_size < 1 or self.chunk_walks < 1 or self.workers < 1:
            raise ConfigError("batch_size, chunk_walks and workers must be >= 1")
        if self.edge_samples is not None and self.edge_samples < 1:
            raise ConfigError(f"edge_samples must be >= 1, got {self.edge_samples}")


def log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def pair_objective(center: np.ndarray, context: np.ndarray, negatives: np.ndarray) -> float:
    """log s(u_ctx . v) + sum_n log s(-u_n . v) for one (center, context) pair"""
    positive = log_sigmoid(np.dot(context, center))
    negative = log_sigmoid(-(negatives @ center)).sum()
    return float(positive + negative)


def batch_gradients(centers: np.ndarray, contexts: np.ndarray,
                    negatives: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Ascent directions of the pair objective for a batch
    centers (B, d), contexts (B, d), negatives (B, K, d)
    """
    positive_score = np.einsum("bd,bd->b", centers, contexts)
    negative_score = np.einsum("bkd,bd->bk", negatives, centers)
    g_positive = 1.0 - expit(positive_score)
    g_negative = -expit(negative_score)

    grad_centers = g_positive[:, None] * contexts + np.einsum("bk,bkd->bd", g_negative, negatives)
    grad_contexts = g_positive[:, None] * centers
    grad_negatives = g_negative[:, :, None] * centers[:, None, :]
    return grad_centers, grad_contexts, grad_negatives


def pair_gradients(center: np.ndarray, context: np.ndarray,
                   negatives: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of `pair_objective` w.r.t. center, context and each negative"""
    g_center, g_context, g_negatives = batch_gradients(
        center[None, :], context[None, :], negatives[None, :, :]
    )
    return g_center[0], g_context[0], g_negatives[0]


class NoiseSampler:
    """Draws noise words with probability proportional to count ** power"""

    def __init__(self, counts: np.ndarray, power: float = 0.75):
        counts = np.asarray(counts, dtype=np.float64)
        if np.count_nonzero(counts) < 2:
            raise InsufficientDataError("Negative sampling needs at least two distinct tokens")
        self.cum_table = np.cumsum(counts ** power)

    def probabilities(self) -> np.ndarray:
        return np.diff(self.cum_table, prepend=0.0) / self.cum_table[-1]

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        draws = rng.random(size) * self.cum_table[-1]
        return np.searchsorted(self.cum_table, draws, side="right")


class NegativeSamplingTrainer:
    """
    Input/context matrices plus the shared update step
    With `shared_context` the context side is the input matrix itself
    """

    def __init__(self, n_rows: int, config: SGNSConfig, noise_counts: np.ndarray,
                 total_work: float, shared_context: bool = False):
        self.config = config
        self.noise = NoiseSampler(noise_counts, config.noise_power)
        init_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
        d = config.dimension
        self.vectors = (init_rng.random((n_rows, d)) - 0.5) / d
        self.contexts = self.vectors if shared_context else np.zeros((n_rows, d))
        self.total_work = max(float(total_work), 1.0)
        self._done = 0.0
        self._lock = threading.Lock()

    def learning_rate(self) -> float:
        progress = min(self._done / self.total_work, 1.0)
        start, end = self.config.learning_rate, self.config.min_learning_rate
        return start - (start - end) * progress

    def train_batch(self, centers: np.ndarray, contexts: np.ndarray,
                    rng: np.random.Generator, work: float):
        lr = self.learning_rate()
        negatives = self.noise.sample(rng, (len(centers), self.config.negatives))

        g_centers, g_contexts, g_negatives = batch_gradients(
            self.vectors[centers], self.contexts[contexts], self.contexts[negatives]
        )
        np.add.at(self.contexts, contexts, lr * g_contexts)
        np.add.at(self.contexts, negatives, lr * g_negatives)
        np.add.at(self.vectors, centers, lr * g_centers)

        with self._lock:
            self._done += work

    def check_finite(self):
        if not (np.isfinite(self.vectors).all() and np.isfinite(self.contexts).all()):
            raise DivergenceError(
                f"Training diverged (learning rate {self.config.learning_rate}); vectors contain NaN/Inf"
            )


def window_pairs(walks: List[np.ndarray], window: int, shrink: bool,
                 rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    (center, context) pairs within the window, both directions
    With `shrink`, each center draws its own window uniformly in [1, window]
    """
    by_length: Dict[int, List[np.ndarray]] = {}
    for walk in walks:
        by_length.setdefault(len(walk), []).append(walk)

    centers, contexts = [], []
    for length in sorted(by_length):
        block = np.vstack(by_length[length])
        if shrink:
            reach = rng.integers(1, window + 1, size=block.shape)
        else:
            reach = np.full(block.shape, window)
        for offset in range(1, min(window, length - 1) + 1):
            forward = reach[:, :-offset] >= offset
            centers.append(block[:, :-offset][forward])
            contexts.append(block[:, offset:][forward])
            backward = reach[:, offset:] >= offset
            centers.append(block[:, offset:][backward])
            contexts.append(block[:, :-offset][backward])

    if not centers:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train_sgns(corpus: WalkCorpus, config: SGNSConfig, progress: bool = False) -> EmbeddingMatrix:
    """Train skip-gram vectors on the walks; returns the input-side vectors"""
    if len(corpus) == 0 or corpus.num_tokens == 0:
        raise InsufficientDataError("Walk corpus is empty")

    counts = corpus.token_counts()
    present = np.flatnonzero(counts > 0)
    if len(present) < 2:
        raise InsufficientDataError("Walk corpus has a single distinct token; negative sampling is undefined")

    remap = np.full(len(corpus.nodes), -1, dtype=np.int64)
    remap[present] = np.arange(len(present))
    walks = [remap[w] for w in corpus.walks]
    vocabulary = [corpus.nodes[i] for i in present]
    token_total = float(sum(len(w) for w in walks))

    trainer = NegativeSamplingTrainer(
        len(vocabulary), config, counts[present], total_work=config.epochs * token_total
    )
    chunks = [walks[i:i + config.chunk_walks] for i in range(0, len(walks), config.chunk_walks)]

    def run_chunk(epoch: int, chunk_id: int):
        chunk = chunks[chunk_id]
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1, epoch, chunk_id]))
        centers, contexts = window_pairs(chunk, config.window, config.shrink_window, rng)
        chunk_tokens = float(sum(len(w) for w in chunk))
        if len(centers) == 0:
            trainer.train_batch(centers, contexts, rng, chunk_tokens)
            return
        order = rng.permutation(len(centers))
        centers, contexts = centers[order], contexts[order]
        per_pair = chunk_tokens / len(centers)
        for start in range(0, len(centers), config.batch_size):
            stop = min(start + config.batch_size, len(centers))
            trainer.train_batch(centers[start:stop], contexts[start:stop], rng, per_pair * (stop - start))

    bar = tqdm(total=config.epochs * len(chunks), desc="sgns", unit="chunk", disable=not progress)
    for epoch in range(config.epochs):
        if config.workers > 1:
            # Unsynchronised updates to the shared matrices are an accepted race
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                for _ in pool.map(lambda c: run_chunk(epoch, c), range(len(chunks))):
                    bar.update(1)
        else:
            for chunk_id in range(len(chunks)):
                run_chunk(epoch, chunk_id)
                bar.update(1)
        trainer.check_finite()
        logger.debug(f"SGNS epoch {epoch + 1}/{config.epochs} done, lr={trainer.learning_rate():.6f}")
    bar.close()

    return EmbeddingMatrix(vocabulary, trainer.vectors.copy())
