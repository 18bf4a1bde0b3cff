"""
Intrinsic evaluation of word vectors
Similarity (Spearman), synonym questions and analogy questions with weight grid search
"""

import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import rankdata, spearmanr

from core.datasets import AnalogyDataset, MCQDataset, SimilarityDataset
from core.embedding import EmbeddingMatrix
from core.exceptions import (
    ConfigError, DimensionMismatchError, InsufficientDataError, OOVError,
    UndefinedCorrelationError, ZeroVectorError
)
from storage.models import AnalogyWeights, EvalReport

logger = logging.getLogger(__name__)

GRID_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0, 4.0, 6.0, 8.0)

WeightsLike = Union[AnalogyWeights, Tuple[float, float]]


def make_grid(w1_values: Sequence[float], w2_values: Sequence[float]) -> List[AnalogyWeights]:
    """Row-major grid: w1 is the outer loop"""
    return [AnalogyWeights(w1=w1, w2=w2) for w1 in w1_values for w2 in w2_values]


DEFAULT_ANALOGY_GRID = make_grid(GRID_VALUES, GRID_VALUES)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"Cannot compare vectors of shape {u.shape} and {v.shape}")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0 or norm_v == 0:
        raise ZeroVectorError("Cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (norm_u * norm_v), -1.0, 1.0))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation; tied values share their average rank"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Lists differ in length: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise InsufficientDataError(f"Rank correlation needs at least 2 values, got {len(x)}")

    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    if np.all(rx == rx[0]) or np.all(ry == ry[0]):
        raise UndefinedCorrelationError("Rank correlation is undefined for a constant list")

    # Average ranks are exact half-integers, so these comparisons are exact
    if np.array_equal(rx, ry):
        return 1.0
    if np.array_equal(rx, len(x) + 1 - ry):
        return -1.0

    rho = spearmanr(x, y)[0]
    return float(np.clip(rho, -1.0, 1.0))


def _check_word(e: EmbeddingMatrix, word: str, strict: bool, dataset: str) -> bool:
    if word in e:
        return True
    if strict:
        raise OOVError(word, dataset)
    return False


def _has_direction(e: EmbeddingMatrix, word: str) -> bool:
    """False for an all-zero row, whose cosine is undefined"""
    return bool(np.any(e[word]))


def eval_similarity(e: EmbeddingMatrix, ds: SimilarityDataset, strict: bool = False) -> EvalReport:
    """Zero-vector pairs are skipped and counted with the OOV pairs"""
    gold, predicted = [], []
    skipped = zero = 0
    for pair in ds.pairs:
        known = [_check_word(e, w, strict, ds.name) for w in pair.words()]
        if not all(known):
            skipped += 1
            continue
        if not all(_has_direction(e, w) for w in pair.words()):
            zero += 1
            continue
        gold.append(pair.gold)
        predicted.append(cosine(e[pair.word1], e[pair.word2]))

    if zero:
        logger.debug(f"Similarity '{ds.name}': {zero} pairs touch a zero vector")
    skipped += zero
    if len(gold) < 2:
        raise InsufficientDataError(
            f"Dataset '{ds.name}': {len(gold)} scorable pairs, need at least 2 ({skipped} skipped)"
        )
    return EvalReport(
        dataset=ds.name,
        metric="spearman",
        value=spearman(gold, predicted),
        pairs_evaluated=len(gold),
        pairs_skipped_oov=skipped,
    )


def eval_synonym(e: EmbeddingMatrix, ds: MCQDataset, strict: bool = False) -> EvalReport:
    """
    Predicted choice is the cosine argmax; ties go to the lowest index
    OOV and zero-vector choices score -inf; such questions are skipped
    """
    correct = evaluated = skipped = 0
    for item in ds.items:
        if not _check_word(e, item.question, strict, ds.name) or not _has_direction(e, item.question):
            skipped += 1
            continue
        question = e[item.question]
        similarities = np.full(len(item.choices), -np.inf)
        for k, choice in enumerate(item.choices):
            if _check_word(e, choice, strict, ds.name) and _has_direction(e, choice):
                similarities[k] = cosine(question, e[choice])
        evaluated += 1
        if int(np.argmax(similarities)) == item.answer:
            correct += 1

    if evaluated == 0:
        raise InsufficientDataError(f"Dataset '{ds.name}': no scorable questions ({skipped} skipped)")
    return EvalReport(
        dataset=ds.name,
        metric="accuracy",
        value=correct / evaluated,
        pairs_evaluated=evaluated,
        pairs_skipped_oov=skipped,
    )


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ZeroVectorError("Cannot normalise a zero vector")
    return vector / norm


def _analogy_terms(a1: np.ndarray, b1: np.ndarray, a2: np.ndarray, b2: np.ndarray,
                   normalize: bool = False) -> Tuple[float, float, float]:
    """(a1.a2 + b1.b2, (b2-a2).(b1-a1), (b2-b1).(a2-a1))"""
    vectors = [np.asarray(v, dtype=np.float64) for v in (a1, b1, a2, b2)]
    if len({v.shape for v in vectors}) != 1:
        raise DimensionMismatchError(f"Analogy vectors differ in shape: {[v.shape for v in vectors]}")
    if normalize:
        vectors = [_unit(v) for v in vectors]
    a1, b1, a2, b2 = vectors
    return (
        float(np.dot(a1, a2) + np.dot(b1, b2)),
        float(np.dot(b2 - a2, b1 - a1)),
        float(np.dot(b2 - b1, a2 - a1)),
    )


def _weights(w: WeightsLike) -> Tuple[float, float]:
    return w.as_tuple() if isinstance(w, AnalogyWeights) else (float(w[0]), float(w[1]))


def analogy_score(a1: np.ndarray, b1: np.ndarray, a2: np.ndarray, b2: np.ndarray,
                  w: WeightsLike, normalize: bool = False) -> float:
    """s = a1.a2 + b1.b2 + w1 (b2-a2).(b1-a1) + w2 (b2-b1).(a2-a1)"""
    w1, w2 = _weights(w)
    t0, t1, t2 = _analogy_terms(a1, b1, a2, b2, normalize)
    return t0 + w1 * t1 + w2 * t2


def _analogy_tables(e: EmbeddingMatrix, ds: AnalogyDataset, strict: bool,
                    normalize: bool) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Per-item, per-choice score terms; OOV choices get -inf in every term
    With normalisation a zero vector counts as OOV
    """
    def usable(words) -> bool:
        if not all([_check_word(e, w, strict, ds.name) for w in words]):
            return False
        return not normalize or all(_has_direction(e, w) for w in words)

    tables, answers = [], []
    skipped = 0
    for item in ds.items:
        if not usable((item.a1, item.b1)):
            skipped += 1
            continue
        terms = np.full((len(item.choices), 3), -np.inf)
        for k, (a2, b2) in enumerate(item.choices):
            if usable((a2, b2)):
                terms[k] = _analogy_terms(e[item.a1], e[item.b1], e[a2], e[b2], normalize)
        tables.append(terms)
        answers.append(item.answer)

    if not tables:
        raise InsufficientDataError(f"Dataset '{ds.name}': no scorable questions ({skipped} OOV)")
    return np.stack(tables), np.array(answers, dtype=np.int64), skipped


def _grid_accuracy(terms: np.ndarray, answers: np.ndarray, w1: float, w2: float) -> float:
    # -inf terms mark OOV choices; they stay -inf whatever the weight signs
    oov = ~np.isfinite(terms).all(axis=2)
    clean = np.where(np.isfinite(terms), terms, 0.0)
    scores = clean[:, :, 0] + w1 * clean[:, :, 1] + w2 * clean[:, :, 2]
    scores[oov] = -np.inf
    return float(np.mean(np.argmax(scores, axis=1) == answers))


def analogy_grid_accuracies(e: EmbeddingMatrix, ds: AnalogyDataset,
                            grid: Optional[Sequence[AnalogyWeights]] = None,
                            strict: bool = False,
                            normalize: bool = False) -> List[Tuple[AnalogyWeights, float]]:
    """Accuracy at every grid point, in grid order"""
    grid = DEFAULT_ANALOGY_GRID if grid is None else list(grid)
    if not grid:
        raise ConfigError("Analogy weight grid is empty")
    terms, answers, _ = _analogy_tables(e, ds, strict, normalize)
    return [(w, _grid_accuracy(terms, answers, *_weights(w))) for w in grid]


def eval_analogy(e: EmbeddingMatrix, ds: AnalogyDataset,
                 grid: Optional[Sequence[AnalogyWeights]] = None,
                 strict: bool = False, normalize: bool = False) -> EvalReport:
    """Best accuracy over the grid, with the first grid point attaining it"""
    grid = DEFAULT_ANALOGY_GRID if grid is None else list(grid)
    if not grid:
        raise ConfigError("Analogy weight grid is empty")
    terms, answers, skipped = _analogy_tables(e, ds, strict, normalize)

    best_weights, best_accuracy = grid[0], -1.0
    for w in grid:
        accuracy = _grid_accuracy(terms, answers, *_weights(w))
        if accuracy > best_accuracy:
            best_weights, best_accuracy = w, accuracy

    w1, w2 = _weights(best_weights)
    logger.debug(f"Analogy '{ds.name}': best accuracy {best_accuracy:.3f} at w=({w1}, {w2})")
    return EvalReport(
        dataset=ds.name,
        metric="accuracy",
        value=best_accuracy,
        pairs_evaluated=len(answers),
        pairs_skipped_oov=skipped,
        weights=AnalogyWeights(w1=w1, w2=w2),
    )
