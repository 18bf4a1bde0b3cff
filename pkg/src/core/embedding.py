"""
Vocabulary-indexed dense word vectors
"""

from typing import Dict, Iterable, List, Sequence

import numpy as np

from core.exceptions import DimensionMismatchError, EmptyVocabularyError


class EmbeddingMatrix:
    """One row of `vectors` per vocabulary entry, all values finite"""

    def __init__(self, vocabulary: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise DimensionMismatchError(f"Vectors must be a 2-d matrix, got shape {vectors.shape}")
        if len(vocabulary) != vectors.shape[0]:
            raise DimensionMismatchError(
                f"{len(vocabulary)} words but {vectors.shape[0]} vector rows"
            )
        if vectors.shape[1] < 1:
            raise DimensionMismatchError("Embedding dimension must be >= 1")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("Embedding contains NaN or infinite values")

        self.vocabulary: List[str] = list(vocabulary)
        self.vectors = vectors
        self._index: Dict[str, int] = {}
        for i, word in enumerate(self.vocabulary):
            if word in self._index:
                raise ValueError(f"Duplicate vocabulary entry '{word}'")
            self._index[word] = i

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vocabulary)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __getitem__(self, word: str) -> np.ndarray:
        return self.vectors[self._index[word]]

    def subset(self, words: Iterable[str]) -> "EmbeddingMatrix":
        """Rows for `words`, in the given order"""
        words = list(words)
        if not words:
            raise EmptyVocabularyError("Cannot take an empty subset of an embedding")
        rows = [self._index[w] for w in words]
        return EmbeddingMatrix(words, self.vectors[rows].copy())

    def sorted(self) -> "EmbeddingMatrix":
        """Same vectors, lexicographic vocabulary order"""
        return self.subset(sorted(self.vocabulary))

    def __repr__(self) -> str:
        return f"EmbeddingMatrix(words={len(self)}, dimension={self.dimension})"
