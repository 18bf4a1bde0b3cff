"""
Evaluation datasets: similarity pairs, synonym questions, analogy questions
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar, Union

from core.exceptions import DatasetValidationError

SYNONYM_CHOICES = 4
ANALOGY_CHOICES = 5


@dataclass(frozen=True)
class SimilarityPair:
    word1: str
    word2: str
    gold: float

    def __post_init__(self):
        if not math.isfinite(self.gold):
            raise DatasetValidationError(f"Gold score for ({self.word1}, {self.word2}) is not finite")

    def words(self) -> Tuple[str, ...]:
        return self.word1, self.word2


@dataclass(frozen=True)
class MCQItem:
    """Synonym question: pick the choice closest to `question`"""
    question: str
    choices: Tuple[str, ...]
    answer: int

    def __post_init__(self):
        if len(self.choices) != SYNONYM_CHOICES:
            raise DatasetValidationError(
                f"Question '{self.question}' has {len(self.choices)} choices, expected {SYNONYM_CHOICES}"
            )
        if len(set(self.choices)) != len(self.choices):
            raise DatasetValidationError(f"Question '{self.question}' has repeated choices")
        if not 0 <= self.answer < SYNONYM_CHOICES:
            raise DatasetValidationError(
                f"Answer index {self.answer} out of range for question '{self.question}'"
            )

    def words(self) -> Tuple[str, ...]:
        return (self.question,) + tuple(self.choices)


@dataclass(frozen=True)
class AnalogyItem:
    """Stem pair (a1, b1) and five candidate pairs (a2, b2)"""
    a1: str
    b1: str
    choices: Tuple[Tuple[str, str], ...]
    answer: int

    def __post_init__(self):
        if len(self.choices) != ANALOGY_CHOICES:
            raise DatasetValidationError(
                f"Stem ({self.a1}, {self.b1}) has {len(self.choices)} choices, expected {ANALOGY_CHOICES}"
            )
        if not 0 <= self.answer < ANALOGY_CHOICES:
            raise DatasetValidationError(
                f"Answer index {self.answer} out of range for stem ({self.a1}, {self.b1})"
            )

    def words(self) -> Tuple[str, ...]:
        return (self.a1, self.b1) + tuple(w for pair in self.choices for w in pair)


@dataclass
class SimilarityDataset:
    name: str
    pairs: List[SimilarityPair] = field(default_factory=list)

    def __post_init__(self):
        if not self.pairs:
            raise DatasetValidationError(f"Similarity dataset '{self.name}' has no pairs")

    @property
    def items(self) -> List[SimilarityPair]:
        return self.pairs

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class MCQDataset:
    name: str
    items: List[MCQItem] = field(default_factory=list)

    def __post_init__(self):
        if not self.items:
            raise DatasetValidationError(f"Synonym dataset '{self.name}' has no questions")

    def __len__(self) -> int:
        return len(self.items)


@dataclass
class AnalogyDataset:
    name: str
    items: List[AnalogyItem] = field(default_factory=list)

    def __post_init__(self):
        if not self.items:
            raise DatasetValidationError(f"Analogy dataset '{self.name}' has no questions")

    def __len__(self) -> int:
        return len(self.items)


Dataset = Union[SimilarityDataset, MCQDataset, AnalogyDataset]
D = TypeVar("D", SimilarityDataset, MCQDataset, AnalogyDataset)


def _keep(dataset: D, predicate: Callable[[Tuple[str, ...]], bool], name: str) -> D:
    kept = [item for item in dataset.items if predicate(item.words())]
    if isinstance(dataset, SimilarityDataset):
        return SimilarityDataset(name=name, pairs=kept)
    return type(dataset)(name=name, items=kept)


def filter_by_nouns(dataset: D, nouns: Iterable[str]) -> D:
    """Items whose every word is in the noun list; the name gains a -N suffix"""
    noun_set = set(nouns)
    return _keep(dataset, lambda words: all(w in noun_set for w in words), f"{dataset.name}-N")


def restrict_to_vocabulary(dataset: D, vocabularies: Sequence[Iterable[str]]) -> D:
    """Items whose words all have vectors in every given vocabulary"""
    vocab_sets = [set(v) for v in vocabularies]
    return _keep(
        dataset,
        lambda words: all(w in vocab for vocab in vocab_sets for w in words),
        dataset.name,
    )
