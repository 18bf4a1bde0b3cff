"""
Readers and writers for the pipeline's text formats
Malformed input raises ParseError with the file path and 1-based line number
"""

import gzip
import json
import logging
import math
import os
import re
from pathlib import Path
from typing import IO, Iterator, List, Tuple, Type, Union

import numpy as np
from pydantic import BaseModel

from core.datasets import (
    AnalogyDataset, AnalogyItem, MCQDataset, MCQItem, SimilarityDataset, SimilarityPair
)
from core.dt_builder import DTGraph, FeatureCounts
from core.embedding import EmbeddingMatrix
from core.exceptions import DatasetValidationError, DTEmbedError, ParseError
from storage.models import SCHEMA_MODELS

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

INTEGER = re.compile(r"[+-]?[0-9]+")


def _open(path: PathLike, mode: str = "rt") -> IO[str]:
    if str(path).endswith(".gz"):
        return gzip.open(path, mode, encoding="utf-8")
    return open(path, mode, encoding="utf-8", newline="\n" if "w" in mode else None)


def _ensure_parent(path: PathLike):
    parent = os.path.dirname(str(path))
    if parent and not os.path.exists(parent):
        os.makedirs(parent, exist_ok=True)


def _lines(path: PathLike) -> Iterator[Tuple[int, str]]:
    """Non-blank lines with their 1-based numbers, trailing newline removed"""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as handle:
        for number, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError as e:
                raise ParseError(str(path), number, f"not valid UTF-8 ({e.reason})")
            if line.strip():
                yield number, line


def _fields(path: PathLike, number: int, line: str, expected: int) -> List[str]:
    fields = line.split("\t")
    if len(fields) != expected:
        raise ParseError(str(path), number, f"expected {expected} tab-separated fields, got {len(fields)}")
    if any(not f for f in fields):
        raise ParseError(str(path), number, "empty field")
    return fields


def _int(path: PathLike, number: int, text: str, what: str) -> int:
    if not INTEGER.fullmatch(text):
        raise ParseError(str(path), number, f"{what} '{text}' is not a base-10 integer")
    return int(text)


def _float(path: PathLike, number: int, text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(str(path), number, f"{what} '{text}' is not a number")
    if not math.isfinite(value):
        raise ParseError(str(path), number, f"{what} '{text}' is not finite")
    return value


def _dataset_name(path: PathLike) -> str:
    name = os.path.basename(str(path))
    for suffix in (".gz", ".tsv", ".txt"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name


# Counts

def read_counts(path: PathLike) -> FeatureCounts:
    """`word<TAB>feature<TAB>count` lines; repeated pairs are summed"""
    def entries():
        for number, line in _lines(path):
            word, feature, raw = _fields(path, number, line, 3)
            count = _int(path, number, raw, "count")
            if count < 0:
                raise ParseError(str(path), number, f"negative count {count}")
            yield word, feature, count

    counts = FeatureCounts.from_entries(entries())
    if not counts.entries:
        raise ParseError(str(path), 1, "no positive counts in file")
    if counts.merged_duplicates:
        logger.warning(f"{path}: merged {counts.merged_duplicates} repeated (word, feature) lines")
    return counts


def write_counts(path: PathLike, counts: FeatureCounts):
    _ensure_parent(path)
    with _open(path, "wt") as handle:
        for (word, feature), count in sorted(counts.entries.items()):
            handle.write(f"{word}\t{feature}\t{count}\n")


# Edge lists

def read_edges(path: PathLike) -> DTGraph:
    edges = {}
    for number, line in _lines(path):
        u, v, raw = _fields(path, number, line, 3)
        weight = _int(path, number, raw, "weight")
        if weight <= 0:
            raise ParseError(str(path), number, f"non-positive weight {weight}")
        if u == v:
            raise ParseError(str(path), number, f"self-loop on '{u}'")
        key = (u, v) if u < v else (v, u)
        if key in edges:
            raise ParseError(str(path), number, f"edge ({key[0]}, {key[1]}) listed twice")
        edges[key] = weight
    if not edges:
        raise ParseError(str(path), 1, "edge list is empty")
    return DTGraph.from_edges((u, v, w) for (u, v), w in edges.items())


def write_edges(path: PathLike, graph: DTGraph):
    """Each edge once, word1 < word2, sorted"""
    _ensure_parent(path)
    with _open(path, "wt") as handle:
        for u, v, weight in graph.edges():
            handle.write(f"{u}\t{v}\t{weight}\n")


# Embeddings

def _header(tokens: List[str]) -> Tuple[int, int]:
    if len(tokens) == 2 and all(t.isdigit() for t in tokens):
        return int(tokens[0]), int(tokens[1])
    return -1, -1


def read_embedding(path: PathLike) -> EmbeddingMatrix:
    """
    Optional `<vocab_size> <dimension>` header, then `word v1 ... vd`
    Words may contain spaces; the last d tokens are the vector
    """
    words: List[str] = []
    rows: List[np.ndarray] = []
    seen = set()
    size, dim = -1, -1

    for number, line in _lines(path):
        tokens = line.rstrip(" ").split(" ")
        if number == 1 or (not words and dim < 0):
            size, header_dim = _header(tokens)
            if header_dim >= 0:
                dim = header_dim
                if dim < 1:
                    raise ParseError(str(path), number, "header declares dimension 0")
                continue
            dim = len(tokens) - 1
            if dim < 1:
                raise ParseError(str(path), number, "vector line has no values")

        if len(tokens) < dim + 1:
            raise ParseError(str(path), number, f"expected a word and {dim} values, got {len(tokens)} tokens")
        word = " ".join(tokens[:-dim])
        try:
            values = np.array([float(t) for t in tokens[-dim:]], dtype=np.float64)
        except ValueError:
            raise ParseError(str(path), number, "vector values are not all numbers")
        if not np.isfinite(values).all():
            raise ParseError(str(path), number, f"non-finite value in vector for '{word}'")
        if word in seen:
            raise ParseError(str(path), number, f"duplicate word '{word}'")
        seen.add(word)
        words.append(word)
        rows.append(values)

    if not words:
        raise ParseError(str(path), 1, "no vectors in file")
    if size >= 0 and size != len(words):
        logger.warning(f"{path}: header declares {size} words, file has {len(words)}")
    return EmbeddingMatrix(words, np.vstack(rows))


def write_embedding(path: PathLike, e: EmbeddingMatrix):
    """Header line, then one word per line; floats written with round-trip precision"""
    _ensure_parent(path)
    with _open(path, "wt") as handle:
        handle.write(f"{len(e)} {e.dimension}\n")
        for word, row in zip(e.vocabulary, e.vectors):
            handle.write(word + " " + " ".join(repr(x) for x in row.tolist()) + "\n")


# Evaluation datasets

def read_similarity(path: PathLike, name: str = None) -> SimilarityDataset:
    """`word1<TAB>word2<TAB>score`"""
    pairs = []
    for number, line in _lines(path):
        w1, w2, raw = _fields(path, number, line, 3)
        pairs.append(SimilarityPair(w1, w2, _float(path, number, raw, "score")))
    if not pairs:
        raise ParseError(str(path), 1, "dataset has no pairs")
    return SimilarityDataset(name=name or _dataset_name(path), pairs=pairs)


def read_mcq(path: PathLike, name: str = None) -> MCQDataset:
    """`question<TAB>c1|c2|c3|c4<TAB>answer_index`"""
    items = []
    for number, line in _lines(path):
        question, choices, raw = _fields(path, number, line, 3)
        try:
            items.append(MCQItem(question, tuple(choices.split("|")), _int(path, number, raw, "answer")))
        except DatasetValidationError as e:
            raise ParseError(str(path), number, str(e))
    if not items:
        raise ParseError(str(path), 1, "dataset has no questions")
    return MCQDataset(name=name or _dataset_name(path), items=items)


def read_analogy(path: PathLike, name: str = None) -> AnalogyDataset:
    """`a1<TAB>b1<TAB>a2:b2|...|a2:b2<TAB>answer_index`"""
    items = []
    for number, line in _lines(path):
        a1, b1, choices, raw = _fields(path, number, line, 4)
        pairs = []
        for choice in choices.split("|"):
            parts = choice.split(":")
            if len(parts) != 2 or not all(parts):
                raise ParseError(str(path), number, f"choice '{choice}' is not of the form a2:b2")
            pairs.append((parts[0], parts[1]))
        try:
            items.append(AnalogyItem(a1, b1, tuple(pairs), _int(path, number, raw, "answer")))
        except DatasetValidationError as e:
            raise ParseError(str(path), number, str(e))
    if not items:
        raise ParseError(str(path), 1, "dataset has no questions")
    return AnalogyDataset(name=name or _dataset_name(path), items=items)


def read_word_list(path: PathLike) -> List[str]:
    """One word per line, e.g. a noun list"""
    return [line.strip() for _, line in _lines(path)]


DATASET_READERS = {
    "sim": read_similarity,
    "syn": read_mcq,
    "analogy": read_analogy,
}


# Reports

def write_report(path: PathLike, report: BaseModel):
    """Sorted keys, two-space indent, trailing newline"""
    _ensure_parent(path)
    payload = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)
    with _open(path, "wt") as handle:
        handle.write(payload + "\n")


def read_report(path: PathLike, model: Type[BaseModel]) -> BaseModel:
    with _open(path) as handle:
        return model.model_validate_json(handle.read())


def export_schemas(directory: PathLike) -> List[str]:
    """One `<name>.schema.json` per report model; returns the written paths"""
    if os.path.exists(str(directory)) and not os.path.isdir(str(directory)):
        raise DTEmbedError(f"{directory} exists and is not a directory")
    os.makedirs(str(directory), exist_ok=True)
    written = []
    for name, model in sorted(SCHEMA_MODELS.items()):
        target = os.path.join(str(directory), f"{name}.schema.json")
        with _open(target, "wt") as handle:
            handle.write(json.dumps(model.model_json_schema(), sort_keys=True, indent=2) + "\n")
        written.append(target)
    return written
