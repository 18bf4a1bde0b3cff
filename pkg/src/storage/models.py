"""
Report models using pydantic
Every JSON artifact the pipeline writes is one of these documents
"""

import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


class RunInfo(BaseModel):
    """Echo of the invocation embedded in every document"""
    tool: str = "dtembed"
    version: str
    command: str
    seed: int
    deterministic: bool
    config: Dict[str, Any] = Field(default_factory=dict)


class BuildStats(BaseModel):
    run: RunInfo
    nodes: int
    edges: int
    isolated_nodes: int
    merged_duplicates: int = 0
    weight_histogram: Dict[str, int] = Field(default_factory=dict)


class EmbedMetadata(BaseModel):
    run: RunInfo
    method: str
    line_order: Optional[str] = None
    min_edge_weight: int
    nodes_embedded: int
    edges_after_filter: int
    dimension: int
    walks: Optional[int] = None
    walk_tokens: Optional[int] = None
    equivalent_to_deepwalk: bool = False


class CoverageReport(BaseModel):
    input_vocab_sizes: List[int]
    output_vocab_size: int
    dropped_count: int = 0
    dropped_examples: List[str] = Field(default_factory=list, max_length=20)


class CombineReport(BaseModel):
    run: RunInfo
    method: str
    inputs: List[str]
    dimension: int
    requested_dim: Optional[int] = None
    explained_variance: Optional[List[float]] = None
    coverage: CoverageReport


class RetrofitReport(BaseModel):
    run: RunInfo
    min_edge_weight: int
    iterations: int
    vocab_size: int
    sweep_max_change: List[float]


class AnalogyWeights(BaseModel):
    w1: float
    w2: float

    @field_validator("w1", "w2")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("analogy weights must be finite")
        return value

    def as_tuple(self):
        return self.w1, self.w2


class EvalReport(BaseModel):
    """One dataset scored on one vector space"""
    dataset: str
    metric: str
    value: float
    pairs_evaluated: int
    pairs_skipped_oov: int
    weights: Optional[AnalogyWeights] = None


class DatasetFailure(BaseModel):
    dataset: str
    error_type: str
    message: str


class EvalDocument(BaseModel):
    run: RunInfo
    task: str
    vectors: str
    reports: List[EvalReport] = Field(default_factory=list)
    failures: List[DatasetFailure] = Field(default_factory=list)


class SystemResult(BaseModel):
    system: str
    vectors: str
    reports: List[EvalReport] = Field(default_factory=list)
    failures: List[DatasetFailure] = Field(default_factory=list)


class CompareDocument(BaseModel):
    run: RunInfo
    systems: List[SystemResult]
    best_by_dataset: Dict[str, str] = Field(default_factory=dict)


SCHEMA_MODELS = {
    "build_stats": BuildStats,
    "embed_metadata": EmbedMetadata,
    "coverage_report": CoverageReport,
    "combine_report": CombineReport,
    "retrofit_report": RetrofitReport,
    "eval_report": EvalReport,
    "eval_document": EvalDocument,
    "compare_document": CompareDocument,
}
