"""
Error hierarchy for dtembed
Every failure the pipeline can report maps to one of these
"""

from typing import Optional


class DTEmbedError(Exception):
    """Base class for all dtembed errors"""


class ConfigError(DTEmbedError, ValueError):
    """A configuration value violates its invariant"""


class CountsValidationError(DTEmbedError, ValueError):
    """Word-feature counts are empty or their marginals disagree"""


class EmptyGraphError(DTEmbedError, ValueError):
    """A graph has no usable nodes or edges for the requested operation"""


class GraphValidationError(DTEmbedError, ValueError):
    """An edge is a self-loop or carries a non-positive weight"""


class EmptyVocabularyError(DTEmbedError, ValueError):
    """Two or more vocabularies share no word"""


class DimensionMismatchError(DTEmbedError, ValueError):
    """Vectors or matrices have incompatible dimensions"""


class ZeroVectorError(DTEmbedError, ValueError):
    """Cosine similarity requested for a zero vector"""


class UndefinedCorrelationError(DTEmbedError, ValueError):
    """Rank correlation of a constant list"""


class DivergenceError(DTEmbedError, ArithmeticError):
    """Training produced NaN or infinite values"""


class InsufficientDataError(DTEmbedError, ValueError):
    """Too few scorable items or tokens to compute a result"""


class DatasetValidationError(DTEmbedError, ValueError):
    """An evaluation dataset item violates its shape"""


class OOVError(DTEmbedError, KeyError):
    """A word is missing from the vocabulary (strict mode only)"""

    def __init__(self, word: str, dataset: Optional[str] = None):
        self.word = word
        self.dataset = dataset
        where = f" in dataset '{dataset}'" if dataset else ""
        super().__init__(f"Out-of-vocabulary word '{word}'{where}")

    def __str__(self) -> str:
        return self.args[0]


class ParseError(DTEmbedError, ValueError):
    """Malformed input file; carries the path and 1-based line number"""

    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        self.message = message
        super().__init__(f"{path}:{line_number}: {message}")
