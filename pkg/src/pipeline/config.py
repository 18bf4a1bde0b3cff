"""
Configuration management for dtembed
Environment settings, published defaults and per-command option resolution
"""

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from core.combiner import CombineConfig, RetrofitConfig
from core.dt_builder import BuilderConfig
from core.evaluator import DEFAULT_ANALOGY_GRID, make_grid
from core.exceptions import ConfigError
from core.sgns import SGNSConfig
from core.walks import WalkConfig
from storage.models import AnalogyWeights, RunInfo
from utils.helpers import parse_bool, parse_float_list

# Load environment variables
load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    """Process configuration from environment variables"""

    def __init__(self):
        self.THREADS = self._int_env('DTEMBED_THREADS', os.cpu_count() or 1)
        self.LOG_LEVEL = os.getenv('DTEMBED_LOG_LEVEL', 'INFO').upper()
        self.LOG_FILE = os.getenv('DTEMBED_LOG_FILE') or None
        self.VERSION = os.getenv('DTEMBED_VERSION', '1.0.0')

    @staticmethod
    def _int_env(name: str, default: int) -> int:
        """Unparsable values become -1 and are rejected by validate()"""
        raw = os.getenv(name)
        if raw is None or raw.strip() == "":
            return default
        try:
            return int(raw)
        except ValueError:
            return -1

    def validate(self) -> bool:
        """Validate environment configuration"""
        if self.THREADS < 1:
            raise ConfigError(
                f"DTEMBED_THREADS must be a positive integer, got '{os.getenv('DTEMBED_THREADS')}'"
            )
        if self.LOG_LEVEL not in LOG_LEVELS:
            raise ConfigError(f"DTEMBED_LOG_LEVEL must be one of {LOG_LEVELS}, got '{self.LOG_LEVEL}'")
        return True


@dataclass(frozen=True)
class Defaults:
    """Published constants; every one can be overridden"""
    top_k: int = 1000
    lmi_variant: str = "normalized"
    min_edge_weight: int = 50
    dimension: int = 128
    walks: int = 10
    walk_length: int = 80
    p: float = 1.0
    q: float = 1.0
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    batch_size: int = 256
    line_order: str = "second"
    target_dim: int = 300
    retrofit_min_edge_weight: int = 500
    retrofit_iterations: int = 10
    retrofit_alpha: float = 1.0
    seed: int = 0


DEFAULTS = Defaults()

# Embedding method presets
METHOD_PRESETS = {
    "deepwalk": {"walks": True, "p": 1.0, "q": 1.0, "description": "Uniform-bias walks + skip-gram"},
    "node2vec": {"walks": True, "description": "Second-order biased walks + skip-gram"},
    "line": {"walks": False, "description": "Edge sampling, first/second-order proximity"},
}

COMBINE_METHOD_NAMES = ("CC", "PCA", "TSVD")
EVAL_TASKS = {"eval-sim": "sim", "eval-syn": "syn", "eval-analogy": "analogy"}

REQUIRED = object()

# option name -> (converter, default); names match the long flags with '-' -> '_'
_EVAL_OPTIONS = {
    "grid": (str, None),
    "strict": (parse_bool, False),
    "normalize_analogy": (parse_bool, False),
    "nouns": (str, None),
}

COMMAND_OPTIONS: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    "build-dt": {
        "min_overlap": (int, REQUIRED),
        "top_k": (int, DEFAULTS.top_k),
        "lmi_variant": (str, DEFAULTS.lmi_variant),
    },
    "embed": {
        "method": (str, "node2vec"),
        "min_edge_weight": (int, DEFAULTS.min_edge_weight),
        "dim": (int, DEFAULTS.dimension),
        "walks": (int, DEFAULTS.walks),
        "walk_length": (int, DEFAULTS.walk_length),
        "p": (float, DEFAULTS.p),
        "q": (float, DEFAULTS.q),
        "unweighted": (parse_bool, False),
        "window": (int, DEFAULTS.window),
        "negatives": (int, DEFAULTS.negatives),
        "epochs": (int, DEFAULTS.epochs),
        "learning_rate": (float, DEFAULTS.learning_rate),
        "min_learning_rate": (float, DEFAULTS.min_learning_rate),
        "batch_size": (int, DEFAULTS.batch_size),
        "line_order": (str, DEFAULTS.line_order),
        "edge_samples": (int, None),
    },
    "combine": {
        "method": (str, "PCA"),
        "target_dim": (int, DEFAULTS.target_dim),
        "normalize_parts": (parse_bool, False),
        "standardize": (parse_bool, False),
    },
    "retrofit": {
        "min_edge_weight": (int, DEFAULTS.retrofit_min_edge_weight),
        "iterations": (int, DEFAULTS.retrofit_iterations),
        "alpha": (float, DEFAULTS.retrofit_alpha),
    },
    "eval-sim": dict(_EVAL_OPTIONS),
    "eval-syn": dict(_EVAL_OPTIONS),
    "eval-analogy": dict(_EVAL_OPTIONS),
    "compare": dict(_EVAL_OPTIONS, common_vocabulary=(parse_bool, False)),
    "export-schemas": {},
}

GLOBAL_OPTIONS = {
    "seed": (int, DEFAULTS.seed),
    "deterministic": (parse_bool, False),
}


def _normalize_key(key: str) -> str:
    return key.strip().lower().lstrip("-").replace("-", "_")


def load_config_file(path: str, command: str) -> Dict[str, str]:
    """
    Flat key=value file; keys are long flag names with dashes or underscores
    Unknown keys are rejected
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Config file not found: {path}")
    known = set(COMMAND_OPTIONS[command]) | set(GLOBAL_OPTIONS)
    values = {}
    for key, value in dotenv_values(path).items():
        name = _normalize_key(key)
        if name not in known:
            raise ConfigError(f"{path}: unknown key '{key}' for command '{command}'")
        if value is None:
            raise ConfigError(f"{path}: key '{key}' has no value")
        values[name] = value
    return values


def resolve_options(command: str, cli: Dict[str, Any], file_values: Dict[str, str]) -> Dict[str, Any]:
    """Command-line value > config file > default"""
    resolved: Dict[str, Any] = {}
    for name, (convert, default) in {**GLOBAL_OPTIONS, **COMMAND_OPTIONS[command]}.items():
        if cli.get(name) is not None:
            resolved[name] = cli[name]
        elif name in file_values:
            try:
                resolved[name] = convert(file_values[name])
            except ValueError as e:
                raise ConfigError(f"Config value for '{name}' is invalid: {e}")
        elif default is REQUIRED:
            raise ConfigError(f"--{name.replace('_', '-')} is required for {command}")
        else:
            resolved[name] = default
    return resolved


def parse_grid(text: Optional[str]) -> List[AnalogyWeights]:
    """
    'default', 'v1,v2,...' (both weights) or 'w1 values;w2 values'
    """
    if text is None or text.strip().lower() == "default":
        return list(DEFAULT_ANALOGY_GRID)
    try:
        if ";" in text:
            first, second = text.split(";", 1)
            return make_grid(parse_float_list(first), parse_float_list(second))
        values = parse_float_list(text)
        return make_grid(values, values)
    except ValueError as e:
        raise ConfigError(f"Invalid --grid '{text}': {e}")


@dataclass
class PipelineConfig:
    """Everything one subcommand needs, resolved and validated"""
    command: str
    inputs: List[str]
    output: Optional[str] = None
    report: Optional[str] = None
    seed: int = 0
    deterministic: bool = False
    workers: int = 1
    progress: bool = False
    version: str = "1.0.0"
    settings: Dict[str, Any] = field(default_factory=dict)

    def validate_paths(self, *extra: str):
        """Inputs must exist before any work begins"""
        for path in [*self.inputs, *extra]:
            if not os.path.isfile(path):
                raise ConfigError(f"Input file not found: {path}")
        for target in (self.output, self.report):
            if target and os.path.isdir(target):
                raise ConfigError(f"Output path is a directory: {target}")

    def get(self, name: str) -> Any:
        return self.settings[name]

    @property
    def report_path(self) -> Optional[str]:
        if self.report:
            return self.report
        if self.output:
            return f"{self.output}.json"
        return None

    def to_report(self) -> RunInfo:
        """Invocation echo; paths are excluded so reruns elsewhere compare equal"""
        echoed = {k: v for k, v in sorted(self.settings.items()) if k not in ("seed", "deterministic")}
        if echoed.get("nouns"):
            echoed["nouns"] = os.path.basename(echoed["nouns"])
        return RunInfo(
            version=self.version,
            command=self.command,
            seed=self.seed,
            deterministic=self.deterministic,
            config=echoed,
        )

    def builder_config(self) -> BuilderConfig:
        return BuilderConfig(
            min_overlap=self.get("min_overlap"),
            top_k=self.get("top_k"),
            lmi_variant=self.get("lmi_variant"),
            workers=self.workers,
        )

    def walk_config(self) -> WalkConfig:
        return WalkConfig(
            walks_per_node=self.get("walks"),
            walk_length=self.get("walk_length"),
            p=self.get("p"),
            q=self.get("q"),
            seed=self.seed,
            weighted=not self.get("unweighted"),
            workers=self.workers,
        )

    def sgns_config(self) -> SGNSConfig:
        return SGNSConfig(
            dimension=self.get("dim"),
            window=self.get("window"),
            negatives=self.get("negatives"),
            learning_rate=self.get("learning_rate"),
            min_learning_rate=self.get("min_learning_rate"),
            epochs=self.get("epochs"),
            batch_size=self.get("batch_size"),
            edge_samples=self.get("edge_samples"),
            seed=self.seed,
            workers=self.workers,
        )

    def combine_config(self) -> CombineConfig:
        return CombineConfig(
            method=self.get("method"),
            target_dim=self.get("target_dim"),
            normalize_parts=self.get("normalize_parts"),
            standardize=self.get("standardize"),
        )

    def retrofit_config(self) -> RetrofitConfig:
        return RetrofitConfig(
            min_edge_weight=self.get("min_edge_weight"),
            iterations=self.get("iterations"),
            alpha=self.get("alpha"),
        )

    def grid(self) -> List[AnalogyWeights]:
        return parse_grid(self.get("grid"))
