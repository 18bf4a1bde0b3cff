"""
Shared fixtures: random generators, toy graphs, temporary input files, shipped schemas
"""

import json
from pathlib import Path

import numpy as np
import pytest

from core.dt_builder import DTGraph
from core.embedding import EmbeddingMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path as a string"""
    def _write(name: str, content: str) -> str:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture
def triangle():
    return DTGraph.from_edges([("t", "v", 1), ("v", "x", 2), ("t", "x", 1)])


@pytest.fixture
def star():
    """Unweighted 10-node star: centre 'hub' and nine leaves"""
    return DTGraph.from_edges([("hub", f"leaf{i}", 1) for i in range(9)])


def make_embedding(mapping) -> EmbeddingMatrix:
    words = list(mapping)
    return EmbeddingMatrix(words, np.array([mapping[w] for w in words], dtype=np.float64))


@pytest.fixture
def embedding_from():
    return make_embedding


SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"

JSON_TYPES = {
    "string": str,
    "integer": int,
    "number": (int, float),
    "boolean": bool,
    "array": list,
    "object": dict,
}


@pytest.fixture(scope="session")
def shipped_schemas():
    """name -> schema, for every `schemas/<name>.schema.json` in the repository"""
    return {
        path.name[: -len(".schema.json")]: json.loads(path.read_text(encoding="utf-8"))
        for path in sorted(SCHEMA_DIR.glob("*.schema.json"))
    }


def check_document(value, schema, root, where="$"):
    """Assert that a decoded JSON value satisfies the subset of JSON Schema our reports use"""
    if "$ref" in schema:
        schema = root["$defs"][schema["$ref"].rsplit("/", 1)[-1]]
    if "anyOf" in schema:
        errors = []
        for branch in schema["anyOf"]:
            try:
                check_document(value, branch, root, where)
                return
            except AssertionError as e:
                errors.append(str(e))
        raise AssertionError(f"{where}: no branch matched ({'; '.join(errors)})")

    kind = schema.get("type")
    if kind == "null":
        assert value is None, f"{where}: expected null"
        return
    if kind is not None:
        assert isinstance(value, JSON_TYPES[kind]), f"{where}: expected {kind}, got {value!r}"
        if kind in ("integer", "number"):
            assert not isinstance(value, bool), f"{where}: expected {kind}, got a boolean"

    if kind == "array":
        assert len(value) <= schema.get("maxItems", len(value)), f"{where}: too many items"
        for i, item in enumerate(value):
            check_document(item, schema.get("items", {}), root, f"{where}[{i}]")
    elif kind == "object":
        properties = schema.get("properties")
        if properties is not None:
            missing = set(schema.get("required", [])) - set(value)
            assert not missing, f"{where}: missing {sorted(missing)}"
            unknown = set(value) - set(properties)
            assert not unknown, f"{where}: unexpected {sorted(unknown)}"
            for key, item in value.items():
                check_document(item, properties[key], root, f"{where}.{key}")
        elif isinstance(schema.get("additionalProperties"), dict):
            for key, item in value.items():
                check_document(item, schema["additionalProperties"], root, f"{where}.{key}")


@pytest.fixture
def conforms(shipped_schemas):
    """conforms(document, name): check a decoded report against its shipped schema"""
    def _check(document, name: str):
        schema = shipped_schemas[name]
        check_document(document, schema, schema)
    return _check
