import gzip
import json
import re

import numpy as np
import pytest

from core.dt_builder import DTGraph
from core.embedding import EmbeddingMatrix
from core.exceptions import ParseError
from storage.formats import (
    export_schemas, read_analogy, read_counts, read_edges, read_embedding, read_mcq, read_report,
    read_similarity, read_word_list, write_edges, write_embedding, write_report
)
from storage.models import SCHEMA_MODELS, AnalogyWeights, EvalReport


class TestCounts:
    def test_reads_and_merges_repeats(self, write_file):
        path = write_file("counts.tsv", "cat\tpurr\t3\ncat\tmeow\t2\n\ndog\tbark\t4\ncat\tpurr\t1\n")
        counts = read_counts(path)
        assert counts.entries[("cat", "purr")] == 4
        assert counts.merged_duplicates == 1
        assert counts.total == 10

    def test_gzip_input(self, tmp_path):
        path = tmp_path / "counts.tsv.gz"
        with gzip.open(path, "wt", encoding="utf-8") as handle:
            handle.write("cat\tpurr\t3\n")
        assert read_counts(str(path)).total == 3

    def test_negative_count_reports_line(self, write_file):
        path = write_file("counts.tsv", "cat\tpurr\t3\ncat\tmeow\t-2\n")
        with pytest.raises(ParseError) as excinfo:
            read_counts(path)
        assert excinfo.value.line_number == 2
        assert str(excinfo.value).startswith(f"{path}:2:")

    @pytest.mark.parametrize("content", ["cat\tpurr\n", "cat\tpurr\tthree\n", "cat\tpurr\t1.5\n"])
    def test_malformed_line(self, write_file, content):
        with pytest.raises(ParseError):
            read_counts(write_file("counts.tsv", content))

    def test_empty_file(self, write_file):
        with pytest.raises(ParseError):
            read_counts(write_file("counts.tsv", "\n"))

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "counts.tsv"
        path.write_bytes(b"a\tf\t1\nb\tg\t2\ncaf\xe9\tx\t1\n")
        with pytest.raises(ParseError, match="UTF-8") as info:
            read_counts(str(path))
        assert info.value.line_number == 3

    @pytest.mark.parametrize("count", ["1_000", " 5", "5 ", "0x10", "1e3"])
    def test_count_must_be_plain_digits(self, write_file, count):
        with pytest.raises(ParseError, match="base-10") as info:
            read_counts(write_file("counts.tsv", f"a\tf\t1\nb\tg\t{count}\n"))
        assert info.value.line_number == 2


class TestEdges:
    def test_written_sorted_with_smaller_word_first(self, tmp_path):
        graph = DTGraph.from_edges([("zebra", "apple", 3), ("mango", "apple", 7)])
        path = tmp_path / "out" / "dt.tsv"
        write_edges(str(path), graph)
        assert path.read_text(encoding="utf-8") == "apple\tmango\t7\napple\tzebra\t3\n"
        assert read_edges(str(path)) == graph

    def test_repeated_edge_rejected(self, write_file):
        with pytest.raises(ParseError) as excinfo:
            read_edges(write_file("dt.tsv", "a\tb\t3\nb\ta\t4\n"))
        assert excinfo.value.line_number == 2

    @pytest.mark.parametrize("line", ["a\ta\t3", "a\tb\t0", "a\tb\t-1"])
    def test_invalid_edges(self, write_file, line):
        with pytest.raises(ParseError):
            read_edges(write_file("dt.tsv", line + "\n"))


class TestEmbedding:
    def test_header_and_values(self, write_file):
        path = write_file("vec.txt", "2 3\ncat 0.1 0.2 0.3\ndog -1 0 1e-3\n")
        e = read_embedding(path)
        assert e.vocabulary == ["cat", "dog"]
        np.testing.assert_array_equal(e["dog"], [-1.0, 0.0, 0.001])

    def test_headerless_file(self, write_file):
        e = read_embedding(write_file("vec.txt", "cat 0.1 0.2\ndog 0.3 0.4\n"))
        assert e.dimension == 2
        assert len(e) == 2

    def test_words_may_contain_spaces(self, write_file):
        e = read_embedding(write_file("vec.txt", "1 2\nnew york 0.5 0.25\n"))
        assert e.vocabulary == ["new york"]

    def test_write_then_read_is_exact(self, tmp_path, rng):
        e = EmbeddingMatrix(["a", "b", "c"], rng.normal(size=(3, 4)))
        path = str(tmp_path / "vec.txt")
        write_embedding(path, e)
        restored = read_embedding(path)
        assert restored.vocabulary == e.vocabulary
        np.testing.assert_array_equal(restored.vectors, e.vectors)

    def test_duplicate_word(self, write_file):
        with pytest.raises(ParseError, match="duplicate"):
            read_embedding(write_file("vec.txt", "cat 1 2\ncat 3 4\n"))

    def test_non_finite_value(self, write_file):
        with pytest.raises(ParseError):
            read_embedding(write_file("vec.txt", "cat 1 nan\n"))

    def test_short_line(self, write_file):
        with pytest.raises(ParseError) as excinfo:
            read_embedding(write_file("vec.txt", "2 3\ncat 1 2 3\ndog 1\n"))
        assert excinfo.value.line_number == 3


class TestDatasets:
    def test_similarity_name_from_file_stem(self, write_file):
        ds = read_similarity(write_file("rg65.tsv", "car\tautomobile\t3.92\ngem\tjewel\t3.84\n"))
        assert ds.name == "rg65"
        assert ds.pairs[0].gold == 3.92

    def test_synonym_questions(self, write_file):
        ds = read_mcq(write_file("toefl.tsv", "enormously\tappropriately|uniquely|tremendously|decidedly\t2\n"))
        assert ds.items[0].choices[2] == "tremendously"
        assert ds.items[0].answer == 2

    def test_synonym_wrong_choice_count(self, write_file):
        with pytest.raises(ParseError) as excinfo:
            read_mcq(write_file("toefl.tsv", "big\tlarge|small|tiny|huge\t0\nfast\tquick|slow\t0\n"))
        assert excinfo.value.line_number == 2

    def test_analogy_questions(self, write_file):
        line = "ostrich\tbird\tlion:cat|goose:flock|ewe:sheep|cub:bear|primate:monkey\t0\n"
        ds = read_analogy(write_file("sat.tsv", line))
        assert ds.items[0].choices[0] == ("lion", "cat")
        assert ds.name == "sat"

    def test_analogy_bad_choice(self, write_file):
        line = "a\tb\tc:d|e:f|g|i:j|k:l\t0\n"
        with pytest.raises(ParseError, match="a2:b2"):
            read_analogy(write_file("sat.tsv", line))

    def test_word_list(self, write_file):
        assert read_word_list(write_file("nouns.txt", "car\n\n gem \n")) == ["car", "gem"]


class TestReports:
    def test_sorted_keys_and_trailing_newline(self, tmp_path):
        report = EvalReport(dataset="sat", metric="accuracy", value=0.5, pairs_evaluated=4,
                            pairs_skipped_oov=0, weights=AnalogyWeights(w1=0.2, w2=0.4))
        path = tmp_path / "report.json"
        write_report(str(path), report)
        text = path.read_text(encoding="utf-8")
        assert text.endswith("}\n")
        keys = list(json.loads(text))
        assert keys == sorted(keys)
        assert read_report(str(path), EvalReport) == report

    def test_export_schemas(self, tmp_path):
        written = export_schemas(str(tmp_path / "schemas"))
        assert len(written) == len(SCHEMA_MODELS)
        for path in written:
            with open(path, encoding="utf-8") as handle:
                schema = json.load(handle)
            assert "properties" in schema


def schema_contract(schema):
    """Names, required fields, defaults, types and references; stable across pydantic releases"""
    properties = {}
    for name, field in schema.get("properties", {}).items():
        properties[name] = {
            "type": field.get("type"),
            "default": json.dumps(field.get("default", "<required>")),
            "refs": sorted(set(re.findall(r'"\$ref": "([^"]+)"', json.dumps(field)))),
        }
    return {
        "title": schema.get("title"),
        "description": schema.get("description"),
        "required": schema.get("required", []),
        "properties": properties,
        "defs": {name: schema_contract(sub) for name, sub in schema.get("$defs", {}).items()},
    }


class TestShippedSchemas:
    def test_one_file_per_report_model(self, shipped_schemas):
        assert sorted(shipped_schemas) == sorted(SCHEMA_MODELS)

    @pytest.mark.parametrize("name", sorted(SCHEMA_MODELS))
    def test_shipped_schema_matches_model(self, shipped_schemas, name):
        generated = SCHEMA_MODELS[name].model_json_schema()
        assert schema_contract(shipped_schemas[name]) == schema_contract(generated)

    def test_written_report_conforms(self, tmp_path, conforms):
        report = EvalReport(dataset="sat", metric="accuracy", value=0.5, pairs_evaluated=4,
                            pairs_skipped_oov=1, weights=AnalogyWeights(w1=0.2, w2=0.4))
        path = tmp_path / "report.json"
        write_report(str(path), report)
        conforms(json.loads(path.read_text(encoding="utf-8")), "eval_report")

    def test_nonconforming_document_rejected(self, conforms):
        with pytest.raises(AssertionError, match="missing"):
            conforms({"dataset": "sat", "metric": "accuracy", "value": 0.5}, "eval_report")
        with pytest.raises(AssertionError, match="expected integer"):
            conforms({"dataset": "sat", "metric": "accuracy", "value": 0.5,
                      "pairs_evaluated": "4", "pairs_skipped_oov": 0}, "eval_report")
