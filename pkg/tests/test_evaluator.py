import numpy as np
import pytest

from core.datasets import (
    AnalogyDataset, AnalogyItem, MCQDataset, MCQItem, SimilarityDataset, SimilarityPair
)
from core.embedding import EmbeddingMatrix
from core.evaluator import (
    DEFAULT_ANALOGY_GRID, analogy_grid_accuracies, analogy_score, cosine, eval_analogy,
    eval_similarity, eval_synonym, make_grid, spearman
)
from core.exceptions import (
    ConfigError, DimensionMismatchError, InsufficientDataError, OOVError,
    UndefinedCorrelationError, ZeroVectorError
)
from storage.models import AnalogyWeights


def average_ranks(values):
    return [sum(v < x for v in values) + (sum(v == x for v in values) + 1) / 2 for x in values]


def brute_force_spearman(x, y):
    rx, ry = average_ranks(x), average_ranks(y)
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / (vx ** 0.5 * vy ** 0.5)


class TestCosine:
    def test_hand_value(self):
        assert cosine([1, 2, 3], [4, 5, 6]) == pytest.approx(0.974631846, abs=1e-9)

    def test_bounds_and_symmetry(self, rng):
        for _ in range(100):
            u, v = rng.normal(size=5), rng.normal(size=5)
            assert -1.0 <= cosine(u, v) <= 1.0
            assert cosine(u, v) == cosine(v, u)
        assert cosine([2.0, 0.0], [5.0, 0.0]) == 1.0

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            cosine([0.0, 0.0], [1.0, 0.0])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionMismatchError):
            cosine([1.0, 2.0], [1.0, 2.0, 3.0])


class TestSpearman:
    def test_identical_order_is_exactly_one(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == 1.0
        assert spearman([1, 1, 2], [5, 5, 9]) == 1.0

    def test_reversed_order_is_exactly_minus_one(self):
        assert spearman([1, 2, 3, 4], [4, 3, 2, 1]) == -1.0

    def test_matches_brute_force_with_ties(self, rng):
        checked = 0
        while checked < 1000:
            n = int(rng.integers(3, 20))
            x = rng.integers(0, 6, size=n).tolist()
            y = rng.integers(0, 6, size=n).tolist()
            if len(set(x)) == 1 or len(set(y)) == 1:
                continue
            assert spearman(x, y) == pytest.approx(brute_force_spearman(x, y), abs=1e-12)
            checked += 1

    def test_constant_list_rejected(self):
        with pytest.raises(UndefinedCorrelationError):
            spearman([1, 1, 1], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            spearman([1], [2])

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            spearman([1, 2, 3], [1, 2])


@pytest.fixture
def plane(embedding_from):
    return embedding_from({
        "a": [1.0, 0.0], "b": [1.0, 0.1], "c": [1.0, 1.0], "d": [0.0, 1.0], "e": [-1.0, 0.2],
    })


class TestSimilarity:
    def test_perfect_agreement(self, plane):
        ds = SimilarityDataset("toy", [
            SimilarityPair("a", "b", 9.0), SimilarityPair("a", "c", 5.0),
            SimilarityPair("a", "d", 2.0), SimilarityPair("a", "e", 0.5),
        ])
        report = eval_similarity(plane, ds)
        assert report.value == 1.0
        assert report.metric == "spearman"
        assert report.pairs_evaluated == 4
        assert report.pairs_skipped_oov == 0

    def test_oov_pairs_skipped(self, plane):
        ds = SimilarityDataset("toy", [
            SimilarityPair("a", "b", 9.0), SimilarityPair("a", "d", 2.0), SimilarityPair("a", "zzz", 1.0),
        ])
        report = eval_similarity(plane, ds)
        assert report.pairs_evaluated == 2
        assert report.pairs_skipped_oov == 1

    def test_strict_mode_raises_on_oov(self, plane):
        ds = SimilarityDataset("toy", [SimilarityPair("a", "zzz", 1.0), SimilarityPair("a", "b", 2.0)])
        with pytest.raises(OOVError, match="zzz"):
            eval_similarity(plane, ds, strict=True)

    def test_too_few_scorable_pairs(self, plane):
        ds = SimilarityDataset("toy", [SimilarityPair("a", "b", 1.0), SimilarityPair("x", "y", 2.0)])
        with pytest.raises(InsufficientDataError):
            eval_similarity(plane, ds)

    def test_zero_vector_pairs_skipped(self, embedding_from):
        e = embedding_from({"a": [1.0, 0.0], "b": [1.0, 0.1], "c": [1.0, 1.0], "pad": [0.0, 0.0]})
        ds = SimilarityDataset("toy", [
            SimilarityPair("a", "b", 9.0), SimilarityPair("a", "c", 5.0), SimilarityPair("a", "pad", 1.0),
        ])
        report = eval_similarity(e, ds)
        assert report.value == 1.0
        assert report.pairs_evaluated == 2
        assert report.pairs_skipped_oov == 1


class TestSynonym:
    def test_half_correct(self, plane):
        ds = MCQDataset("syn", [
            MCQItem("a", ("b", "d", "e", "c"), 0),
            MCQItem("a", ("b", "d", "e", "c"), 1),
        ])
        report = eval_synonym(plane, ds)
        assert report.value == 0.5
        assert report.metric == "accuracy"

    def test_oov_choice_cannot_win(self, plane):
        ds = MCQDataset("syn", [MCQItem("a", ("zzz", "e", "d", "yyy"), 2)])
        assert eval_synonym(plane, ds).value == 1.0

    def test_oov_question_skipped(self, plane):
        ds = MCQDataset("syn", [MCQItem("zzz", ("a", "b", "c", "d"), 0), MCQItem("a", ("b", "c", "d", "e"), 0)])
        report = eval_synonym(plane, ds)
        assert report.pairs_evaluated == 1
        assert report.pairs_skipped_oov == 1

    def test_ties_go_to_lowest_index(self, embedding_from):
        e = embedding_from({"q": [1.0, 0.0], "x": [2.0, 0.0], "y": [3.0, 0.0], "z": [0.0, 1.0], "w": [0.0, 2.0]})
        ds = MCQDataset("syn", [MCQItem("q", ("z", "x", "y", "w"), 1)])
        assert eval_synonym(e, ds).value == 1.0

    def test_nothing_scorable(self, plane):
        ds = MCQDataset("syn", [MCQItem("zzz", ("a", "b", "c", "d"), 0)])
        with pytest.raises(InsufficientDataError):
            eval_synonym(plane, ds)

    def test_zero_vector_choice_cannot_win(self, embedding_from):
        e = embedding_from({"q": [1.0, 0.0], "near": [1.0, 0.2], "far": [-1.0, 0.0],
                            "side": [0.0, 1.0], "pad": [0.0, 0.0]})
        ds = MCQDataset("syn", [MCQItem("q", ("pad", "far", "near", "side"), 2)])
        report = eval_synonym(e, ds)
        assert report.value == 1.0
        assert report.pairs_evaluated == 1

    def test_zero_vector_question_skipped(self, embedding_from):
        e = embedding_from({"q": [1.0, 0.0], "near": [1.0, 0.2], "far": [-1.0, 0.0],
                            "side": [0.0, 1.0], "pad": [0.0, 0.0]})
        ds = MCQDataset("syn", [
            MCQItem("pad", ("q", "far", "near", "side"), 0), MCQItem("q", ("far", "near", "side", "pad"), 1),
        ])
        report = eval_synonym(e, ds)
        assert report.pairs_evaluated == 1
        assert report.pairs_skipped_oov == 1
        assert report.value == 1.0


def random_analogies(rng, words, n_items):
    items = []
    for _ in range(n_items):
        picks = rng.choice(len(words), size=12, replace=False).tolist()
        stem = (words[picks[0]], words[picks[1]])
        choices = tuple((words[picks[2 + 2 * k]], words[picks[3 + 2 * k]]) for k in range(5))
        items.append(AnalogyItem(stem[0], stem[1], choices, int(rng.integers(0, 5))))
    return AnalogyDataset("sat", items)


class TestAnalogy:
    def test_score_hand_value(self):
        a1, b1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        assert analogy_score(a1, b1, a1, b1, (0, 0)) == pytest.approx(2.0)
        assert analogy_score(a1, b1, a1, b1, (1, 2)) == pytest.approx(4.0)
        assert analogy_score(a1, b1, b1, a1, AnalogyWeights(w1=1, w2=1)) == pytest.approx(-4.0)

    def test_score_matches_hand_expansion(self, rng):
        for _ in range(200):
            a1, b1, a2, b2 = rng.normal(size=(4, 7))
            w1, w2 = rng.uniform(0, 8, size=2)
            expected = a1 @ a2 + b1 @ b2 + w1 * ((b2 - a2) @ (b1 - a1)) + w2 * ((b2 - b1) @ (a2 - a1))
            assert analogy_score(a1, b1, a2, b2, (w1, w2)) == pytest.approx(expected, abs=1e-12)
            assert analogy_score(a1, b1, a2, b2, (0, 0)) == float(np.dot(a1, a2) + np.dot(b1, b2))

    def test_normalized_scoring_ignores_length(self):
        a1, b1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        a2, b2 = np.array([3.0, 1.0]), np.array([1.0, 4.0])
        raw = analogy_score(a1, b1, a2, b2, (0.4, 0.6), normalize=True)
        scaled = analogy_score(5 * a1, b1, 2 * a2, 7 * b2, (0.4, 0.6), normalize=True)
        assert raw == pytest.approx(scaled)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(DimensionMismatchError):
            analogy_score(np.ones(2), np.ones(2), np.ones(3), np.ones(2), (0, 0))

    def test_default_grid(self):
        assert len(DEFAULT_ANALOGY_GRID) == 100
        points = {w.as_tuple() for w in DEFAULT_ANALOGY_GRID}
        for point in [(0.2, 0.2), (0.8, 0.6), (6.0, 0.6), (0.0, 0.0), (8.0, 8.0)]:
            assert point in points
        assert DEFAULT_ANALOGY_GRID[1].as_tuple() == (0.0, 0.2)

    def test_grid_search_matches_exhaustive_rescan(self, rng):
        words = [f"w{i:02d}" for i in range(40)]
        e = EmbeddingMatrix(words, rng.normal(size=(40, 6)))
        ds = random_analogies(rng, words, 30)
        report = eval_analogy(e, ds)

        best, best_weights = -1.0, None
        for w in DEFAULT_ANALOGY_GRID:
            correct = 0
            for item in ds.items:
                scores = [analogy_score(e[item.a1], e[item.b1], e[a2], e[b2], w) for a2, b2 in item.choices]
                correct += int(np.argmax(scores)) == item.answer
            accuracy = correct / len(ds.items)
            if accuracy > best:
                best, best_weights = accuracy, w

        assert report.value == pytest.approx(best)
        assert report.weights == best_weights
        assert report.pairs_evaluated == 30

    def test_first_grid_point_wins_ties(self, embedding_from):
        e = embedding_from({
            "a": [1.0, 0.0], "b": [0.0, 1.0], "c": [2.0, 0.0], "d": [0.0, 2.0],
            "p": [-1.0, 0.0], "q": [0.0, -1.0], "r": [0.5, 0.5], "s": [0.3, -0.2],
        })
        item = AnalogyItem("a", "b", (("c", "d"), ("p", "q"), ("q", "p"), ("r", "s"), ("s", "r")), 0)
        grid = make_grid([0.0, 1.0], [0.0])
        report = eval_analogy(e, AnalogyDataset("sat", [item]), grid=grid)
        assert report.value == 1.0
        assert report.weights.as_tuple() == (0.0, 0.0)

    def test_oov_stem_skips_item(self, embedding_from):
        e = embedding_from({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [2.0, 0.0], "d": [0.0, 2.0]})
        items = [
            AnalogyItem("zzz", "b", (("c", "d"),) * 5, 0),
            AnalogyItem("a", "b", (("c", "d"), ("x1", "x2"), ("x3", "x4"), ("x5", "x6"), ("x7", "x8")), 0),
        ]
        report = eval_analogy(e, AnalogyDataset("sat", items))
        assert report.pairs_evaluated == 1
        assert report.pairs_skipped_oov == 1
        assert report.value == 1.0

    def test_oov_choice_loses_under_negative_weights(self, embedding_from):
        e = embedding_from({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [-3.0, 0.0], "d": [0.0, -3.0]})
        item = AnalogyItem("a", "b", (("x1", "x2"), ("x3", "x4"), ("c", "d"), ("x5", "x6"), ("x7", "x8")), 2)
        grid = make_grid([-1.0, 8.0], [-1.0, 8.0])
        for weights, accuracy in analogy_grid_accuracies(e, AnalogyDataset("sat", [item]), grid=grid):
            assert accuracy == 1.0

    def test_empty_grid_rejected(self, embedding_from):
        e = embedding_from({"a": [1.0], "b": [2.0], "c": [3.0], "d": [4.0]})
        item = AnalogyItem("a", "b", (("c", "d"),) * 5, 0)
        with pytest.raises(ConfigError):
            eval_analogy(e, AnalogyDataset("sat", [item]), grid=[])

    def test_zero_vector_choice_skipped_when_normalizing(self, embedding_from):
        e = embedding_from({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [2.0, 0.0], "d": [0.0, 2.0], "pad": [0.0, 0.0]})
        item = AnalogyItem("a", "b", (("pad", "d"), ("c", "pad"), ("c", "d"), ("pad", "pad"), ("d", "c")), 2)
        report = eval_analogy(e, AnalogyDataset("sat", [item]), normalize=True)
        assert report.value == 1.0
        assert report.pairs_evaluated == 1
