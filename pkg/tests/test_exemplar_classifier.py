"""Unit and property tests for the value difference metric and nearest-neighbour search."""

import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from exemplar_wsd.exemplar_classifier import (
    TIE_TOLERANCE,
    ArityMismatch,
    ClassifierError,
    DistanceModel,
    ExemplarMemory,
    TrainedModel,
    ValueDistribution,
    classify,
    example_distance,
    fit_instances,
    instance_rng,
    train,
    value_distance,
)
from exemplar_wsd.feature_extractor import (
    EmptyTraining,
    ExampleVector,
    FeatureExtractor,
    FeatureSchema,
    KnowledgeSource,
)

from .corpus_factory import keyword_dataset, make_instance


PROPERTY_SETTINGS = settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))
METRIC_SETTINGS = settings(PROPERTY_SETTINGS, max_examples=1000)


def single_feature_model(table, senses=("s1", "s2")):
    return DistanceModel(tuple(senses), ({value: ValueDistribution(counts) for value, counts in table.items()},))


def vector(pos, sense=None, instance_id=None, bits=()):
    return ExampleVector(
        pos_window=(pos,) * 6, morph="singular", keyword_bits=tuple(bits),
        collocs=("NIL",) * 9, verb="NIL", sense=sense, instance_id=instance_id,
    )


@st.composite
def count_tables(draw):
    """A random single-feature table over 2 to 12 senses plus the sense list."""
    n_senses = draw(st.integers(min_value=2, max_value=12))
    senses = tuple(f"s{i}" for i in range(n_senses))
    table = {}
    for value in ("a", "b", "c"):
        counts = draw(st.lists(st.integers(min_value=0, max_value=20), min_size=n_senses, max_size=n_senses))
        if sum(counts) == 0:
            counts[draw(st.integers(min_value=0, max_value=n_senses - 1))] = 1
        table[value] = {sense: count for sense, count in zip(senses, counts) if count}
    return single_feature_model(table, senses)


@st.composite
def small_problems(draw):
    """Random labelled rows (at most 30 x 6) plus a query that may hold unseen values."""
    n_senses = draw(st.integers(min_value=1, max_value=4))
    senses = tuple(f"s{i}" for i in range(n_senses))
    arity = draw(st.integers(min_value=1, max_value=6))
    n_rows = draw(st.integers(min_value=1, max_value=30))
    row = st.lists(st.sampled_from("abc"), min_size=arity, max_size=arity).map(tuple)
    rows = draw(st.lists(row, min_size=n_rows, max_size=n_rows))
    labels = draw(st.lists(st.sampled_from(senses), min_size=n_rows, max_size=n_rows))
    query = draw(st.lists(st.sampled_from("abcz"), min_size=arity, max_size=arity).map(tuple))
    return senses, rows, labels, query


def brute_force_distances(rows, labels, senses, query):
    """Recompute every distribution from scratch for one query."""
    def distribution(feature, value):
        counts = [
            sum(1 for row, label in zip(rows, labels) if row[feature] == value and label == sense)
            for sense in senses
        ]
        total = sum(counts)
        if total == 0:
            return [1.0 / len(senses)] * len(senses)
        return [count / total for count in counts]

    distances = []
    for row in rows:
        total = 0.0
        for feature, (a, b) in enumerate(zip(query, row)):
            if a != b:
                total += sum(abs(p - q) for p, q in zip(distribution(feature, a), distribution(feature, b)))
        distances.append(total)
    return distances


class TestTrain:
    """Test cases for building models."""

    def test_single_example(self):
        """Test that one example gives one value of total 1 per feature."""
        schema = FeatureSchema(word="interest", pos="N", senses=("1",))
        model = train([vector("NN", sense="1", instance_id="a")], schema)
        for table in model.distances.tables:
            assert len(table) == 1
            assert next(iter(table.values())).total == 1

    def test_counts(self):
        """Test a, a, b with senses s1, s1, s2."""
        memory = ExemplarMemory.learn([("a",), ("a",), ("b",)], ["s1", "s1", "s2"], ["s1", "s2"])
        table = memory.distances.tables[0]
        assert table["a"].counts == {"s1": 2}
        assert table["b"].counts == {"s2": 1}

    def test_exemplars_stored_verbatim(self, keyword_model, small_keyword_corpus):
        """Test that every training instance becomes an exemplar."""
        assert [e.id for e in keyword_model.exemplars] == [i.id for i in small_keyword_corpus.instances]
        assert [e.sense for e in keyword_model.exemplars] == [i.sense for i in small_keyword_corpus.instances]

    def test_arity_mismatch(self):
        """Test rows of different length."""
        with pytest.raises(ArityMismatch):
            ExemplarMemory.learn([("a", "b"), ("a",)], ["s1", "s1"], ["s1"])

    def test_keyword_arity_mismatch(self):
        """Test vectors whose keyword bits do not match the schema."""
        schema = FeatureSchema(word="interest", pos="N", senses=("1",), keywords=("rate",))
        with pytest.raises(ArityMismatch):
            train([vector("NN", sense="1", bits=())], schema)

    def test_empty(self):
        """Test that there must be something to learn."""
        schema = FeatureSchema(word="interest", pos="N", senses=("1",))
        with pytest.raises(EmptyTraining):
            train([], schema)
        with pytest.raises(EmptyTraining):
            ExemplarMemory.learn([], [], ["s1"])

    def test_unlabelled_or_unknown_sense(self):
        """Test that every row needs a sense from the inventory."""
        with pytest.raises(ClassifierError, match="no sense label"):
            ExemplarMemory.learn([("a",)], [None], ["s1"])
        with pytest.raises(ClassifierError, match="unknown sense"):
            ExemplarMemory.learn([("a",)], ["s9"], ["s1"])

    def test_fit_instances(self, small_keyword_corpus):
        """Test induce, encode and train in one call."""
        dataset = small_keyword_corpus
        model = fit_instances(
            dataset.instances, dataset.word, dataset.pos, dataset.senses,
            sources={KnowledgeSource.SURROUNDING_WORDS},
        )
        assert isinstance(model, TrainedModel)
        assert model.schema.feature_names() == ("K1", "K2", "K3", "K4")
        assert model.distances.arity == 4


class TestValueDistance:
    """Test cases for value_distance."""

    def test_identical_values(self):
        """Test that a value is at distance 0 from itself."""
        model = single_feature_model({"a": {"s1": 3}})
        assert value_distance(model, 0, "a", "a") == 0.0

    def test_hand_computed(self):
        """Test a:{s1:3} against b:{s1:1,s2:1}."""
        model = single_feature_model({"a": {"s1": 3}, "b": {"s1": 1, "s2": 1}})
        assert value_distance(model, 0, "a", "b") == pytest.approx(1.0)

    def test_disjoint_support(self):
        """Test the maximum distance of 2."""
        model = single_feature_model({"a": {"s1": 5}, "c": {"s2": 5}})
        assert value_distance(model, 0, "a", "c") == pytest.approx(2.0)

    def test_unseen_is_uniform(self):
        """Test that unseen values get the uniform distribution."""
        model = single_feature_model({"a": {"s1": 5}})
        assert value_distance(model, 0, "a", "zzz") == pytest.approx(1.0)
        assert value_distance(model, 0, "yyy", "zzz") == 0.0
        assert value_distance(model, 0, "zzz", "zzz") == 0.0

    @pytest.mark.property
    @METRIC_SETTINGS
    @given(count_tables())
    def test_pseudo_metric(self, model):
        """Test identity, symmetry, triangle inequality and range."""
        values = ["a", "b", "c", "unseen"]
        for x in values:
            assert value_distance(model, 0, x, x) == 0.0
            for y in values:
                d_xy = value_distance(model, 0, x, y)
                assert -TIE_TOLERANCE <= d_xy <= 2.0 + TIE_TOLERANCE
                assert d_xy == pytest.approx(value_distance(model, 0, y, x), abs=1e-9)
                for z in values:
                    assert d_xy <= value_distance(model, 0, x, z) + value_distance(model, 0, z, y) + 1e-9

    @pytest.mark.property
    @PROPERTY_SETTINGS
    @given(count_tables())
    def test_compiled_matrix_agrees(self, model):
        """Test the precomputed pairwise matrix against direct computation."""
        compiled = model.compiled[0]
        for a, i in compiled.vocab.items():
            for b, j in compiled.vocab.items():
                assert compiled.pair[i, j] == pytest.approx(value_distance(model, 0, a, b), abs=1e-9)
            assert compiled.unseen_row[i] == pytest.approx(value_distance(model, 0, a, "unseen"), abs=1e-9)


class TestExampleDistance:
    """Test cases for example_distance."""

    def test_equal_examples(self):
        """Test that equal rows are at distance 0."""
        memory = ExemplarMemory.learn([("a", "x"), ("b", "y")], ["s1", "s2"], ["s1", "s2"])
        assert example_distance(memory.distances, ("a", "x"), ("a", "x")) == 0.0

    def test_single_differing_feature(self):
        """Test that distances add up over features."""
        distances = DistanceModel(("s1", "s2"), (
            {"a": ValueDistribution({"s1": 3}), "b": ValueDistribution({"s1": 1, "s2": 1})},
            {"x": ValueDistribution({"s1": 2})},
        ))
        assert example_distance(distances, ("a", "x"), ("b", "x")) == pytest.approx(1.0)

    def test_upper_bound(self):
        """Test every feature at its maximum."""
        table = {"a": ValueDistribution({"s1": 1}), "b": ValueDistribution({"s2": 1})}
        distances = DistanceModel(("s1", "s2"), (table, table, table))
        assert example_distance(distances, ("a",) * 3, ("b",) * 3) == pytest.approx(6.0)

    def test_arity_mismatch(self):
        """Test rows that do not fit the model."""
        memory = ExemplarMemory.learn([("a", "x")], ["s1"], ["s1"])
        with pytest.raises(ArityMismatch):
            example_distance(memory.distances, ("a",), ("a", "x"))

    def test_with_trained_model(self, keyword_model):
        """Test distances between encoded vectors of a trained model."""
        extractor = FeatureExtractor(keyword_model.schema.params)
        first, second = (
            extractor.encode(instance, keyword_model.schema)
            for instance in keyword_dataset(per_sense=1).instances[:2]
        )
        assert example_distance(keyword_model, first, first) == 0.0
        assert example_distance(keyword_model, first, second) == pytest.approx(
            example_distance(keyword_model, second, first)
        )
        assert example_distance(keyword_model, first, second) > 0.0


@pytest.mark.unit
class TestClassify:
    """Test cases for nearest-neighbour classification."""

    def test_single_exemplar(self):
        """Test that a one-exemplar model always answers its sense."""
        memory = ExemplarMemory.learn([("a", "b")], ["s2"], ["s1", "s2"])
        result = classify(memory, ("z", "z"), np.random.default_rng(0))
        assert result.sense == "s2"
        assert result.tie_count == 1

    def test_exact_match_wins(self):
        """Test that an identical exemplar is found at distance 0."""
        memory = ExemplarMemory.learn([("a",), ("a",), ("b",)], ["s1", "s1", "s2"], ["s1", "s2"])
        result = classify(memory, ("b",), np.random.default_rng(0))
        assert result.sense == "s2"
        assert result.exemplar_id == "2"
        assert result.distance == 0.0

    def test_tie_draws_once(self, mocker):
        """Test that a tie consumes exactly one draw from the generator."""
        memory = ExemplarMemory.learn([("a",), ("a",), ("b",)], ["s1", "s1", "s2"], ["s1", "s2"])
        rng = mocker.Mock(wraps=np.random.default_rng(0))
        result = classify(memory, ("a",), rng)
        assert result.tie_count == 2
        assert result.exemplar_id in ("0", "1")
        rng.integers.assert_called_once_with(2)

    def test_no_draw_without_tie(self, mocker):
        """Test that a unique nearest exemplar needs no randomness."""
        memory = ExemplarMemory.learn([("a",), ("a",), ("b",)], ["s1", "s1", "s2"], ["s1", "s2"])
        rng = mocker.Mock(wraps=np.random.default_rng(0))
        classify(memory, ("b",), rng)
        rng.integers.assert_not_called()

    def test_ties_are_spread(self):
        """Test that different generators pick different tied exemplars."""
        rows = [("a",)] * 10
        memory = ExemplarMemory.learn(rows, [f"s{i}" for i in range(10)], [f"s{i}" for i in range(10)])
        picks = {classify(memory, ("a",), np.random.default_rng(seed)).sense for seed in range(50)}
        assert len(picks) > 1

    def test_arity_mismatch(self):
        """Test a query of the wrong length."""
        memory = ExemplarMemory.learn([("a", "b")], ["s1"], ["s1"])
        with pytest.raises(ArityMismatch):
            classify(memory, ("a",), np.random.default_rng(0))

    def test_self_classification(self, keyword_model, small_keyword_corpus):
        """Test that training instances classify at distance 0 to their own sense."""
        results = keyword_model.classify_many(small_keyword_corpus.instances, seed=3)
        assert all(result.distance == 0.0 for result in results)
        assert [r.sense for r in results] == [i.sense for i in small_keyword_corpus.instances]

    def test_classify_many_order_independent(self, keyword_model, small_keyword_corpus):
        """Test that results do not depend on processing order."""
        instances = list(small_keyword_corpus.instances)
        forward = keyword_model.classify_many(instances, seed=11, trial=2)
        backward = keyword_model.classify_many(list(reversed(instances)), seed=11, trial=2)
        assert forward == list(reversed(backward))

    def test_instance_rng_derivation(self):
        """Test that generators depend on seed, trial and id."""
        def draw(*args):
            return instance_rng(*args).integers(1 << 30)
        assert draw(1, "a") == draw(1, "a")
        assert draw(1, "a", 0) == draw(1, "a", 0)
        assert len({draw(1, "a"), draw(2, "a"), draw(1, "b"), draw(1, "a", 0)}) == 4

    @pytest.mark.property
    @PROPERTY_SETTINGS
    @given(small_problems(), st.integers(min_value=0, max_value=2 ** 32))
    def test_matches_brute_force(self, problem, seed):
        """Test tie sets and predictions against an independent recomputation."""
        senses, rows, labels, query = problem
        memory = ExemplarMemory.learn(rows, labels, senses)

        expected = brute_force_distances(rows, labels, senses, query)
        best = min(expected)
        expected_ties = [i for i, d in enumerate(expected) if d <= best + TIE_TOLERANCE]

        computed = memory.distances_to(query)
        ties = list(np.flatnonzero(computed <= computed.min() + TIE_TOLERANCE))
        assert ties == expected_ties

        result = classify(memory, query, np.random.default_rng(seed))
        assert int(result.exemplar_id) in expected_ties
        assert result.tie_count == len(expected_ties)
        if len(expected_ties) == 1:
            assert result.sense == labels[expected_ties[0]]

    @pytest.mark.property
    @PROPERTY_SETTINGS
    @given(small_problems(), st.integers(min_value=0, max_value=2 ** 32))
    def test_label_permutation(self, problem, seed):
        """Test that renaming senses permutes predictions and keeps distances."""
        senses, rows, labels, query = problem
        rename = {sense: f"renamed-{sense}" for sense in senses}
        original = ExemplarMemory.learn(rows, labels, senses)
        renamed = ExemplarMemory.learn(rows, [rename[label] for label in labels], [rename[s] for s in senses])

        assert np.allclose(original.distances_to(query), renamed.distances_to(query), atol=1e-12)
        first = classify(original, query, np.random.default_rng(seed))
        second = classify(renamed, query, np.random.default_rng(seed))
        assert second.sense == rename[first.sense]
        assert second.exemplar_id == first.exemplar_id


@pytest.mark.performance
class TestThroughput:
    """Test cases for classification speed."""

    def test_large_memory(self):
        """Test at least 100 examples per second against 1,769 exemplars."""
        senses = ("1", "2", "3", "4", "5", "6")
        rng = np.random.default_rng(0)
        vocab = [f"w{i}" for i in range(300)]
        instances = []
        for index in range(1969):
            sense = senses[index % len(senses)]
            words = [(str(w), "NN") for w in rng.choice(vocab, size=12)]
            words.insert(6, ("interest", "NN"))
            words.insert(8, (f"cue{sense}", "NN"))
            instances.append(make_instance(f"t{index}", sense, words, 6))
        train_part, test_part = instances[:1769], instances[1769:]

        model = fit_instances(train_part, "interest", "N", senses)
        assert len(model.exemplars) == 1769

        started = time.perf_counter()
        model.classify_many(test_part, seed=0)
        elapsed = time.perf_counter() - started
        assert len(test_part) / elapsed >= 100
