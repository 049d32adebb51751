"""Exemplar-based nearest-neighbour classification with a value difference metric."""

import logging
import time
import zlib
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .corpus_reader import Instance
from .feature_extractor import (
    ALL_SOURCES,
    EmptyTraining,
    ExampleVector,
    FeatureExtractor,
    FeatureSchema,
    KnowledgeSource,
    SchemaParams,
)


# Distances within this margin of the minimum count as tied
TIE_TOLERANCE = 1e-9

logger = logging.getLogger(__name__)


class ClassifierError(Exception):
    """Exception raised when training or classification fails."""
    pass


class ArityMismatch(ClassifierError):
    """Exception raised when feature vectors have different lengths."""
    pass


@dataclass(frozen=True)
class ValueDistribution:
    """Training examples per sense that carry one value of one feature."""
    counts: Dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def probabilities(self, senses: Sequence[str]) -> np.ndarray:
        """Conditional sense distribution, in inventory order."""
        vector = np.array([self.counts.get(sense, 0) for sense in senses], dtype=float)
        return vector / vector.sum()


@dataclass
class _CompiledFeature:
    vocab: Dict[str, int]
    probs: np.ndarray
    pair: np.ndarray
    unseen_row: np.ndarray


@dataclass(frozen=True)
class DistanceModel:
    """Per-feature value distributions defining the value difference metric."""
    senses: Tuple[str, ...]
    tables: Tuple[Dict[str, ValueDistribution], ...]

    @property
    def n_senses(self) -> int:
        return len(self.senses)

    @property
    def arity(self) -> int:
        return len(self.tables)

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[str]], labels: Sequence[str], senses: Sequence[str]
    ) -> "DistanceModel":
        """Count, per feature position and value, how often each sense occurs."""
        arity = len(rows[0])
        counts: List[Dict[str, Dict[str, int]]] = [{} for _ in range(arity)]
        for row, label in zip(rows, labels):
            for position, value in enumerate(row):
                per_sense = counts[position].setdefault(value, {})
                per_sense[label] = per_sense.get(label, 0) + 1
        tables = tuple(
            {value: ValueDistribution(per_sense) for value, per_sense in table.items()}
            for table in counts
        )
        return cls(tuple(senses), tables)

    def probability_vector(self, feature: int, value: str) -> np.ndarray:
        """Sense distribution of a value; unseen values get the uniform distribution."""
        distribution = self.tables[feature].get(value)
        if distribution is None:
            return np.full(self.n_senses, 1.0 / self.n_senses)
        return distribution.probabilities(self.senses)

    @cached_property
    def compiled(self) -> Tuple[_CompiledFeature, ...]:
        """Value indices and pairwise distance matrices for every feature."""
        uniform = np.full(self.n_senses, 1.0 / self.n_senses)
        features = []
        for table in self.tables:
            values = sorted(table)
            vocab = {value: index for index, value in enumerate(values)}
            probs = np.vstack([table[value].probabilities(self.senses) for value in values])
            pair = np.abs(probs[:, None, :] - probs[None, :, :]).sum(axis=2)
            unseen_row = np.abs(probs - uniform).sum(axis=1)
            features.append(_CompiledFeature(vocab, probs, pair, unseen_row))
        return tuple(features)


@dataclass(frozen=True)
class Exemplar:
    """A stored training example."""
    id: str
    values: Tuple[str, ...]
    sense: str


@dataclass(frozen=True)
class Classification:
    """Outcome of classifying one test example."""
    sense: str
    exemplar_id: str
    distance: float
    tie_count: int = 1


class ExemplarMemory:
    """All training exemplars plus the metric used to compare them."""

    def __init__(self, distances: DistanceModel, exemplars: Sequence[Exemplar]):
        if not exemplars:
            raise EmptyTraining("An exemplar memory needs at least one exemplar")
        for exemplar in exemplars:
            if len(exemplar.values) != distances.arity:
                raise ArityMismatch(
                    f"Exemplar {exemplar.id} has {len(exemplar.values)} features, expected {distances.arity}"
                )
        self.distances = distances
        self.exemplars = tuple(exemplars)
        self.logger = logging.getLogger(__name__)

        compiled = distances.compiled
        codes = np.empty((distances.arity, len(self.exemplars)), dtype=np.intp)
        try:
            for column, exemplar in enumerate(self.exemplars):
                for feature, value in enumerate(exemplar.values):
                    codes[feature, column] = compiled[feature].vocab[value]
        except KeyError as e:
            raise ClassifierError(f"Exemplar value {e} has no distribution entry") from e
        self._codes = codes

    @classmethod
    def learn(
        cls,
        rows: Sequence[Sequence[str]],
        labels: Sequence[Optional[str]],
        senses: Sequence[str],
        ids: Optional[Sequence[str]] = None,
    ) -> "ExemplarMemory":
        """
        Store labelled rows and tabulate their value distributions.

        Raises:
            EmptyTraining: If there are no rows
            ArityMismatch: If rows differ in length
            ClassifierError: If a row is unlabelled or its sense is unknown
        """
        if not rows:
            raise EmptyTraining("No training examples")
        if len(labels) != len(rows):
            raise ClassifierError(f"{len(rows)} rows but {len(labels)} labels")
        arity = len(rows[0])
        known = set(senses)
        for index, (row, label) in enumerate(zip(rows, labels)):
            if len(row) != arity:
                raise ArityMismatch(f"Example {index} has {len(row)} features, expected {arity}")
            if label is None:
                raise ClassifierError(f"Example {index} has no sense label")
            if label not in known:
                raise ClassifierError(f"Example {index} has unknown sense {label!r}")

        if ids is None:
            ids = [str(index) for index in range(len(rows))]
        distances = DistanceModel.from_rows(rows, labels, senses)
        exemplars = [
            Exemplar(str(exemplar_id), tuple(row), label)
            for exemplar_id, row, label in zip(ids, rows, labels)
        ]
        return cls(distances, exemplars)

    @property
    def arity(self) -> int:
        return self.distances.arity

    def distances_to(self, values: Sequence[str]) -> np.ndarray:
        """Distance from a test row to every stored exemplar."""
        if len(values) != self.arity:
            raise ArityMismatch(f"Test example has {len(values)} features, expected {self.arity}")
        total = np.zeros(len(self.exemplars))
        for feature, (value, compiled) in enumerate(zip(values, self.distances.compiled)):
            index = compiled.vocab.get(value)
            row = compiled.unseen_row if index is None else compiled.pair[index]
            total += row[self._codes[feature]]
        return total

    def nearest(self, values: Sequence[str], rng: np.random.Generator) -> Classification:
        """Return the closest exemplar, drawing once from `rng` to break ties."""
        distances = self.distances_to(values)
        best = distances.min()
        ties = np.flatnonzero(distances <= best + TIE_TOLERANCE)
        if len(ties) > 1:
            chosen = int(ties[rng.integers(len(ties))])
            self.logger.debug(f"Tie among {len(ties)} exemplars at distance {best:.4f}")
        else:
            chosen = int(ties[0])
        exemplar = self.exemplars[chosen]
        return Classification(exemplar.sense, exemplar.id, float(distances[chosen]), len(ties))


@dataclass(frozen=True)
class TrainedModel:
    """A per-word classifier: feature schema plus exemplar memory."""
    schema: FeatureSchema
    memory: ExemplarMemory

    @property
    def word(self) -> str:
        return self.schema.word

    @property
    def pos(self) -> str:
        return self.schema.pos

    @property
    def senses(self) -> Tuple[str, ...]:
        return self.schema.senses

    @property
    def distances(self) -> DistanceModel:
        return self.memory.distances

    @property
    def exemplars(self) -> Tuple[Exemplar, ...]:
        return self.memory.exemplars

    def vector_values(self, example: Union[ExampleVector, Sequence[str]]) -> Tuple[str, ...]:
        """Flatten an example vector over this model's active sources."""
        if isinstance(example, ExampleVector):
            if len(example.keyword_bits) != len(self.schema.keywords):
                raise ArityMismatch(
                    f"Example has {len(example.keyword_bits)} keyword bits, "
                    f"schema has {len(self.schema.keywords)} keywords"
                )
            return example.values(self.schema.sources)
        return tuple(example)

    def classify_many(
        self, instances: Iterable[Instance], seed: int = 0, trial: Optional[int] = None
    ) -> List[Classification]:
        """
        Encode and classify instances, each with its own derived generator.

        Results come back in input order and do not depend on it.
        """
        extractor = FeatureExtractor(self.schema.params)
        results = []
        started = time.perf_counter()
        for instance in instances:
            vector = extractor.encode(instance, self.schema)
            rng = instance_rng(seed, instance.id, trial)
            results.append(self.memory.nearest(self.vector_values(vector), rng))
        elapsed = time.perf_counter() - started
        if results and elapsed > 0:
            logger.debug(f"Classified {len(results)} examples at {len(results) / elapsed:.0f}/s")
        return results


def instance_rng(seed: int, instance_id: str, trial: Optional[int] = None) -> np.random.Generator:
    """Random source for one instance, derived from the run seed and its id."""
    entropy = [seed % 2 ** 64]
    if trial is not None:
        entropy.append(trial)
    entropy.append(zlib.crc32(instance_id.encode("utf-8")))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def train(examples: Sequence[ExampleVector], schema: FeatureSchema) -> TrainedModel:
    """
    Build a classifier from labelled example vectors.

    Raises:
        EmptyTraining: If `examples` is empty
        ArityMismatch: If a vector does not match the schema
    """
    if not examples:
        raise EmptyTraining("No training examples")
    rows = []
    for example in examples:
        if len(example.keyword_bits) != len(schema.keywords):
            raise ArityMismatch(
                f"Example {example.instance_id} has {len(example.keyword_bits)} keyword bits, "
                f"schema has {len(schema.keywords)} keywords"
            )
        rows.append(example.values(schema.sources))
    ids = [
        example.instance_id if example.instance_id is not None else str(index)
        for index, example in enumerate(examples)
    ]
    memory = ExemplarMemory.learn(rows, [example.sense for example in examples], schema.senses, ids)
    logger.info(f"Trained {schema.word}/{schema.pos} on {len(rows)} exemplars of {memory.arity} features")
    return TrainedModel(schema, memory)


def fit_instances(
    instances: Sequence[Instance],
    word: str,
    pos: str,
    senses: Sequence[str],
    params: Optional[SchemaParams] = None,
    sources: Iterable[KnowledgeSource] = ALL_SOURCES,
) -> TrainedModel:
    """Induce a schema from instances, encode them and train on the result."""
    extractor = FeatureExtractor(params)
    schema = extractor.induce_schema(instances, word, pos, senses, sources)
    return train([extractor.encode(instance, schema) for instance in instances], schema)


def value_distance(model: DistanceModel, feature: int, v1: str, v2: str) -> float:
    """L1 distance between the sense distributions of two values of a feature."""
    if v1 == v2:
        return 0.0
    p1 = model.probability_vector(feature, v1)
    p2 = model.probability_vector(feature, v2)
    return float(np.abs(p1 - p2).sum())


def example_distance(
    model: Union[TrainedModel, DistanceModel],
    e1: Union[ExampleVector, Sequence[str]],
    e2: Union[ExampleVector, Sequence[str]],
) -> float:
    """Sum of value distances over all feature positions."""
    if isinstance(model, TrainedModel):
        distances = model.distances
        v1, v2 = model.vector_values(e1), model.vector_values(e2)
    else:
        distances = model
        v1 = e1.values(ALL_SOURCES) if isinstance(e1, ExampleVector) else tuple(e1)
        v2 = e2.values(ALL_SOURCES) if isinstance(e2, ExampleVector) else tuple(e2)
    if len(v1) != distances.arity or len(v2) != distances.arity:
        raise ArityMismatch(
            f"Examples have {len(v1)} and {len(v2)} features, model has {distances.arity}"
        )
    return sum(value_distance(distances, feature, a, b) for feature, (a, b) in enumerate(zip(v1, v2)))


def classify(
    model: Union[TrainedModel, ExemplarMemory],
    test: Union[ExampleVector, Sequence[str]],
    rng: np.random.Generator,
) -> Classification:
    """
    Assign the sense of the nearest stored exemplar.

    Every exemplar is scanned; when several share the minimum distance one
    of them is picked uniformly with a single draw from `rng`.

    Raises:
        ArityMismatch: If the test example does not match the model
    """
    if isinstance(model, TrainedModel):
        return model.memory.nearest(model.vector_values(test), rng)
    return model.nearest(tuple(test), rng)
