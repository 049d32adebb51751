"""Feature schema induction and example encoding for one target word."""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .corpus_reader import Instance, Sentence
from .morphology import coarse_pos


NIL = "NIL"
NULL_POS = "NULL-POS"
SENTENCE_START = "<s>"
SENTENCE_END = "</s>"

POS_OFFSETS = (-3, -2, -1, 1, 2, 3)
POS_FEATURE_NAMES = ("L3", "L2", "L1", "R1", "R2", "R3")

# (left, right) offsets of the nine collocation features C1..C9
COLLOCATION_OFFSETS: Tuple[Tuple[int, int], ...] = (
    (-1, -1),
    (1, 1),
    (-2, -1),
    (-1, 1),
    (1, 2),
    (-3, -1),
    (-2, 1),
    (-1, 2),
    (1, 3),
)


class FeatureError(Exception):
    """Exception raised when features cannot be induced or encoded."""
    pass


class EmptyTraining(FeatureError):
    """Exception raised when there is nothing to learn from."""
    pass


class SchemaMismatch(FeatureError):
    """Exception raised when an instance does not belong to a schema's word."""
    pass


class InvalidParams(FeatureError):
    """Exception raised for out-of-range selection parameters."""
    pass


class KnowledgeSource(Enum):
    """The four knowledge sources that contribute feature positions."""
    POS_MORPH = "pos"
    SURROUNDING_WORDS = "words"
    COLLOCATIONS = "colloc"
    VERB_OBJECT = "verb"

    @classmethod
    def parse_list(cls, text: str) -> FrozenSet["KnowledgeSource"]:
        """Parse a comma list such as 'pos,colloc'."""
        names = [part.strip() for part in text.split(",") if part.strip()]
        if not names:
            raise InvalidParams("At least one knowledge source is required")
        sources = set()
        for name in names:
            try:
                sources.add(cls(name))
            except ValueError:
                valid = ", ".join(source.value for source in cls)
                raise InvalidParams(f"Unknown knowledge source {name!r} (choose from {valid})")
        return frozenset(sources)

    @staticmethod
    def format_set(sources: Iterable["KnowledgeSource"]) -> str:
        """Render sources as a comma list in canonical order."""
        chosen = set(sources)
        return ",".join(source.value for source in KnowledgeSource if source in chosen)


ALL_SOURCES: FrozenSet[KnowledgeSource] = frozenset(KnowledgeSource)


@dataclass(frozen=True)
class SchemaParams:
    """Thresholds for selecting keywords, collocations and verbs."""
    m1: float = 0.8
    m2: int = 5
    m3: int = 5

    def __post_init__(self):
        if isinstance(self.m1, bool) or not isinstance(self.m1, (int, float)) or not 0.0 <= self.m1 <= 1.0:
            raise InvalidParams(f"m1 must be a probability in [0, 1], got {self.m1!r}")
        for name in ("m2", "m3"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidParams(f"{name} must be a positive integer, got {value!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {"m1": self.m1, "m2": self.m2, "m3": self.m3}


@dataclass(frozen=True)
class FeatureSchema:
    """The feature space induced for one word from its training instances."""
    word: str
    pos: str
    senses: Tuple[str, ...]
    keywords: Tuple[str, ...] = ()
    colloc_values: Tuple[FrozenSet[str], ...] = tuple(frozenset() for _ in COLLOCATION_OFFSETS)
    verbs: FrozenSet[str] = frozenset()
    params: SchemaParams = field(default_factory=SchemaParams)
    sources: FrozenSet[KnowledgeSource] = ALL_SOURCES

    def __post_init__(self):
        if len(set(self.keywords)) != len(self.keywords):
            raise FeatureError("Schema keywords must be distinct")
        if len(self.colloc_values) != len(COLLOCATION_OFFSETS):
            raise FeatureError(f"Schema needs {len(COLLOCATION_OFFSETS)} collocation value sets")
        if any(not value for values in self.colloc_values for value in values):
            raise FeatureError("Collocation values must be non-empty strings")
        if not self.sources:
            raise FeatureError("Schema needs at least one knowledge source")

    def feature_names(self) -> Tuple[str, ...]:
        """Names of the active feature positions, in vector order."""
        names: List[str] = []
        if KnowledgeSource.POS_MORPH in self.sources:
            names.extend(POS_FEATURE_NAMES)
            names.append("M")
        if KnowledgeSource.SURROUNDING_WORDS in self.sources:
            names.extend(f"K{i}" for i in range(1, len(self.keywords) + 1))
        if KnowledgeSource.COLLOCATIONS in self.sources:
            names.extend(f"C{i}" for i in range(1, len(COLLOCATION_OFFSETS) + 1))
        if KnowledgeSource.VERB_OBJECT in self.sources:
            names.append("V")
        return tuple(names)

    @property
    def arity(self) -> int:
        return len(self.feature_names())

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a JSON-ready dictionary with deterministic ordering."""
        return {
            "word": self.word,
            "pos": self.pos,
            "senses": list(self.senses),
            "keywords": list(self.keywords),
            "collocations": [
                {"left": left, "right": right, "values": sorted(values)}
                for (left, right), values in zip(COLLOCATION_OFFSETS, self.colloc_values)
            ],
            "verbs": sorted(self.verbs),
            "params": self.params.to_dict(),
            "sources": KnowledgeSource.format_set(self.sources).split(","),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureSchema":
        """Rebuild a schema from `to_dict` output."""
        collocations = data["collocations"]
        offsets = tuple((entry["left"], entry["right"]) for entry in collocations)
        if offsets != COLLOCATION_OFFSETS:
            raise FeatureError(f"Unexpected collocation offsets: {offsets}")
        return cls(
            word=data["word"],
            pos=data["pos"],
            senses=tuple(data["senses"]),
            keywords=tuple(data["keywords"]),
            colloc_values=tuple(frozenset(entry["values"]) for entry in collocations),
            verbs=frozenset(data["verbs"]),
            params=SchemaParams(**data["params"]),
            sources=KnowledgeSource.parse_list(",".join(data["sources"])),
        )


@dataclass(frozen=True)
class ExampleVector:
    """One instance encoded as symbolic feature values."""
    pos_window: Tuple[str, ...]
    morph: str
    keyword_bits: Tuple[int, ...]
    collocs: Tuple[str, ...]
    verb: str
    sense: Optional[str] = None
    instance_id: Optional[str] = None

    def values(self, sources: Iterable[KnowledgeSource] = ALL_SOURCES) -> Tuple[str, ...]:
        """Flatten the active knowledge sources into one tuple of symbols."""
        active = set(sources)
        flat: List[str] = []
        if KnowledgeSource.POS_MORPH in active:
            flat.extend(self.pos_window)
            flat.append(self.morph)
        if KnowledgeSource.SURROUNDING_WORDS in active:
            flat.extend(str(bit) for bit in self.keyword_bits)
        if KnowledgeSource.COLLOCATIONS in active:
            flat.extend(self.collocs)
        if KnowledgeSource.VERB_OBJECT in active:
            flat.append(self.verb)
        return tuple(flat)


def keyword_candidates(instance: Instance) -> FrozenSet[str]:
    """Lowercased surfaces of every token except the target occurrence."""
    return frozenset(
        token.surface.lower()
        for index, token in enumerate(instance.sentence.tokens)
        if index != instance.target_index
    )


def collocation_string(sentence: Sentence, target: int, left: int, right: int) -> str:
    """
    Join the lowercased words from `left` to `right` around the target.

    The target itself (offset 0) is left out; positions before the sentence
    read as <s> and positions past its end as </s>.
    """
    words = []
    for offset in range(left, right + 1):
        if offset == 0:
            continue
        index = target + offset
        if index < 0:
            words.append(SENTENCE_START)
        elif index >= len(sentence.tokens):
            words.append(SENTENCE_END)
        else:
            words.append(sentence.tokens[index].surface.lower())
    return " ".join(words)


def is_verb_tag(tag: str) -> bool:
    return coarse_pos(tag) == "V"


def extract_verb_object(instance: Instance) -> str:
    """
    Find the verb taking a noun target as its object.

    The target must close a noun group, and the token right before that
    group must carry a verb tag. Verb targets always yield NIL.
    """
    if instance.target_pos != "N":
        return NIL
    tokens = instance.sentence.tokens
    for start, end in instance.sentence.noun_groups:
        if end != instance.target_index:
            continue
        if start > 0 and is_verb_tag(tokens[start - 1].pos):
            return tokens[start - 1].lemma
        return NIL
    return NIL


def select_predictive(
    observations: Sequence[Tuple[FrozenSet[str], str]],
    senses: Sequence[str],
    params: SchemaParams,
) -> Tuple[str, ...]:
    """
    Select candidate values predictive of some sense.

    Each observation is the set of candidates present in one training
    instance plus that instance's sense, so a candidate counts at most once
    per instance. A candidate k qualifies for sense i when
    N(i,k) / N(k) >= m1 and N(i,k) >= m2; each sense keeps its m3 most
    frequent qualifiers (ties lexicographic).

    Returns:
        Selected values, sorted lexicographically
    """
    totals: Counter = Counter()
    by_sense: Dict[str, Counter] = defaultdict(Counter)
    for candidates, sense in observations:
        totals.update(candidates)
        by_sense[sense].update(candidates)

    selected = set()
    for sense in senses:
        qualifying = [
            (count, value)
            for value, count in by_sense[sense].items()
            if count >= params.m2 and count / totals[value] >= params.m1
        ]
        qualifying.sort(key=lambda item: (-item[0], item[1]))
        selected.update(value for _, value in qualifying[:params.m3])
    return tuple(sorted(selected))


class FeatureExtractor:
    """Induces feature schemas and encodes instances against them."""

    def __init__(self, params: Optional[SchemaParams] = None):
        self.params = params or SchemaParams()
        self.logger = logging.getLogger(__name__)

    def select_keywords(self, train: Sequence[Instance], senses: Sequence[str]) -> Tuple[str, ...]:
        """Select surrounding-word keywords from the training instances."""
        self._require_training(train)
        observations = [(keyword_candidates(instance), instance.sense) for instance in train]
        keywords = select_predictive(observations, senses, self.params)
        self.logger.debug(f"Selected {len(keywords)} keywords from {len(train)} instances")
        return keywords

    def select_collocations(
        self, train: Sequence[Instance], senses: Sequence[str]
    ) -> Tuple[FrozenSet[str], ...]:
        """Select collocation values independently for each of the nine offsets."""
        self._require_training(train)
        selected = []
        for left, right in COLLOCATION_OFFSETS:
            observations = [
                (frozenset([collocation_string(instance.sentence, instance.target_index, left, right)]),
                 instance.sense)
                for instance in train
            ]
            values = frozenset(select_predictive(observations, senses, self.params))
            self.logger.debug(f"Offset ({left}, {right}): {len(values)} collocations selected")
            selected.append(values)
        return tuple(selected)

    def select_verbs(self, train: Sequence[Instance], senses: Sequence[str]) -> FrozenSet[str]:
        """Select verbs whose object relation with the target predicts a sense."""
        self._require_training(train)
        observations = []
        for instance in train:
            verb = extract_verb_object(instance)
            observations.append((frozenset() if verb == NIL else frozenset([verb]), instance.sense))
        verbs = frozenset(select_predictive(observations, senses, self.params))
        self.logger.debug(f"Selected {len(verbs)} verbs")
        return verbs

    def induce_schema(
        self,
        train: Sequence[Instance],
        word: str,
        pos: str,
        senses: Sequence[str],
        sources: Iterable[KnowledgeSource] = ALL_SOURCES,
    ) -> FeatureSchema:
        """
        Build the feature schema for one word from training instances only.

        Args:
            train: Training instances of the word
            word: Target lemma
            pos: Coarse POS of the target
            senses: Sense inventory in order
            sources: Knowledge sources to activate

        Returns:
            FeatureSchema with selections for the active sources

        Raises:
            EmptyTraining: If `train` is empty
            SchemaMismatch: If an instance targets another word
        """
        self._require_training(train)
        sources = frozenset(sources)
        for instance in train:
            self._check_target(instance, word, pos)

        keywords: Tuple[str, ...] = ()
        collocs = tuple(frozenset() for _ in COLLOCATION_OFFSETS)
        verbs: FrozenSet[str] = frozenset()
        if KnowledgeSource.SURROUNDING_WORDS in sources:
            keywords = self.select_keywords(train, senses)
        if KnowledgeSource.COLLOCATIONS in sources:
            collocs = self.select_collocations(train, senses)
        if KnowledgeSource.VERB_OBJECT in sources:
            verbs = self.select_verbs(train, senses)

        schema = FeatureSchema(
            word=word,
            pos=pos,
            senses=tuple(senses),
            keywords=keywords,
            colloc_values=collocs,
            verbs=verbs,
            params=self.params,
            sources=sources,
        )
        self.logger.info(
            f"Schema for {word}/{pos}: {len(keywords)} keywords, "
            f"{sum(len(values) for values in collocs)} collocations, {len(verbs)} verbs "
            f"({KnowledgeSource.format_set(sources)})"
        )
        return schema

    def encode(self, instance: Instance, schema: FeatureSchema) -> ExampleVector:
        """
        Encode an instance as an example vector of the schema.

        Raises:
            SchemaMismatch: If the instance targets another word or POS
        """
        self._check_target(instance, schema.word, schema.pos)
        tokens = instance.sentence.tokens
        target = instance.target_index

        pos_window = []
        for offset in POS_OFFSETS:
            index = target + offset
            pos_window.append(tokens[index].pos if 0 <= index < len(tokens) else NULL_POS)

        present = keyword_candidates(instance)
        keyword_bits = tuple(1 if keyword in present else 0 for keyword in schema.keywords)

        collocs = []
        for (left, right), allowed in zip(COLLOCATION_OFFSETS, schema.colloc_values):
            value = collocation_string(instance.sentence, target, left, right)
            collocs.append(value if value in allowed else NIL)

        verb = extract_verb_object(instance)
        if verb not in schema.verbs:
            verb = NIL

        return ExampleVector(
            pos_window=tuple(pos_window),
            morph=instance.morph.value,
            keyword_bits=keyword_bits,
            collocs=tuple(collocs),
            verb=verb,
            sense=instance.sense,
            instance_id=instance.id,
        )

    def _require_training(self, train: Sequence[Instance]) -> None:
        if not train:
            raise EmptyTraining("No training instances to select features from")

    def _check_target(self, instance: Instance, word: str, pos: str) -> None:
        if instance.target_lemma != word or instance.target_pos != pos:
            raise SchemaMismatch(
                f"Instance {instance.id} targets {instance.target_lemma}/{instance.target_pos}, "
                f"schema is for {word}/{pos}"
            )


def select_keywords(
    train: Sequence[Instance], senses: Sequence[str], params: Optional[SchemaParams] = None
) -> Tuple[str, ...]:
    return FeatureExtractor(params).select_keywords(train, senses)


def select_collocations(
    train: Sequence[Instance], senses: Sequence[str], params: Optional[SchemaParams] = None
) -> Tuple[FrozenSet[str], ...]:
    return FeatureExtractor(params).select_collocations(train, senses)


def select_verbs(
    train: Sequence[Instance], senses: Sequence[str], params: Optional[SchemaParams] = None
) -> FrozenSet[str]:
    return FeatureExtractor(params).select_verbs(train, senses)


def encode(instance: Instance, schema: FeatureSchema) -> ExampleVector:
    return FeatureExtractor(schema.params).encode(instance, schema)
