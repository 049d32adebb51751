"""Reading, validating and writing sense-tagged instance files."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

from .morphology import MorphForm, coarse_pos, lemmatize_fallback


COARSE_POS = ("N", "V")
REQUIRED_HEADER_KEYS = ("id", "word", "pos", "target", "sense")
HEADER_KEY_ORDER = ("id", "word", "pos", "target", "sense", "morph")


class CorpusError(Exception):
    """Exception raised when a corpus cannot be read or is inconsistent."""
    pass


class ParseError(CorpusError):
    """Exception raised for malformed instance file content."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateIdError(CorpusError):
    """Exception raised when two instances share an id."""
    pass


class TargetMismatchError(CorpusError):
    """Exception raised when a record's word/POS disagrees with its target."""
    pass


# Line prefixes the reader treats as record structure inside a record
RESERVED_PREFIXES = ("%%", "%NG")


@dataclass(frozen=True)
class Token:
    """One POS-tagged token."""
    surface: str
    pos: str
    lemma: str

    def __post_init__(self):
        if not self.surface:
            raise CorpusError("Token surface must be non-empty")
        if self.surface.startswith(RESERVED_PREFIXES):
            raise CorpusError(f"Token surface {self.surface!r} starts with a reserved prefix")
        if not self.lemma or any(ch.isspace() for ch in self.lemma):
            raise CorpusError(f"Invalid lemma {self.lemma!r} for token {self.surface!r}")


@dataclass(frozen=True)
class Sentence:
    """Tokens of one sentence plus its noun-group bracketing."""
    tokens: Tuple[Token, ...]
    noun_groups: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        problem = span_problem(self.noun_groups, len(self.tokens))
        if problem:
            raise CorpusError(problem)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Instance:
    """A sentence with one sense-tagged occurrence of the target word."""
    id: str
    sentence: Sentence
    target_index: int
    target_lemma: str
    target_pos: str
    morph: MorphForm
    sense: str

    def __post_init__(self):
        if not 0 <= self.target_index < len(self.sentence.tokens):
            raise CorpusError(
                f"Instance {self.id}: target index {self.target_index} outside sentence "
                f"of {len(self.sentence.tokens)} tokens"
            )
        if self.target_pos not in COARSE_POS:
            raise CorpusError(f"Instance {self.id}: target POS must be N or V, got {self.target_pos!r}")
        if self.sentence.tokens[self.target_index].lemma != self.target_lemma:
            raise TargetMismatchError(
                f"Instance {self.id}: target token lemma "
                f"{self.sentence.tokens[self.target_index].lemma!r} != {self.target_lemma!r}"
            )
        if self.morph not in MorphForm.for_pos(self.target_pos):
            raise CorpusError(
                f"Instance {self.id}: form {self.morph.value!r} invalid for POS {self.target_pos}"
            )

    @property
    def target(self) -> Token:
        return self.sentence.tokens[self.target_index]


@dataclass(frozen=True)
class Dataset:
    """All sense-tagged instances of one word in one POS."""
    word: str
    pos: str
    senses: Tuple[str, ...]
    instances: Tuple[Instance, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(set(self.senses)) != len(self.senses):
            raise CorpusError(f"Duplicate sense labels in inventory: {list(self.senses)}")
        known = set(self.senses)
        seen_ids = set()
        for instance in self.instances:
            if instance.id in seen_ids:
                raise DuplicateIdError(f"Duplicate instance id: {instance.id}")
            seen_ids.add(instance.id)
            if instance.sense not in known:
                raise CorpusError(f"Instance {instance.id}: sense {instance.sense!r} not in inventory")
            if instance.target_lemma != self.word or instance.target_pos != self.pos:
                raise TargetMismatchError(
                    f"Instance {instance.id} targets {instance.target_lemma}/{instance.target_pos}, "
                    f"dataset is {self.word}/{self.pos}"
                )

    def __len__(self) -> int:
        return len(self.instances)

    def sense_counts(self) -> Dict[str, int]:
        """Count instances per sense, in inventory order."""
        counts = {sense: 0 for sense in self.senses}
        for instance in self.instances:
            counts[instance.sense] += 1
        return counts

    def subset(self, instances: Iterable[Instance]) -> "Dataset":
        """Return a dataset with the same inventory and the given instances."""
        return Dataset(self.word, self.pos, self.senses, tuple(instances))


def span_problem(spans: Sequence[Tuple[int, int]], n_tokens: int) -> Optional[str]:
    """Describe the first invalid or overlapping noun-group span, or None."""
    for start, end in spans:
        if not 0 <= start <= end < n_tokens:
            return f"Noun group ({start}, {end}) outside sentence of {n_tokens} tokens"
    ordered = sorted(spans)
    for (_, prev_end), (start, end) in zip(ordered, ordered[1:]):
        if start <= prev_end:
            return f"Noun group ({start}, {end}) overlaps a preceding group"
    return None


def natural_sense_order(labels: Iterable[str]) -> Tuple[str, ...]:
    """Order sense labels numerically where possible, then lexicographically."""
    def key(label: str):
        try:
            return (0, int(label), label)
        except ValueError:
            return (1, 0, label)
    return tuple(sorted(set(labels), key=key))


@dataclass
class _PendingRecord:
    header: Dict[str, str]
    line: int
    tokens: List[Token] = field(default_factory=list)
    noun_groups: List[Tuple[int, int]] = field(default_factory=list)
    noun_group_lines: List[int] = field(default_factory=list)


class CorpusReader:
    """Parser and writer for the line-oriented instance file format."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self._fallback_count = 0

    def parse(self, source: Union[str, TextIO]) -> Dataset:
        """
        Parse instance records into a Dataset.

        Args:
            source: File content or a readable text stream

        Returns:
            Dataset with instances in input order

        Raises:
            ParseError: If a record is malformed
            DuplicateIdError: If two records share an id
            TargetMismatchError: If a record's word/POS disagrees with its target
        """
        text = source if isinstance(source, str) else source.read()
        lines = text.split("\n")

        inventory: Optional[Tuple[str, ...]] = None
        inventory_line = 0
        instances: List[Instance] = []
        instance_lines: List[int] = []
        seen_ids: Dict[str, int] = {}
        pending: Optional[_PendingRecord] = None
        self._fallback_count = 0

        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\r")

            if pending is None:
                if not line.strip():
                    continue
                if line.startswith("%SENSES"):
                    if instances or inventory is not None:
                        raise ParseError("%SENSES must appear once, before the first record", lineno)
                    inventory = tuple(line.split()[1:])
                    inventory_line = lineno
                    if not inventory or len(set(inventory)) != len(inventory):
                        raise ParseError("%SENSES needs distinct sense labels", lineno)
                    continue
                if line.startswith("%%"):
                    pending = _PendingRecord(self._parse_header(line, lineno), lineno)
                    continue
                raise ParseError(f"Expected record header, got {line[:40]!r}", lineno)

            if not line.strip():
                instance = self._finish_record(pending, instances)
                self._check_unique(instance, pending.line, seen_ids)
                instances.append(instance)
                instance_lines.append(pending.line)
                pending = None
            elif line.startswith("%%"):
                raise ParseError("Record header before blank line ending the previous record", lineno)
            elif line.startswith("%NG"):
                pending.noun_groups.append(self._parse_noun_group(line, lineno))
                pending.noun_group_lines.append(lineno)
            else:
                if pending.noun_groups:
                    raise ParseError("Token line after noun-group lines", lineno)
                pending.tokens.append(self._parse_token(line, lineno))

        if pending is not None:
            instance = self._finish_record(pending, instances)
            self._check_unique(instance, pending.line, seen_ids)
            instances.append(instance)
            instance_lines.append(pending.line)

        if not instances:
            raise ParseError("No record header found", len(lines) if text else 1)

        if inventory is None:
            senses = natural_sense_order(instance.sense for instance in instances)
        else:
            senses = inventory
            for instance, lineno in zip(instances, instance_lines):
                if instance.sense not in senses:
                    raise ParseError(
                        f"Sense {instance.sense!r} not listed in %SENSES (line {inventory_line})", lineno
                    )

        dataset = Dataset(instances[0].target_lemma, instances[0].target_pos, senses, tuple(instances))

        if self._fallback_count:
            self.logger.warning(
                f"{self._fallback_count} tokens of '{dataset.word}' had no lemma column; "
                f"used the fallback lemmatizer"
            )
        for sense, count in dataset.sense_counts().items():
            if count == 0:
                self.logger.warning(f"Sense {sense} of '{dataset.word}' has no instances")
        self.logger.info(
            f"Parsed {len(dataset)} instances of {dataset.word}/{dataset.pos} "
            f"with {len(dataset.senses)} senses"
        )
        return dataset

    def read_file(self, file_path: Union[str, Path]) -> Dataset:
        """
        Read and parse an instance file.

        Raises:
            CorpusError: If the file is missing or unreadable
            ParseError: If the content is malformed
        """
        path = Path(file_path)
        try:
            if not path.exists():
                raise CorpusError(f"Corpus file not found: {path}")
            if not path.is_file():
                raise CorpusError(f"Corpus path is not a file: {path}")
            text = path.read_text(encoding="utf-8")
        except CorpusError:
            raise
        except UnicodeDecodeError as e:
            raise ParseError(f"Corpus file {path} is not valid UTF-8: {e}") from e
        except OSError as e:
            raise CorpusError(f"Cannot read corpus file {path}: {e}") from e

        self.logger.info(f"Reading corpus file: {path}")
        return self.parse(text)

    def serialize(self, dataset: Dataset) -> str:
        """Write a dataset back in the instance file format."""
        out: List[str] = ["%SENSES " + " ".join(dataset.senses), ""]
        for instance in dataset.instances:
            header = {
                "id": instance.id,
                "word": instance.target_lemma,
                "pos": instance.target_pos,
                "target": str(instance.target_index),
                "sense": instance.sense,
                "morph": instance.morph.value,
            }
            out.append("%% " + " ".join(f"{key}={header[key]}" for key in HEADER_KEY_ORDER))
            for token in instance.sentence.tokens:
                out.append(f"{token.surface}\t{token.pos}\t{token.lemma}")
            for start, end in instance.sentence.noun_groups:
                out.append(f"%NG {start} {end}")
            out.append("")
        return "\n".join(out)

    def _parse_header(self, line: str, lineno: int) -> Dict[str, str]:
        header: Dict[str, str] = {}
        for part in line[2:].split():
            key, sep, value = part.partition("=")
            if not sep or not key or not value:
                raise ParseError(f"Malformed header field {part!r}", lineno)
            if key in header:
                raise ParseError(f"Repeated header field {key!r}", lineno)
            header[key] = value

        missing = [key for key in REQUIRED_HEADER_KEYS if key not in header]
        if missing:
            raise ParseError(f"Header missing field(s): {', '.join(missing)}", lineno)
        if header["pos"] not in COARSE_POS:
            raise ParseError(f"Header pos must be N or V, got {header['pos']!r}", lineno)
        try:
            target = int(header["target"])
        except ValueError:
            raise ParseError(f"Header target is not an integer: {header['target']!r}", lineno)
        if target < 0:
            raise ParseError(f"Header target must be non-negative: {target}", lineno)
        header["word"] = header["word"].lower()
        return header

    def _parse_token(self, line: str, lineno: int) -> Token:
        columns = line.split("\t")
        if len(columns) not in (2, 3):
            raise ParseError(f"Token line needs 2 or 3 tab-separated columns, got {len(columns)}", lineno)
        surface, pos = columns[0], columns[1]
        if not surface or not pos:
            raise ParseError("Token line has an empty surface or POS column", lineno)

        lemma = columns[2].strip().lower() if len(columns) == 3 else ""
        if not lemma:
            lemma, _ = lemmatize_fallback(surface, pos)
            self._fallback_count += 1
        if any(ch.isspace() for ch in lemma):
            raise ParseError(f"Lemma contains whitespace: {lemma!r}", lineno)
        return Token(surface, pos, lemma)

    def _parse_noun_group(self, line: str, lineno: int) -> Tuple[int, int]:
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("Noun-group line must be '%NG <start> <end>'", lineno)
        try:
            return int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"Noun-group bounds are not integers: {line!r}", lineno)

    def _finish_record(self, pending: _PendingRecord, previous: List[Instance]) -> Instance:
        header = pending.header
        lineno = pending.line
        tokens = pending.tokens
        if not tokens:
            raise ParseError(f"Record {header['id']} has no tokens", lineno)

        target_index = int(header["target"])
        if target_index >= len(tokens):
            raise ParseError(
                f"Target index {target_index} outside sentence of {len(tokens)} tokens", lineno
            )

        word, pos = header["word"], header["pos"]
        target = tokens[target_index]
        if target.lemma != word:
            raise TargetMismatchError(
                f"line {lineno}: header word {word!r} disagrees with target token "
                f"{target.surface!r} (lemma {target.lemma!r})"
            )
        if previous and (previous[0].target_lemma, previous[0].target_pos) != (word, pos):
            raise TargetMismatchError(
                f"line {lineno}: record targets {word}/{pos}, dataset is "
                f"{previous[0].target_lemma}/{previous[0].target_pos}"
            )

        spans = tuple(pending.noun_groups)
        for span, span_line in zip(spans, pending.noun_group_lines):
            problem = span_problem([span], len(tokens))
            if problem:
                raise ParseError(problem, span_line)
        problem = span_problem(spans, len(tokens))
        if problem:
            raise ParseError(problem, pending.noun_group_lines[-1])

        morph = self._resolve_morph(header, target, lineno)
        return Instance(
            id=header["id"],
            sentence=Sentence(tuple(tokens), spans),
            target_index=target_index,
            target_lemma=word,
            target_pos=pos,
            morph=morph,
            sense=header["sense"],
        )

    def _resolve_morph(self, header: Dict[str, str], target: Token, lineno: int) -> MorphForm:
        pos = header["pos"]
        if "morph" in header:
            try:
                morph = MorphForm(header["morph"])
            except ValueError:
                raise ParseError(f"Unknown morphological form {header['morph']!r}", lineno)
        else:
            tag = target.pos if coarse_pos(target.pos) == pos else pos
            _, morph = lemmatize_fallback(target.surface, tag)
            if morph is None:
                raise ParseError("Cannot derive morphological form for target", lineno)
        if morph not in MorphForm.for_pos(pos):
            raise ParseError(f"Form {morph.value!r} is not valid for POS {pos}", lineno)
        return morph

    def _check_unique(self, instance: Instance, lineno: int, seen_ids: Dict[str, int]) -> None:
        if instance.id in seen_ids:
            raise DuplicateIdError(
                f"line {lineno}: instance id {instance.id!r} already used at line {seen_ids[instance.id]}"
            )
        seen_ids[instance.id] = lineno


def parse_dataset(source: Union[str, TextIO]) -> Dataset:
    """Parse instance-file text or a text stream into a Dataset."""
    return CorpusReader().parse(source)


def serialize_dataset(dataset: Dataset) -> str:
    """Render a Dataset in the instance file format."""
    return CorpusReader().serialize(dataset)


def load_dataset(file_path: Union[str, Path]) -> Dataset:
    """Read and parse an instance file from disk."""
    return CorpusReader().read_file(file_path)


def restrict_senses(dataset: Dataset, labels: Sequence[str]) -> Dataset:
    """
    Keep only the instances tagged with the given senses.

    The returned inventory is `labels` in the given order, so the first
    label becomes sense 1 for baselines.

    Raises:
        CorpusError: If a label is unknown, repeated, or none are given
    """
    labels = tuple(labels)
    if not labels:
        raise CorpusError("At least one sense label is required")
    if len(set(labels)) != len(labels):
        raise CorpusError(f"Repeated sense labels: {list(labels)}")
    unknown = [label for label in labels if label not in dataset.senses]
    if unknown:
        raise CorpusError(f"Unknown sense label(s) for '{dataset.word}': {', '.join(unknown)}")

    keep = set(labels)
    instances = tuple(instance for instance in dataset.instances if instance.sense in keep)
    return Dataset(dataset.word, dataset.pos, labels, instances)
