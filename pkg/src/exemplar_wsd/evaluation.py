"""Random-trial evaluation, baselines and knowledge-source ablation."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .corpus_reader import Dataset, Instance
from .exemplar_classifier import fit_instances
from .feature_extractor import (
    ALL_SOURCES,
    EmptyTraining,
    KnowledgeSource,
    SchemaMismatch,
    SchemaParams,
)


class EvaluationError(Exception):
    """Exception raised when an evaluation cannot be carried out."""
    pass


class ConfigError(EvaluationError):
    """Exception raised for a trial configuration that does not fit the data."""
    pass


class LengthMismatch(EvaluationError):
    """Exception raised when predictions and gold labels differ in length."""
    pass


class EmptyInput(EvaluationError):
    """Exception raised when there is nothing to score."""
    pass


@dataclass(frozen=True)
class TrialConfig:
    """Configuration for repeated random train/test trials."""
    n_trials: int = 100
    test_size: int = 600
    seed: int = 0
    feature_subset: FrozenSet[KnowledgeSource] = ALL_SOURCES
    params: SchemaParams = field(default_factory=SchemaParams)

    def validate(self, dataset_size: int) -> None:
        """
        Check the configuration against a dataset of the given size.

        Raises:
            ConfigError: If trials, test size or feature subset are unusable
        """
        if isinstance(self.n_trials, bool) or not isinstance(self.n_trials, int) or self.n_trials < 1:
            raise ConfigError(f"Number of trials must be a positive integer, got {self.n_trials!r}")
        if isinstance(self.test_size, bool) or not isinstance(self.test_size, int) or self.test_size < 1:
            raise ConfigError(f"Test size must be a positive integer, got {self.test_size!r}")
        if self.test_size >= dataset_size:
            raise ConfigError(
                f"Test size {self.test_size} must be smaller than the dataset ({dataset_size} instances)"
            )
        if not self.feature_subset:
            raise ConfigError("At least one knowledge source must be enabled")
        if not all(isinstance(source, KnowledgeSource) for source in self.feature_subset):
            raise ConfigError(f"Unknown knowledge sources in {self.feature_subset!r}")


@dataclass(frozen=True)
class TrialReport:
    """Accuracies of a series of random trials."""
    accuracies: Tuple[float, ...]
    mean: float
    stddev: float
    baseline_sense1: float
    baseline_most_frequent: float
    feature_subset: FrozenSet[KnowledgeSource] = ALL_SOURCES

    def to_tsv(self) -> str:
        """Render one line per trial followed by the summary lines."""
        lines = [f"{trial}\t{value:.4f}" for trial, value in enumerate(self.accuracies, 1)]
        lines.append(f"mean\t{self.mean:.4f}")
        lines.append(f"stddev\t{self.stddev:.4f}")
        lines.append(f"baseline_sense1\t{self.baseline_sense1:.4f}")
        lines.append(f"baseline_most_frequent\t{self.baseline_most_frequent:.4f}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HeldOutRow:
    """Fixed-split result for one word."""
    word: str
    pos: str
    test_size: int
    correct: int
    accuracy: float
    baseline_sense1: float
    baseline_most_frequent: float


@dataclass(frozen=True)
class HeldOutReport:
    """Fixed-split results for many words, micro-averaged over test instances."""
    rows: Tuple[HeldOutRow, ...]
    accuracy: float
    baseline_sense1: float
    baseline_most_frequent: float

    def to_tsv(self) -> str:
        lines = ["word\tpos\ttest_size\taccuracy\tbaseline_sense1\tbaseline_most_frequent"]
        for row in self.rows:
            lines.append(
                f"{row.word}\t{row.pos}\t{row.test_size}\t{row.accuracy:.4f}\t"
                f"{row.baseline_sense1:.4f}\t{row.baseline_most_frequent:.4f}"
            )
        total = sum(row.test_size for row in self.rows)
        lines.append(
            f"total\t-\t{total}\t{self.accuracy:.4f}\t"
            f"{self.baseline_sense1:.4f}\t{self.baseline_most_frequent:.4f}"
        )
        return "\n".join(lines) + "\n"


def accuracy(predictions: Sequence[str], gold: Sequence[str]) -> float:
    """
    Fraction of predictions that equal the gold sense.

    Raises:
        LengthMismatch: If the sequences differ in length
        EmptyInput: If there is nothing to score
    """
    if len(predictions) != len(gold):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(gold)} gold labels")
    if not gold:
        raise EmptyInput("No predictions to score")
    correct = sum(1 for predicted, expected in zip(predictions, gold) if predicted == expected)
    return correct / len(gold)


def baseline_sense1(test: Sequence[Instance], sense_order: Sequence[str]) -> float:
    """Accuracy of always predicting the first sense of the inventory."""
    if not test:
        raise EmptyInput("No test instances for the Sense-1 baseline")
    if not sense_order:
        raise EmptyInput("Sense inventory is empty")
    first = sense_order[0]
    return accuracy([first] * len(test), [instance.sense for instance in test])


def most_frequent_sense(train: Sequence[Instance], sense_order: Optional[Sequence[str]] = None) -> str:
    """Modal training sense; ties go to the sense listed first."""
    if not train:
        raise EmptyTraining("No training instances for the Most-Frequent baseline")
    counts = Counter(instance.sense for instance in train)
    if sense_order is None:
        sense_order = list(dict.fromkeys(instance.sense for instance in train))
    rank = {sense: index for index, sense in enumerate(sense_order)}
    return min(counts, key=lambda sense: (-counts[sense], rank.get(sense, len(rank)), sense))


def baseline_most_frequent(
    train: Sequence[Instance],
    test: Sequence[Instance],
    sense_order: Optional[Sequence[str]] = None,
) -> float:
    """Accuracy of predicting the modal training sense for every test instance."""
    mode = most_frequent_sense(train, sense_order)
    if not test:
        raise EmptyInput("No test instances for the Most-Frequent baseline")
    return accuracy([mode] * len(test), [instance.sense for instance in test])


def mean_and_stddev(values: Sequence[float]) -> Tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation; one value has spread 0."""
    array = np.asarray(values, dtype=float)
    mean = float(array.mean())
    stddev = float(array.std(ddof=1)) if len(array) > 1 else 0.0
    return mean, stddev


class Evaluator:
    """Runs the random-trial protocol and its variants over datasets."""

    def __init__(self, config: Optional[TrialConfig] = None):
        self.config = config or TrialConfig()
        self.logger = logging.getLogger(__name__)

    def split(self, dataset: Dataset, trial: int) -> Tuple[List[Instance], List[Instance]]:
        """Draw the test set of one trial uniformly without replacement."""
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed % 2 ** 64, trial]))
        chosen = set(rng.choice(len(dataset), size=self.config.test_size, replace=False).tolist())
        train = [instance for index, instance in enumerate(dataset.instances) if index not in chosen]
        test = [instance for index, instance in enumerate(dataset.instances) if index in chosen]
        return train, test

    def run_trials(self, dataset: Dataset) -> TrialReport:
        """
        Train and test on repeated random splits of a dataset.

        The schema of every trial is induced from its training part only.

        Raises:
            ConfigError: If the configuration does not fit the dataset
        """
        config = self.config
        config.validate(len(dataset))
        self.logger.info(
            f"Running {config.n_trials} trials on {dataset.word}/{dataset.pos} "
            f"({len(dataset)} instances, test size {config.test_size}, "
            f"sources {KnowledgeSource.format_set(config.feature_subset)}, seed {config.seed})"
        )

        accuracies: List[float] = []
        sense1: List[float] = []
        most_frequent: List[float] = []
        for trial in range(config.n_trials):
            train, test = self.split(dataset, trial)
            model = fit_instances(
                train, dataset.word, dataset.pos, dataset.senses, config.params, config.feature_subset
            )
            results = model.classify_many(test, seed=config.seed, trial=trial)
            score = accuracy([result.sense for result in results], [instance.sense for instance in test])
            accuracies.append(score)
            sense1.append(baseline_sense1(test, dataset.senses))
            most_frequent.append(baseline_most_frequent(train, test, dataset.senses))
            self.logger.info(f"Trial {trial + 1}/{config.n_trials}: accuracy {score:.4f}")

        mean, stddev = mean_and_stddev(accuracies)
        report = TrialReport(
            accuracies=tuple(accuracies),
            mean=mean,
            stddev=stddev,
            baseline_sense1=mean_and_stddev(sense1)[0],
            baseline_most_frequent=mean_and_stddev(most_frequent)[0],
            feature_subset=frozenset(config.feature_subset),
        )
        self.logger.info(f"Mean accuracy {report.mean:.4f} (stddev {report.stddev:.4f})")
        return report

    def ablate(self, dataset: Dataset) -> Dict[KnowledgeSource, TrialReport]:
        """Run the trials once per knowledge source, each used on its own."""
        reports: Dict[KnowledgeSource, TrialReport] = {}
        for source in KnowledgeSource:
            single = TrialConfig(
                n_trials=self.config.n_trials,
                test_size=self.config.test_size,
                seed=self.config.seed,
                feature_subset=frozenset([source]),
                params=self.config.params,
            )
            reports[source] = Evaluator(single).run_trials(dataset)
        return reports

    def evaluate_held_out(self, pairs: Sequence[Tuple[Dataset, Dataset]]) -> HeldOutReport:
        """
        Evaluate fixed train/test splits of one or more words.

        Raises:
            EmptyInput: If no pairs or an empty test set is given
            SchemaMismatch: If a pair's train and test words differ
        """
        if not pairs:
            raise EmptyInput("No train/test pairs to evaluate")

        rows: List[HeldOutRow] = []
        for train, test in pairs:
            if (train.word, train.pos) != (test.word, test.pos):
                raise SchemaMismatch(
                    f"Train set is for {train.word}/{train.pos}, test set for {test.word}/{test.pos}"
                )
            if not test.instances:
                raise EmptyInput(f"Test set for {test.word} is empty")
            model = fit_instances(
                train.instances, train.word, train.pos, train.senses,
                self.config.params, self.config.feature_subset,
            )
            results = model.classify_many(test.instances, seed=self.config.seed)
            gold = [instance.sense for instance in test.instances]
            predicted = [result.sense for result in results]
            row = HeldOutRow(
                word=train.word,
                pos=train.pos,
                test_size=len(gold),
                correct=sum(1 for p, g in zip(predicted, gold) if p == g),
                accuracy=accuracy(predicted, gold),
                baseline_sense1=baseline_sense1(test.instances, train.senses),
                baseline_most_frequent=baseline_most_frequent(train.instances, test.instances, train.senses),
            )
            self.logger.info(
                f"{row.word}/{row.pos}: accuracy {row.accuracy:.4f}, sense-1 {row.baseline_sense1:.4f}, "
                f"most frequent {row.baseline_most_frequent:.4f}"
            )
            rows.append(row)

        total = sum(row.test_size for row in rows)
        return HeldOutReport(
            rows=tuple(rows),
            accuracy=sum(row.correct for row in rows) / total,
            baseline_sense1=sum(row.baseline_sense1 * row.test_size for row in rows) / total,
            baseline_most_frequent=sum(row.baseline_most_frequent * row.test_size for row in rows) / total,
        )


def run_trials(dataset: Dataset, config: Optional[TrialConfig] = None) -> TrialReport:
    return Evaluator(config).run_trials(dataset)


def ablate(dataset: Dataset, config: Optional[TrialConfig] = None) -> Dict[KnowledgeSource, TrialReport]:
    return Evaluator(config).ablate(dataset)


def evaluate_held_out(
    pairs: Sequence[Tuple[Dataset, Dataset]], config: Optional[TrialConfig] = None
) -> HeldOutReport:
    return Evaluator(config).evaluate_held_out(pairs)


def render_header(**fields) -> str:
    """A `# key=value ...` line recording how a result was produced."""
    return "# " + " ".join(f"{key}={value}" for key, value in fields.items()) + "\n"


def render_report(report: TrialReport) -> str:
    return report.to_tsv()


def render_ablation(reports: Dict[KnowledgeSource, TrialReport]) -> str:
    """One TSV block per knowledge source, each introduced by a header line."""
    blocks = []
    for source, report in reports.items():
        blocks.append(render_header(features=source.value) + report.to_tsv())
    return "".join(blocks)


def render_held_out(report: HeldOutReport) -> str:
    return report.to_tsv()
