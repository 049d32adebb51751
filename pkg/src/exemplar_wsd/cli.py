"""Command-line interface for the word sense disambiguation engine."""

import sys
import logging

import click

from .corpus_reader import CorpusError, Dataset, load_dataset
from .exemplar_classifier import ClassifierError, TrainedModel, fit_instances
from .feature_extractor import (
    FeatureError,
    InvalidParams,
    KnowledgeSource,
    SchemaParams,
)
from .evaluation import (
    ConfigError,
    EvaluationError,
    Evaluator,
    TrialConfig,
    render_ablation,
    render_header,
    render_report,
)
from .model_store import ModelStore, ModelStoreError
from .schema_report import SchemaReporter


USAGE_ERRORS = (InvalidParams, ConfigError)
DATA_ERRORS = (CorpusError, ModelStoreError, FeatureError, ClassifierError, EvaluationError)

ALL_FEATURES = KnowledgeSource.format_set(KnowledgeSource)


class UsageFailure(click.ClickException):
    """Bad invocation or configuration (exit status 1)."""
    exit_code = 1


class DataFailure(click.ClickException):
    """Unreadable, inconsistent or mismatched data (exit status 2)."""
    exit_code = 2


class ExitCodeGroup(click.Group):
    """Command group that reports click's own usage errors with exit status 1."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(UsageFailure.exit_code)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def setup_logging(verbose: bool = False) -> None:
    """Set up logging configuration; diagnostics go to standard error."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
        force=True,
    )


def build_params(m1: float, m2: int, m3: int) -> SchemaParams:
    try:
        return SchemaParams(m1=m1, m2=m2, m3=m3)
    except InvalidParams as e:
        raise UsageFailure(str(e))


def parse_features(features: str) -> frozenset:
    try:
        return KnowledgeSource.parse_list(features)
    except InvalidParams as e:
        raise UsageFailure(str(e))


def read_corpus(corpus_path: str) -> Dataset:
    """Load a corpus file, reporting any problem as a data failure."""
    try:
        return load_dataset(corpus_path)
    except CorpusError as e:
        raise DataFailure(f"Cannot use corpus {corpus_path}: {e}")


def read_model(model_path: str) -> TrainedModel:
    try:
        return ModelStore().load(model_path)
    except ModelStoreError as e:
        raise DataFailure(f"Cannot use model {model_path}: {e}")


def selection_options(command):
    """Attach the --m1/--m2/--m3 selection thresholds to a command."""
    defaults = SchemaParams()
    command = click.option('--m3', type=int, default=defaults.m3, show_default=True,
                           help='Maximum selections per sense')(command)
    command = click.option('--m2', type=int, default=defaults.m2, show_default=True,
                           help='Minimum co-occurrences with the predicted sense')(command)
    command = click.option('--m1', type=float, default=defaults.m1, show_default=True,
                           help='Minimum conditional probability of the predicted sense')(command)
    return command


@click.group(cls=ExitCodeGroup)
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.pass_context
def cli(ctx, verbose):
    """Exemplar WSD - nearest-neighbour word sense disambiguation."""
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    setup_logging(verbose)


@cli.command()
@click.option('--corpus', required=True, help='Sense-tagged instance file of one word')
@click.option('--out', required=True, help='Path of the model file to write')
@selection_options
@click.option('--features', default=ALL_FEATURES, show_default=True,
              help='Comma list of knowledge sources (pos,words,colloc,verb)')
def train(corpus, out, m1, m2, m3, features):
    """Train a classifier for one word and save it."""
    params = build_params(m1, m2, m3)
    sources = parse_features(features)
    dataset = read_corpus(corpus)

    try:
        model = fit_instances(dataset.instances, dataset.word, dataset.pos, dataset.senses, params, sources)
        path = ModelStore().save(model, out)
    except USAGE_ERRORS as e:
        raise UsageFailure(str(e))
    except DATA_ERRORS as e:
        raise DataFailure(str(e))

    click.echo(render_header(word=dataset.word, pos=dataset.pos,
                             features=KnowledgeSource.format_set(sources)), nl=False)
    click.echo(f"model\t{path}")
    click.echo(f"exemplars\t{len(model.exemplars)}")
    click.echo(f"features\t{model.schema.arity}")


@cli.command()
@click.option('--model', required=True, help='Model file written by train')
@click.option('--corpus', required=True, help='Instance file to disambiguate')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for tie breaking')
def classify(model, corpus, seed):
    """Assign a sense to every instance of a corpus."""
    trained = read_model(model)
    dataset = read_corpus(corpus)
    if (dataset.word, dataset.pos) != (trained.word, trained.pos):
        raise DataFailure(
            f"Corpus is for {dataset.word}/{dataset.pos} but the model was trained "
            f"for {trained.word}/{trained.pos}"
        )

    try:
        results = trained.classify_many(dataset.instances, seed=seed)
    except DATA_ERRORS as e:
        raise DataFailure(str(e))

    click.echo(render_header(seed=seed, word=trained.word, pos=trained.pos), nl=False)
    for instance, result in zip(dataset.instances, results):
        click.echo(f"{instance.id}\t{result.sense}\t{result.distance:.4f}")


@cli.command(name='eval')
@click.option('--corpus', required=True, help='Sense-tagged instance file of one word')
@click.option('--trials', type=int, default=100, show_default=True, help='Number of random trials')
@click.option('--test-size', type=int, default=600, show_default=True, help='Test instances per trial')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for splits and tie breaking')
@click.option('--features', default=ALL_FEATURES, show_default=True,
              help='Comma list of knowledge sources (pos,words,colloc,verb)')
@selection_options
def evaluate(corpus, trials, test_size, seed, features, m1, m2, m3):
    """Estimate accuracy over repeated random train/test splits."""
    config = TrialConfig(
        n_trials=trials,
        test_size=test_size,
        seed=seed,
        feature_subset=parse_features(features),
        params=build_params(m1, m2, m3),
    )
    dataset = read_corpus(corpus)

    try:
        report = Evaluator(config).run_trials(dataset)
    except USAGE_ERRORS as e:
        raise UsageFailure(str(e))
    except DATA_ERRORS as e:
        raise DataFailure(str(e))

    click.echo(render_header(seed=seed, word=dataset.word, trials=trials, test_size=test_size,
                             features=KnowledgeSource.format_set(config.feature_subset)), nl=False)
    click.echo(render_report(report), nl=False)


@cli.command()
@click.option('--corpus', required=True, help='Sense-tagged instance file of one word')
@click.option('--trials', type=int, default=100, show_default=True, help='Number of random trials')
@click.option('--test-size', type=int, default=600, show_default=True, help='Test instances per trial')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed for splits and tie breaking')
@selection_options
def ablate(corpus, trials, test_size, seed, m1, m2, m3):
    """Evaluate each knowledge source on its own."""
    config = TrialConfig(n_trials=trials, test_size=test_size, seed=seed, params=build_params(m1, m2, m3))
    dataset = read_corpus(corpus)

    try:
        config.validate(len(dataset))
        reports = Evaluator(config).ablate(dataset)
    except USAGE_ERRORS as e:
        raise UsageFailure(str(e))
    except DATA_ERRORS as e:
        raise DataFailure(str(e))

    click.echo(render_header(seed=seed, word=dataset.word, trials=trials, test_size=test_size), nl=False)
    click.echo(render_ablation(reports), nl=False)


@cli.command()
@click.option('--model', required=True, help='Model file written by train')
def inspect(model):
    """Show the selected features and memory of a model."""
    trained = read_model(model)
    click.echo(SchemaReporter().render(trained), nl=False)


def main():
    cli()


if __name__ == '__main__':
    main()
