"""End-to-end tests for the command-line interface."""

import pytest
from click.testing import CliRunner

from exemplar_wsd.cli import cli
from exemplar_wsd.corpus_reader import serialize_dataset


def result_lines(result):
    """Header and TSV lines of a run; log records carry neither."""
    return [line for line in result.output.splitlines() if "\t" in line or line.startswith("# ")]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def model_file(runner, keyword_corpus_file, temp_dir):
    """Train a model on the keyword corpus file through the CLI."""
    path = temp_dir / "interest.model.json"
    result = runner.invoke(cli, ["train", "--corpus", str(keyword_corpus_file), "--out", str(path)])
    assert result.exit_code == 0, result.output
    return path


@pytest.mark.e2e
class TestTrainCommand:
    """Test cases for the train command."""

    def test_writes_model(self, model_file):
        """Test that a model file is produced."""
        assert model_file.is_file()

    def test_summary(self, runner, keyword_corpus_file, temp_dir):
        """Test the header and summary lines."""
        out = temp_dir / "m.json"
        result = runner.invoke(cli, [
            "train", "--corpus", str(keyword_corpus_file), "--out", str(out), "--features", "words,pos",
        ])
        assert result.exit_code == 0, result.output
        lines = result_lines(result)
        assert lines[0] == "# word=interest pos=N features=pos,words"
        assert "exemplars\t40" in lines

    def test_missing_corpus(self, runner, temp_dir):
        """Test that an unreadable corpus is a data error naming the file."""
        result = runner.invoke(cli, [
            "train", "--corpus", str(temp_dir / "nope.txt"), "--out", str(temp_dir / "m.json"),
        ])
        assert result.exit_code == 2
        assert "nope.txt" in result.output

    def test_invalid_threshold(self, runner, keyword_corpus_file, temp_dir):
        """Test that m1 outside [0, 1] is a usage error."""
        result = runner.invoke(cli, [
            "train", "--corpus", str(keyword_corpus_file), "--out", str(temp_dir / "m.json"), "--m1", "1.5",
        ])
        assert result.exit_code == 1
        assert not (temp_dir / "m.json").exists()

    def test_missing_option(self, runner, keyword_corpus_file):
        """Test that a missing required option is a usage error."""
        result = runner.invoke(cli, ["train", "--corpus", str(keyword_corpus_file)])
        assert result.exit_code == 1

    def test_unknown_feature(self, runner, keyword_corpus_file, temp_dir):
        """Test that an unknown knowledge source is a usage error."""
        result = runner.invoke(cli, [
            "train", "--corpus", str(keyword_corpus_file), "--out", str(temp_dir / "m.json"),
            "--features", "bogus",
        ])
        assert result.exit_code == 1


@pytest.mark.e2e
class TestClassifyCommand:
    """Test cases for the classify command."""

    def test_training_instances_are_exact_matches(self, runner, model_file, keyword_corpus_file,
                                                  small_keyword_corpus):
        """Test that every training instance finds itself at distance zero."""
        result = runner.invoke(cli, ["classify", "--model", str(model_file), "--corpus", str(keyword_corpus_file)])
        assert result.exit_code == 0, result.output

        lines = result_lines(result)
        assert lines[0] == "# seed=0 word=interest pos=N"
        rows = [line.split("\t") for line in lines[1:]]
        assert [row[0] for row in rows] == [instance.id for instance in small_keyword_corpus.instances]
        assert [row[1] for row in rows] == [instance.sense for instance in small_keyword_corpus.instances]
        assert {row[2] for row in rows} == {"0.0000"}

    def test_repeatable(self, runner, model_file, keyword_corpus_file):
        """Test that two runs with the same seed print the same lines."""
        args = ["classify", "--model", str(model_file), "--corpus", str(keyword_corpus_file), "--seed", "3"]
        assert result_lines(runner.invoke(cli, args)) == result_lines(runner.invoke(cli, args))

    def test_other_word(self, runner, model_file, temp_dir):
        """Test that a corpus for another word is rejected."""
        corpus = temp_dir / "rate.txt"
        corpus.write_text(
            "%% id=r1 word=rate pos=N target=1 sense=1\nthe\tDT\tthe\nrate\tNN\trate\n", encoding="utf-8"
        )
        result = runner.invoke(cli, ["classify", "--model", str(model_file), "--corpus", str(corpus)])
        assert result.exit_code == 2
        assert "rate/N" in result.output

    def test_corrupt_model(self, runner, keyword_corpus_file, temp_dir):
        """Test that a damaged model file is a data error."""
        broken = temp_dir / "broken.json"
        broken.write_text('{"format": "exemplar-wsd-model", "format_', encoding="utf-8")
        result = runner.invoke(cli, ["classify", "--model", str(broken), "--corpus", str(keyword_corpus_file)])
        assert result.exit_code == 2


@pytest.mark.e2e
class TestEvalCommand:
    """Test cases for the eval command."""

    def test_trial_lines(self, runner, keyword_corpus_file):
        """Test one line per trial plus the summary lines."""
        result = runner.invoke(cli, [
            "eval", "--corpus", str(keyword_corpus_file), "--trials", "10", "--test-size", "5",
        ])
        assert result.exit_code == 0, result.output

        lines = result_lines(result)
        assert lines[0] == "# seed=0 word=interest trials=10 test_size=5 features=pos,words,colloc,verb"
        keys = [line.split("\t")[0] for line in lines[1:]]
        assert keys == [str(n) for n in range(1, 11)] + [
            "mean", "stddev", "baseline_sense1", "baseline_most_frequent"
        ]

    def test_keyword_corpus_is_learned_exactly(self, runner, keyword_corpus, temp_dir):
        """Test the 400-instance synthetic corpus end to end."""
        corpus = temp_dir / "interest-400.txt"
        corpus.write_text(serialize_dataset(keyword_corpus), encoding="utf-8")
        result = runner.invoke(cli, ["eval", "--corpus", str(corpus), "--trials", "10", "--test-size", "100"])
        assert result.exit_code == 0, result.output

        lines = result_lines(result)
        assert "mean\t1.0000" in lines
        assert "stddev\t0.0000" in lines

    def test_feature_subset_in_header(self, runner, keyword_corpus_file):
        """Test that the chosen sources are recorded."""
        result = runner.invoke(cli, [
            "eval", "--corpus", str(keyword_corpus_file), "--trials", "2", "--test-size", "5",
            "--features", "colloc",
        ])
        assert result.exit_code == 0, result.output
        assert result_lines(result)[0].endswith("features=colloc")

    def test_test_size_too_large(self, runner, keyword_corpus_file):
        """Test that a test set as large as the corpus is a usage error."""
        result = runner.invoke(cli, ["eval", "--corpus", str(keyword_corpus_file), "--trials", "2"])
        assert result.exit_code == 1

    def test_bad_features(self, runner, keyword_corpus_file):
        """Test that an unknown source name is a usage error."""
        result = runner.invoke(cli, [
            "eval", "--corpus", str(keyword_corpus_file), "--test-size", "5", "--features", "bogus",
        ])
        assert result.exit_code == 1


@pytest.mark.e2e
class TestAblateCommand:
    """Test cases for the ablate command."""

    def test_one_block_per_source(self, runner, keyword_corpus_file):
        """Test that four blocks are printed in a fixed order."""
        result = runner.invoke(cli, [
            "ablate", "--corpus", str(keyword_corpus_file), "--trials", "2", "--test-size", "5",
        ])
        assert result.exit_code == 0, result.output

        headers = [line for line in result_lines(result) if line.startswith("# features=")]
        assert headers == ["# features=pos", "# features=words", "# features=colloc", "# features=verb"]


@pytest.mark.e2e
class TestInspectCommand:
    """Test cases for the inspect command."""

    def test_schema_dump(self, runner, model_file):
        """Test that every selected keyword is listed once."""
        result = runner.invoke(cli, ["inspect", "--model", str(model_file)])
        assert result.exit_code == 0, result.output

        lines = result.output.splitlines()
        assert "word: interest" in lines
        assert "keywords: 4" in lines
        for keyword in ("attention", "hobby", "stake", "loan"):
            assert lines.count(f"  {keyword}") == 1
        assert "verbs: (none)" in lines
        assert any(line.startswith("  C1 [-1,-1]: ") for line in lines)

    def test_missing_model(self, runner, temp_dir):
        """Test that a missing model file is a data error."""
        result = runner.invoke(cli, ["inspect", "--model", str(temp_dir / "none.json")])
        assert result.exit_code == 2

    def test_corrupt_model(self, runner, model_file):
        """Test that a truncated model file is a data error."""
        data = model_file.read_bytes()
        model_file.write_bytes(data[: len(data) // 2])
        result = runner.invoke(cli, ["inspect", "--model", str(model_file)])
        assert result.exit_code == 2
        assert "keywords:" not in result.output
