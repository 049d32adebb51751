"""Pytest configuration and shared fixtures."""

import pytest
import tempfile
import shutil
from pathlib import Path

from exemplar_wsd.corpus_reader import serialize_dataset
from exemplar_wsd.exemplar_classifier import fit_instances

from .corpus_factory import SAMPLE_RECORD, keyword_dataset


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture
def sample_record():
    """The four-token 'interest' record with two noun groups."""
    return SAMPLE_RECORD


@pytest.fixture
def sample_corpus_file(temp_dir, sample_record):
    """Write the sample record to a corpus file."""
    path = temp_dir / "sample.txt"
    path.write_text(sample_record, encoding="utf-8")
    return path


@pytest.fixture
def keyword_corpus():
    """400 instances, four senses, one deciding keyword per sense."""
    return keyword_dataset(per_sense=100)


@pytest.fixture
def small_keyword_corpus():
    """40 instances of the keyword corpus."""
    return keyword_dataset(per_sense=10)


@pytest.fixture
def keyword_corpus_file(temp_dir, small_keyword_corpus):
    """Write the 40-instance keyword corpus to a corpus file."""
    path = temp_dir / "interest.txt"
    path.write_text(serialize_dataset(small_keyword_corpus), encoding="utf-8")
    return path


@pytest.fixture
def keyword_model(small_keyword_corpus):
    """A model trained on the whole 40-instance keyword corpus."""
    dataset = small_keyword_corpus
    return fit_instances(dataset.instances, dataset.word, dataset.pos, dataset.senses)
