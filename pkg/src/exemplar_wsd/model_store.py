"""Versioned JSON persistence for trained word classifiers."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from .exemplar_classifier import (
    ClassifierError,
    DistanceModel,
    Exemplar,
    ExemplarMemory,
    TrainedModel,
    ValueDistribution,
)
from .feature_extractor import FeatureError, FeatureSchema


FORMAT_NAME = "exemplar-wsd-model"
FORMAT_VERSION = "1.0"


class ModelStoreError(Exception):
    """Exception raised when a model cannot be stored or restored."""
    pass


class VersionMismatch(ModelStoreError):
    """Exception raised for a model written in another format version."""
    pass


class CorruptModel(ModelStoreError):
    """Exception raised for truncated or inconsistent model data."""
    pass


class ModelStore:
    """Reads and writes trained models as self-describing JSON documents."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def dumps(self, model: TrainedModel) -> bytes:
        """Serialize a model; identical models give identical bytes."""
        schema = model.schema
        document = {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "metadata": {
                "word": model.word,
                "pos": model.pos,
                "senses": list(model.senses),
                "feature_names": list(schema.feature_names()),
                "exemplar_count": len(model.exemplars),
            },
            "params": schema.params.to_dict(),
            "schema": schema.to_dict(),
            "distributions": [
                {value: dict(distribution.counts) for value, distribution in table.items()}
                for table in model.distances.tables
            ],
            "exemplars": [
                {"id": exemplar.id, "sense": exemplar.sense, "values": list(exemplar.values)}
                for exemplar in model.exemplars
            ],
        }
        return json.dumps(document, ensure_ascii=False, sort_keys=True, indent=1).encode("utf-8")

    def loads(self, data: bytes) -> TrainedModel:
        """
        Restore a model from serialized bytes.

        Raises:
            VersionMismatch: If the data uses another format version
            CorruptModel: If the data is truncated, malformed or inconsistent
        """
        try:
            document = json.loads(data.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CorruptModel(f"Model data is not valid JSON: {e}") from e

        if not isinstance(document, dict) or document.get("format") != FORMAT_NAME:
            raise CorruptModel("Data is not an exemplar-wsd model")
        version = document.get("format_version")
        if version is None:
            raise CorruptModel("Model has no format version")
        if version != FORMAT_VERSION:
            raise VersionMismatch(
                f"Model format version {version} is not supported (expected {FORMAT_VERSION})"
            )

        try:
            return self._rebuild(document)
        except ModelStoreError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError, FeatureError, ClassifierError) as e:
            raise CorruptModel(f"Model content is inconsistent: {e}") from e

    def save(self, model: TrainedModel, file_path: Union[str, Path]) -> str:
        """Write a model file and return its path."""
        path = Path(file_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(self.dumps(model))
        except OSError as e:
            raise ModelStoreError(f"Failed to write model file {path}: {e}") from e
        self.logger.info(f"Saved model for {model.word}/{model.pos} to {path}")
        return str(path)

    def load(self, file_path: Union[str, Path]) -> TrainedModel:
        """Read a model file."""
        path = Path(file_path)
        if not path.is_file():
            raise ModelStoreError(f"Model file not found: {path}")
        try:
            data = path.read_bytes()
        except OSError as e:
            raise ModelStoreError(f"Failed to read model file {path}: {e}") from e
        model = self.loads(data)
        self.logger.info(f"Loaded model for {model.word}/{model.pos} from {path}")
        return model

    def _rebuild(self, document: Dict[str, Any]) -> TrainedModel:
        schema = FeatureSchema.from_dict(document["schema"])
        if schema.params.to_dict() != document["params"]:
            raise CorruptModel("Model params disagree with its schema")

        tables = tuple(
            {
                value: ValueDistribution({sense: int(count) for sense, count in counts.items()})
                for value, counts in table.items()
            }
            for table in document["distributions"]
        )
        if len(tables) != schema.arity:
            raise CorruptModel(f"Model has {len(tables)} distribution tables, schema needs {schema.arity}")
        distances = DistanceModel(schema.senses, tables)

        exemplars = [
            Exemplar(str(entry["id"]), tuple(entry["values"]), entry["sense"])
            for entry in document["exemplars"]
        ]
        memory = ExemplarMemory(distances, exemplars)

        recount = DistanceModel.from_rows(
            [exemplar.values for exemplar in exemplars],
            [exemplar.sense for exemplar in exemplars],
            schema.senses,
        )
        if recount.tables != tables:
            raise CorruptModel("Distribution tables disagree with stored exemplars")
        return TrainedModel(schema, memory)


def save_model(model: TrainedModel) -> bytes:
    """Serialize a trained model to bytes."""
    return ModelStore().dumps(model)


def load_model(data: bytes) -> TrainedModel:
    """Restore a trained model from bytes produced by `save_model`."""
    return ModelStore().loads(data)
