"""Human-readable dumps of trained models."""

import logging
from typing import Any, Dict, Iterable

from jinja2 import Environment, PackageLoader, StrictUndefined

from .exemplar_classifier import TrainedModel
from .feature_extractor import COLLOCATION_OFFSETS, KnowledgeSource


class SchemaReporter:
    """Renders the feature schema and memory summary of a trained model."""

    def __init__(self, template_name: str = "schema.txt.j2"):
        self.template_name = template_name
        self.logger = logging.getLogger(__name__)

        self.jinja_env = Environment(
            loader=PackageLoader("exemplar_wsd", "templates"),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )
        self.jinja_env.filters["signed"] = self._signed
        self.jinja_env.filters["or_none"] = self._or_none

    def context(self, model: TrainedModel) -> Dict[str, Any]:
        """Template variables describing a model."""
        schema = model.schema
        counts = {sense: 0 for sense in model.senses}
        for exemplar in model.exemplars:
            counts[exemplar.sense] += 1
        return {
            "word": model.word,
            "pos": model.pos,
            "senses": list(model.senses),
            "sources": KnowledgeSource.format_set(schema.sources),
            "params": schema.params,
            "feature_count": schema.arity,
            "exemplar_count": len(model.exemplars),
            "sense_counts": list(counts.items()),
            "keywords": list(schema.keywords),
            "collocations": [
                {"left": left, "right": right, "values": sorted(values)}
                for (left, right), values in zip(COLLOCATION_OFFSETS, schema.colloc_values)
            ],
            "verbs": sorted(schema.verbs),
        }

    def render(self, model: TrainedModel) -> str:
        template = self.jinja_env.get_template(self.template_name)
        text = template.render(**self.context(model))
        self.logger.debug(f"Rendered schema dump for {model.word}/{model.pos}")
        return text

    def _signed(self, offset: int) -> str:
        """Jinja2 filter to show an offset with its sign."""
        return f"{offset:+d}"

    def _or_none(self, values: Iterable[str], separator: str = ", ") -> str:
        """Jinja2 filter to join values, or say (none) when there are none."""
        values = list(values)
        return separator.join(values) if values else "(none)"
