import logging
from typing import Dict, Sequence, Tuple

from ..data.corpus import tokenize
from ..data.synthetic import AMBIGUOUS
from ..errors import ContractError
from .base import Base

LOG = logging.getLogger(__name__)


class AmbiguousAccuracy(Base):
    """How often the sense of an ambiguous source word is translated correctly.

    Only sentences whose source contains an ambiguous word count. The reference
    position is where the reference holds one of that word's senses; the
    hypothesis is correct when it has the reference token at that position.
    """

    def __init__(self, ambiguous: Dict[str, Tuple[str, ...]] = None):
        self.ambiguous = AMBIGUOUS if ambiguous is None else ambiguous
        self.n_correct = 0
        self.n_total = 0

    def accumulate(self, hypothesis, reference, *, source=None):
        assert source is not None
        source_tokens = tokenize(source)
        senses = {s for w in source_tokens if w in self.ambiguous for s in self.ambiguous[w]}
        if not senses:
            return
        reference_tokens = tokenize(reference)
        positions = [i for i, t in enumerate(reference_tokens) if t in senses]
        if not positions:
            LOG.warning('reference "%s" contains no sense of its ambiguous word', reference)
            return
        hypothesis_tokens = tokenize(hypothesis)
        self.n_total += 1
        j = positions[0]
        if j < len(hypothesis_tokens) and hypothesis_tokens[j] == reference_tokens[j]:
            self.n_correct += 1

    @property
    def value(self) -> float:
        return self.n_correct / self.n_total if self.n_total else 0.0

    def stats(self):
        return {
            'stats': [self.value, self.n_total],
            'text_labels': ['ambiguous accuracy', 'ambiguous sentences'],
        }


def ambiguous_accuracy(sources: Sequence[str], hypotheses: Sequence[str],
                       references: Sequence[str]) -> float:
    if not len(sources) == len(hypotheses) == len(references):
        raise ContractError('{} sources, {} hypotheses and {} references'.format(
            len(sources), len(hypotheses), len(references)))
    metric = AmbiguousAccuracy()
    for source, hypothesis, reference in zip(sources, hypotheses, references):
        metric.accumulate(hypothesis, reference, source=source)
    return metric.value
