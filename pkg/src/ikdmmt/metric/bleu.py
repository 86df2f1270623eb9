"""Corpus-level 4-gram BLEU, case-insensitive, without smoothing."""

from dataclasses import asdict, dataclass
import logging
from typing import List, Sequence

from sacrebleu.metrics import BLEU

from ..errors import ContractError
from .base import Base

LOG = logging.getLogger(__name__)


@dataclass
class BleuReport:
    #: in [0, 100]
    score: float
    #: modified n-gram precisions p1..p4 as fractions
    precisions: List[float]
    brevity_penalty: float
    hypothesis_length: int
    reference_length: int

    def json_data(self):
        return asdict(self)

    def text(self):
        return 'BLEU = {:.2f} {} (BP = {:.4f}, hyp_len = {}, ref_len = {})'.format(
            self.score, '/'.join('{:.1f}'.format(100.0 * p) for p in self.precisions),
            self.brevity_penalty, self.hypothesis_length, self.reference_length)


def bleu4(hypotheses: Sequence[str], references: Sequence[str]) -> BleuReport:
    """BLEU of whitespace-tokenized sentences against one reference each.

    >>> bleu4(['a cat sits'], ['A cat sits']).score
    0.0
    >>> round(bleu4(['the cat sat on the mat'], ['the cat sat on the mat']).score, 2)
    100.0
    """
    if not hypotheses:
        raise ContractError('BLEU of an empty corpus')
    if len(hypotheses) != len(references):
        raise ContractError('{} hypotheses but {} references'.format(
            len(hypotheses), len(references)))

    bleu = BLEU(lowercase=True, tokenize='none', smooth_method='none')
    result = bleu.corpus_score(list(hypotheses), [list(references)])
    precisions = [c / t if t else 0.0 for c, t in zip(result.counts, result.totals)]
    return BleuReport(
        score=float(result.score),
        precisions=precisions,
        brevity_penalty=float(result.bp),
        hypothesis_length=int(result.sys_len),
        reference_length=int(result.ref_len),
    )


class Bleu(Base):
    text_labels = ['BLEU', 'p1', 'p2', 'p3', 'p4', 'BP']

    def __init__(self):
        self.hypotheses = []
        self.references = []

    def accumulate(self, hypothesis, reference, *, source=None):
        self.hypotheses.append(hypothesis)
        self.references.append(reference)

    def report(self) -> BleuReport:
        return bleu4(self.hypotheses, self.references)

    def stats(self):
        report = self.report()
        return {
            'stats': [report.score] + report.precisions + [report.brevity_penalty],
            'text_labels': self.text_labels,
        }
