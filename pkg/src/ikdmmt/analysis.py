"""Attention export, feature export, image retrieval and degradation study."""

from dataclasses import dataclass
import json
import logging
import os
from typing import Iterable, List, Optional, Sequence, Tuple

import torch

from .data.batch import loader
from .data.corpus import TripletExample, mask_tokens, masked_fraction
from .data.vocab import Vocabulary
from .engine import tnsr
from .errors import ContractError
from .metric.bleu import BleuReport, bleu4
from .metric.retrieval import DEFAULT_KS, RetrievalReport, cosine_matrix, retrieval_rk
from .translator import Translator

LOG = logging.getLogger(__name__)

DEGRADATION_MODES = ('zero-shot', 'retrained')


@torch.no_grad()
def attention_records(model, examples: Sequence[TripletExample], *,
                      vocab: Optional[Vocabulary] = None) -> List[dict]:
    """Encoder attention of every layer and head, one entry per example.

    Rows are the query rows (real tokens, then regions), columns the real
    source tokens.
    """
    model.eval()
    records = []
    for batch_start, batch in zip(range(0, len(examples), 16), loader(examples, 16)):
        encoder_output = model.encoder_output(batch)
        for offset in range(len(batch)):
            example = examples[batch_start + offset]
            length = len(example.source) if encoder_output.n_text else None
            for record in encoder_output.records(offset, length):
                data = record.json_data(n_text_rows=length or 0)
                data['example'] = batch_start + offset
                if vocab is not None:
                    data['tokens'] = vocab.decode(example.source, strip_specials=False)
                records.append(data)
    return records


def export_attention(model, examples: Sequence[TripletExample], path, *,
                     vocab: Optional[Vocabulary] = None) -> List[dict]:
    records = attention_records(model, examples, vocab=vocab)
    with open(path, 'w', encoding='utf8') as f:
        json.dump(records, f)
    LOG.info('attention of %d examples written to %s', len(examples), path)
    return records


@torch.no_grad()
def features(model, examples: Sequence[TripletExample], *,
             batch_size=16) -> Tuple[torch.Tensor, Optional[torch.Tensor]]:
    """Generated multimodal features and, with images, the teacher's last activations."""
    model.eval()
    generated, visual = [], []
    for batch in loader(examples, batch_size):
        _, m = model.encode(batch.source, batch.source_pad_mask, return_feature=True)
        generated.append(m)
        if batch.images is not None:
            _, last = model.teacher(batch.images.to(m.dtype)).last
            visual.append(last)
    if visual and len(visual) != len(generated):
        raise ContractError('some examples lack images')
    return torch.cat(generated), (torch.cat(visual) if visual else None)


def export_features(model, examples: Sequence[TripletExample], out_dir) -> dict:
    generated, visual = features(model, examples)
    written = {}
    for name, values in (('generated', generated), ('teacher', visual)):
        if values is None:
            continue
        directory = os.path.join(out_dir, name)
        os.makedirs(directory, exist_ok=True)
        for i, value in enumerate(values):
            tnsr.write(os.path.join(directory, '{}.tnsr'.format(i)), value)
        written[name] = len(values)
    LOG.info({'type': 'features', 'out': out_dir, 'written': written})
    return written


def image_retrieval(model, examples: Sequence[TripletExample],
                    ks: Sequence[int] = DEFAULT_KS) -> Tuple[RetrievalReport, torch.Tensor]:
    """Rank teacher features of the real images by similarity to the generated features."""
    generated, visual = features(model, examples)
    if visual is None:
        raise ContractError('image retrieval needs images')
    report = retrieval_rk(generated, visual, ks)
    return report, cosine_matrix(generated, visual)


@dataclass
class DegradationReport:
    clean: BleuReport
    masked: BleuReport
    masked_fraction: float
    mode: str

    @property
    def drop(self) -> float:
        return self.clean.score - self.masked.score

    def json_data(self):
        return {
            'clean': self.clean.json_data(),
            'masked': self.masked.json_data(),
            'drop': self.drop,
            'masked_fraction': self.masked_fraction,
            'mode': self.mode,
        }


def degradation_eval(model, examples: Sequence[TripletExample], mask_set: Iterable[str],
                     vocab: Vocabulary, *, mode='zero-shot',
                     beam=1, max_len: Optional[int] = None) -> DegradationReport:
    """BLEU on clean sources and on sources with ``mask_set`` tokens replaced by ``[U]``.

    ``mode`` labels whether the model was trained with masked sources
    (``retrained``) or only sees them here (``zero-shot``).
    """
    if mode not in DEGRADATION_MODES:
        raise ContractError('mode {} not in {}'.format(mode, DEGRADATION_MODES))
    mask_set = list(mask_set)
    translator = Translator(model, vocab, beam=beam, max_len=max_len)
    references = [' '.join(vocab.decode(e.target)) for e in examples]

    def bleu_of(sources):
        hypotheses = [' '.join(vocab.decode(translator.translate_ids(e.source))) for e in sources]
        return bleu4(hypotheses, references)

    clean = bleu_of(examples)
    masked = bleu_of([mask_tokens(e, mask_set, vocab) for e in examples])
    report = DegradationReport(clean, masked, masked_fraction(examples, mask_set, vocab), mode)
    LOG.info({'type': 'degradation', **report.json_data()})
    return report
