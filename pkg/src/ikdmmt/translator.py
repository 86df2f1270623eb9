"""Image-free translation.

Nothing here accepts an image: the multimodal feature comes from the
generator, which sees only the source text.
"""

import logging
import os
from typing import List, Optional, Sequence

import torch

from . import decoding
from .checkpoint import load_checkpoint, restore
from .data.corpus import tokenize
from .data.vocab import Vocabulary
from .errors import ContractError
from .network.factory import factory
from .network.model import IkdMmt

LOG = logging.getLogger(__name__)

VOCAB_FILE = 'vocab.txt'
DEFAULT_MAX_LEN = 50


def default_vocab_path(checkpoint_path) -> str:
    """Training writes the vocabulary beside its checkpoints."""
    return os.path.join(os.path.dirname(os.path.normpath(checkpoint_path)), VOCAB_FILE)


def load_model(checkpoint_path, *, vocab_path: Optional[str] = None):
    """Model and vocabulary of a trained checkpoint."""
    checkpoint = load_checkpoint(checkpoint_path)
    model = factory(checkpoint.config.model, import_teacher=False)
    restore(checkpoint, model)
    model.eval()
    vocab = Vocabulary.read(vocab_path or default_vocab_path(checkpoint_path))
    LOG.info('model from %s (step %d)', checkpoint_path, checkpoint.step)
    return model, vocab


class Translator:
    def __init__(self, model: IkdMmt, vocab: Vocabulary, *, beam=1, max_len: Optional[int] = None):
        if len(vocab) != model.config.vocab_size:
            raise ContractError('vocabulary has {} entries, model expects {}'.format(
                len(vocab), model.config.vocab_size))
        self.model = model
        self.vocab = vocab
        self.beam = beam
        if max_len is None:
            max_len = min(DEFAULT_MAX_LEN, model.config.max_positions)
        self.max_len = max_len

    @classmethod
    def from_checkpoint(cls, checkpoint_path, *, vocab_path: Optional[str] = None, **kwargs):
        model, vocab = load_model(checkpoint_path, vocab_path=vocab_path)
        return cls(model, vocab, **kwargs)

    def translate_ids(self, source_ids: Sequence[int]) -> List[int]:
        hypothesis = decoding.decode_beam(self.model, source_ids,
                                          beam=self.beam, max_len=self.max_len)
        return hypothesis.output_ids()

    def translate_tokens(self, tokens: Sequence[str]) -> List[str]:
        return self.vocab.decode(self.translate_ids(self.vocab.encode(tokens)))

    def translate_lines(self, lines: Sequence[str]) -> List[str]:
        hypotheses = []
        with torch.no_grad():
            for i, line in enumerate(lines):
                tokens = tokenize(line)
                if not tokens:
                    raise ContractError('line {}: empty source sentence'.format(i + 1))
                hypotheses.append(' '.join(self.translate_tokens(tokens)))
        return hypotheses
