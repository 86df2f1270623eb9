"""Aligned triplets of source text, target text and optional image."""

import dataclasses
from dataclasses import dataclass
import logging
import os
from typing import Iterable, List, Optional, Sequence

import torch

from ..engine import tnsr
from ..errors import AlignmentError, ContractError, DimensionError, FormatError
from .vocab import Vocabulary

LOG = logging.getLogger(__name__)


@dataclass
class TripletExample:
    source: List[int]
    #: wrapped in <bos> ... <eos>
    target: List[int]
    #: 3 x H x W with values in [0, 1]
    image: Optional[torch.Tensor] = None


def tokenize(line: str) -> List[str]:
    return line.split()


def read_lines(path) -> List[str]:
    with open(path, 'r', encoding='utf8') as f:
        return [line.rstrip('\n') for line in f]


def make_example(source_tokens: Sequence[str], target_tokens: Sequence[str],
                 vocab: Vocabulary, image=None) -> TripletExample:
    if not source_tokens or not target_tokens:
        raise ContractError('source and target must be non-empty')
    return TripletExample(
        source=vocab.encode(source_tokens),
        target=[vocab.bos_id] + vocab.encode(target_tokens) + [vocab.eos_id],
        image=image,
    )


def load_image(path, image_size: Optional[int] = None) -> torch.Tensor:
    image = tnsr.read(path)
    if image.dim() != 3 or image.shape[0] != 3:
        raise FormatError('{}: expected a 3 x H x W image, got {}'.format(
            path, tuple(image.shape)))
    if image_size is not None and tuple(image.shape[1:]) != (image_size, image_size):
        raise DimensionError('{}: image shape {} does not match configured {}x{}'.format(
            path, tuple(image.shape), image_size, image_size))
    return image


def load_corpus(src_path, tgt_path, image_dir, vocab: Vocabulary, *,
                image_size: Optional[int] = None) -> List[TripletExample]:
    """Read whitespace-tokenized parallel text and images named ``{index}.tnsr``."""
    src_lines = read_lines(src_path)
    tgt_lines = read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError('{} has {} lines but {} has {} lines'.format(
            src_path, len(src_lines), tgt_path, len(tgt_lines)))

    examples = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        image = None
        if image_dir is not None:
            image = load_image(os.path.join(image_dir, '{}.tnsr'.format(i)), image_size)
        try:
            examples.append(make_example(tokenize(src), tokenize(tgt), vocab, image))
        except ContractError as e:
            raise ContractError('{}:{}: {}'.format(src_path, i + 1, e)) from e
    LOG.info('loaded %d examples from %s (images: %s)', len(examples), src_path, image_dir)
    return examples


def write_corpus(prefix, sources: Sequence[str], targets: Sequence[str],
                 images: Optional[Sequence] = None):
    """Write ``{prefix}.src``, ``{prefix}.tgt`` and ``{prefix}_images/{i}.tnsr``."""
    if len(sources) != len(targets):
        raise AlignmentError('{} sources but {} targets'.format(len(sources), len(targets)))
    with open(prefix + '.src', 'w', encoding='utf8') as f:
        f.writelines(s + '\n' for s in sources)
    with open(prefix + '.tgt', 'w', encoding='utf8') as f:
        f.writelines(t + '\n' for t in targets)
    if images is not None:
        image_dir = prefix + '_images'
        os.makedirs(image_dir, exist_ok=True)
        for i, image in enumerate(images):
            tnsr.write(os.path.join(image_dir, '{}.tnsr'.format(i)), image)
    LOG.info('corpus written: %s (%d lines)', prefix, len(sources))


def mask_tokens(example: TripletExample, mask_set: Iterable[str],
                vocab: Vocabulary) -> TripletExample:
    """Replace every source token in ``mask_set`` by ``[U]``."""
    mask_ids = {vocab.ids[t] for t in mask_set if t in vocab}
    return dataclasses.replace(
        example,
        source=[vocab.mask_id if i in mask_ids else i for i in example.source],
    )


def masked_fraction(examples: Sequence[TripletExample], mask_set: Iterable[str],
                    vocab: Vocabulary) -> float:
    """Fraction of source tokens that :func:`mask_tokens` replaces."""
    mask_ids = {vocab.ids[t] for t in mask_set if t in vocab}
    n_tokens = sum(len(e.source) for e in examples)
    n_masked = sum(1 for e in examples for i in e.source if i in mask_ids)
    return n_masked / n_tokens if n_tokens else 0.0


def load_prefix(prefix, vocab: Vocabulary, *, image_dir=None, require_images=False,
                image_size: Optional[int] = None) -> List[TripletExample]:
    """Load ``{prefix}.src``, ``{prefix}.tgt`` and images, by default from ``{prefix}_images``."""
    if image_dir is None and os.path.isdir(prefix + '_images'):
        image_dir = prefix + '_images'
    if require_images and image_dir is None:
        raise ContractError('{}: no images found; training requires triplets, '
                            'inference does not'.format(prefix))
    return load_corpus(prefix + '.src', prefix + '.tgt', image_dir, vocab,
                       image_size=image_size)


def source_examples(lines: Sequence[str], vocab: Vocabulary) -> List[TripletExample]:
    """Source-only examples with an empty ``<bos> <eos>`` target."""
    examples = []
    for i, line in enumerate(lines):
        tokens = tokenize(line)
        if not tokens:
            raise ContractError('line {}: empty source sentence'.format(i + 1))
        examples.append(TripletExample(vocab.encode(tokens), [vocab.bos_id, vocab.eos_id]))
    return examples
