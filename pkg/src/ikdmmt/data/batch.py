from dataclasses import dataclass
import logging
from typing import List, Optional, Sequence

import torch

from .corpus import TripletExample
from .vocab import Vocabulary

LOG = logging.getLogger(__name__)


@dataclass
class Batch:
    #: B x I_max, right-padded
    source: torch.Tensor
    #: true exactly where source == <pad>
    source_pad_mask: torch.Tensor
    #: B x J_max, right-padded, <bos> ... <eos>
    target: torch.Tensor
    target_pad_mask: torch.Tensor
    #: B x 3 x H x W
    images: Optional[torch.Tensor] = None

    def __len__(self):
        return self.source.shape[0]


def pad_ids(sequences: Sequence[Sequence[int]], pad_id=Vocabulary.pad_id) -> torch.Tensor:
    max_len = max(len(s) for s in sequences)
    padded = torch.full((len(sequences), max_len), pad_id, dtype=torch.long)
    for i, s in enumerate(sequences):
        padded[i, :len(s)] = torch.as_tensor(s, dtype=torch.long)
    return padded


def collate_triplets(examples: Sequence[TripletExample]) -> Batch:
    source = pad_ids([e.source for e in examples])
    target = pad_ids([e.target for e in examples])
    images = None
    if all(e.image is not None for e in examples):
        images = torch.stack([e.image for e in examples])
    elif any(e.image is not None for e in examples):
        LOG.warning('dropping images of a batch where only some examples have images')
    return Batch(
        source=source,
        source_pad_mask=source == Vocabulary.pad_id,
        target=target,
        target_pad_mask=target == Vocabulary.pad_id,
        images=images,
    )


def loader(examples: Sequence[TripletExample], batch_size: int, *,
           seed: Optional[int] = None) -> torch.utils.data.DataLoader:
    """Data loader that shuffles with ``seed``, or keeps corpus order without one."""
    generator = None
    if seed is not None:
        generator = torch.Generator()
        generator.manual_seed(seed)
    return torch.utils.data.DataLoader(
        list(examples), batch_size=batch_size, shuffle=seed is not None,
        generator=generator, num_workers=0, collate_fn=collate_triplets)


def batchify(examples: Sequence[TripletExample], batch_size: int, seed: int) -> List[Batch]:
    return list(loader(examples, batch_size, seed=seed))
