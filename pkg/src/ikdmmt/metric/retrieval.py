"""Retrieval of visual features from generated multimodal features."""

from dataclasses import dataclass
import logging
from typing import Dict, Sequence

import torch

from ..errors import ContractError

LOG = logging.getLogger(__name__)

DEFAULT_KS = (1, 5, 10, 15)


@dataclass
class RetrievalReport:
    #: K -> fraction of queries whose own gallery item is in their top K
    recall: Dict[int, float]
    n_queries: int

    def json_data(self):
        return {
            'recall': {'R@{}'.format(k): v for k, v in sorted(self.recall.items())},
            'n_queries': self.n_queries,
        }

    def text(self):
        return '\n'.join(
            ['{:>6s} {:>8s}'.format('K', 'recall')]
            + ['{:>6s} {:8.4f}'.format('R@{}'.format(k), v) for k, v in sorted(self.recall.items())]
            + ['{:>6s} {:8d}'.format('n', self.n_queries)]
        )


def _flatten(features) -> torch.Tensor:
    if isinstance(features, torch.Tensor):
        return features.reshape(features.shape[0], -1).to(torch.float64)
    return torch.stack([torch.as_tensor(f, dtype=torch.float64).reshape(-1) for f in features])


def cosine_matrix(queries, gallery) -> torch.Tensor:
    """Query x gallery cosine similarities of flattened features."""
    q = torch.nn.functional.normalize(_flatten(queries), dim=1)
    g = torch.nn.functional.normalize(_flatten(gallery), dim=1)
    if q.shape[1] != g.shape[1]:
        raise ContractError('query width {} does not match gallery width {}'.format(
            q.shape[1], g.shape[1]))
    return q @ g.T


def retrieval_rk(queries, gallery, ks: Sequence[int] = DEFAULT_KS) -> RetrievalReport:
    """Recall at K where the ground truth of query i is gallery item i.

    Ranking sorts by descending cosine similarity with a stable sort, so equal
    similarities rank the lower gallery index first.
    """
    if len(queries) != len(gallery):
        raise ContractError('{} queries but {} gallery items'.format(len(queries), len(gallery)))
    if not len(queries):  # pylint: disable=use-implicit-booleaness-not-len
        raise ContractError('retrieval needs at least one query')
    if any(k < 1 for k in ks):
        raise ContractError('K must be >= 1, got {}'.format(list(ks)))

    similarities = cosine_matrix(queries, gallery)
    _, ranking = torch.sort(similarities, dim=1, descending=True, stable=True)
    n = similarities.shape[0]
    own = torch.arange(n)[:, None]
    # position of the own item in every query's ranking
    rank = (ranking == own).to(torch.long).argmax(dim=1)
    recall = {int(k): float((rank < k).to(torch.float64).mean()) for k in ks}
    LOG.debug('retrieval over %d queries: %s', n, recall)
    return RetrievalReport(recall, n)
