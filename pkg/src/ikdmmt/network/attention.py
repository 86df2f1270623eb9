from dataclasses import dataclass
import logging
import math
from typing import Optional

import torch

from ..engine import functional

LOG = logging.getLogger(__name__)


@dataclass
class AttentionRecord:
    layer: int
    head: int
    #: rows are queries, columns are keys
    weights: torch.Tensor

    def json_data(self, n_text_rows: Optional[int] = None):
        rows = self.weights.tolist()
        data = {'layer': self.layer, 'head': self.head, 'rows': rows}
        if n_text_rows is not None:
            data['row_labels'] = [
                'token:{}'.format(i) if i < n_text_rows else 'region:{}'.format(i - n_text_rows)
                for i in range(len(rows))
            ]
        return data


class MultiHeadAttention(torch.nn.Module):
    """Scaled dot-product attention with separate query and key/value inputs.

    Scores are scaled by 1/sqrt(d_model). Masked key columns are set to -inf
    before the softmax so they receive exactly zero weight.
    """

    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        assert d_model % n_heads == 0
        self.d_model = d_model
        self.n_heads = n_heads
        self.query = torch.nn.Linear(d_model, d_model, bias=False)
        self.key = torch.nn.Linear(d_model, d_model, bias=False)
        self.value = torch.nn.Linear(d_model, d_model, bias=False)
        self.output = torch.nn.Linear(d_model, d_model)

    def _split_heads(self, x):
        batch_size, length, _ = x.shape
        return x.view(batch_size, length, self.n_heads, -1).transpose(1, 2)

    def forward(self, query, key_value, *, key_pad_mask=None, causal=False):
        """Return the attended values ``B x Lq x d`` and weights ``B x heads x Lq x Lk``."""
        q = self._split_heads(self.query(query))
        k = self._split_heads(self.key(key_value))
        v = self._split_heads(self.value(key_value))

        scores = functional.matmul(q, k.transpose(-1, -2)) / math.sqrt(self.d_model)
        if key_pad_mask is not None:
            scores = scores.masked_fill(key_pad_mask[:, None, None, :], float('-inf'))
        if causal:
            future = torch.ones(scores.shape[-2:], dtype=torch.bool,
                                device=scores.device).triu(diagonal=1)
            scores = scores.masked_fill(future, float('-inf'))
        weights = functional.softmax(scores, axis=-1)

        context = functional.matmul(weights, v)
        context = context.transpose(1, 2).reshape(query.shape[0], query.shape[1], self.d_model)
        return self.output(context), weights
