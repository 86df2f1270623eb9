"""Multimodal transformer encoder and autoregressive decoder.

The first encoder layer takes the fused sequence of text rows and projected
multimodal regions as queries and the text rows alone as keys and values.
Later layers keep the fused sequence as queries and its text rows as keys and
values. The decoder cross-attends over all fused positions.
"""

from dataclasses import dataclass
import logging
import math
from typing import List, Optional

import torch

from ..config import ModelConfig
from ..data.vocab import Vocabulary
from ..engine import functional
from ..errors import ContractError
from .attention import AttentionRecord, MultiHeadAttention

LOG = logging.getLogger(__name__)


def sinusoidal_positions(n_positions: int, width: int) -> torch.Tensor:
    position = torch.arange(n_positions, dtype=torch.float64)[:, None]
    frequency = torch.exp(torch.arange(0, width, 2, dtype=torch.float64)
                          * (-math.log(10000.0) / width))
    table = torch.zeros(n_positions, width, dtype=torch.float64)
    table[:, 0::2] = torch.sin(position * frequency)
    table[:, 1::2] = torch.cos(position * frequency)[:, :width // 2]
    return table


class FeedForward(torch.nn.Sequential):
    def __init__(self, d_model, ffn_dim):
        super().__init__(
            torch.nn.Linear(d_model, ffn_dim),
            torch.nn.ReLU(),
            torch.nn.Linear(ffn_dim, d_model),
        )


class EncoderLayer(torch.nn.Module):
    """Pre-norm layer: the first ``n_keys`` rows of the sequence are keys and values."""

    def __init__(self, d_model, n_heads, ffn_dim):
        super().__init__()
        self.attention_norm = torch.nn.LayerNorm(d_model)
        self.attention = MultiHeadAttention(d_model, n_heads)
        self.ffn_norm = torch.nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, ffn_dim)

    def forward(self, x, n_keys: int, key_pad_mask=None):
        h = self.attention_norm(x)
        attended, weights = self.attention(h, h[:, :n_keys], key_pad_mask=key_pad_mask)
        x = functional.add(x, attended)
        x = functional.add(x, self.ffn(self.ffn_norm(x)))
        return x, weights


class DecoderLayer(torch.nn.Module):
    def __init__(self, d_model, n_heads, ffn_dim):
        super().__init__()
        self.self_attention_norm = torch.nn.LayerNorm(d_model)
        self.self_attention = MultiHeadAttention(d_model, n_heads)
        self.cross_attention_norm = torch.nn.LayerNorm(d_model)
        self.cross_attention = MultiHeadAttention(d_model, n_heads)
        self.ffn_norm = torch.nn.LayerNorm(d_model)
        self.ffn = FeedForward(d_model, ffn_dim)

    def forward(self, y, memory, memory_pad_mask=None):
        h = self.self_attention_norm(y)
        attended, _ = self.self_attention(h, h, causal=True)
        y = functional.add(y, attended)
        attended, _ = self.cross_attention(
            self.cross_attention_norm(y), memory, key_pad_mask=memory_pad_mask)
        y = functional.add(y, attended)
        return functional.add(y, self.ffn(self.ffn_norm(y)))


@dataclass
class EncoderOutput:
    #: B x L x d with L = I + P, or P without text features
    hidden: torch.Tensor
    #: B x L, true at padded text rows
    pad_mask: torch.Tensor
    #: number of leading text rows in ``hidden``
    n_text: int
    #: per layer, B x heads x L x keys
    attention: List[torch.Tensor]

    def records(self, index: int, length: Optional[int] = None) -> List[AttentionRecord]:
        """Attention matrices of one example restricted to its real tokens."""
        keep = list(range(length if length is not None else self.n_text))
        rows = keep + list(range(self.n_text, self.hidden.shape[1]))
        columns = keep if self.n_text else list(range(self.hidden.shape[1]))
        return [
            AttentionRecord(layer_i, head_i, weights[index, head_i][rows][:, columns].detach())
            for layer_i, weights in enumerate(self.attention)
            for head_i in range(weights.shape[1])
        ]


class MultimodalTransformer(torch.nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        assert config.vocab_size > 0, 'vocabulary size must be set'
        self.config = config
        d = config.d_model

        self.source_embedding = torch.nn.Parameter(torch.randn(config.vocab_size, d) * d ** -0.5)
        self.target_embedding = torch.nn.Parameter(torch.randn(config.vocab_size, d) * d ** -0.5)
        self.register_buffer('positions', sinusoidal_positions(config.max_positions, d))
        # W^m: projects the multimodal regions into the text space
        self.multimodal_projection = torch.nn.Linear(config.feature_channels, d, bias=False)

        self.encoder_layers = torch.nn.ModuleList([
            EncoderLayer(d, config.n_heads, config.ffn_dim)
            for _ in range(config.n_encoder_layers)
        ])
        self.encoder_norm = torch.nn.LayerNorm(d)
        self.decoder_layers = torch.nn.ModuleList([
            DecoderLayer(d, config.n_heads, config.ffn_dim)
            for _ in range(config.n_decoder_layers)
        ])
        self.decoder_norm = torch.nn.LayerNorm(d)
        # W^h, b^h
        self.output_projection = torch.nn.Linear(d, config.vocab_size)

    def _embed(self, table, ids):
        if ids.shape[-1] > self.config.max_positions:
            raise ContractError('sequence of length {} exceeds max_positions {}'.format(
                ids.shape[-1], self.config.max_positions))
        return functional.add(functional.embedding_lookup(table, ids),
                               self.positions[:ids.shape[-1]])

    def embed_source(self, ids) -> torch.Tensor:
        """Word embeddings plus sinusoidal positions, ``B x I x d``."""
        return self._embed(self.source_embedding, ids)

    def fuse_query(self, t, m_regions) -> torch.Tensor:
        """Append the projected regions to the token rows: ``B x (I + P) x d``."""
        return functional.concat([t, self.multimodal_projection(m_regions)], axis=1)

    def encode_multimodal(self, t, m_regions, source_pad_mask) -> EncoderOutput:
        if bool(source_pad_mask.all(dim=1).any()):
            raise ContractError('encoder: a source sequence consists of padding only')
        batch_size, n_text, _ = t.shape

        if self.config.text_features:
            x = self.fuse_query(t, m_regions)
            n_keys = n_text
            key_pad_mask = source_pad_mask
            pad_mask = functional.concat([
                source_pad_mask,
                torch.zeros(batch_size, m_regions.shape[1], dtype=torch.bool,
                            device=t.device),
            ], axis=1)
        else:
            # without text features: regions attend to themselves
            x = self.multimodal_projection(m_regions)
            n_text = 0
            n_keys = x.shape[1]
            key_pad_mask = None
            pad_mask = torch.zeros(batch_size, x.shape[1], dtype=torch.bool, device=t.device)

        attention = []
        for layer in self.encoder_layers:
            x, weights = layer(x, n_keys, key_pad_mask)
            attention.append(weights)
        return EncoderOutput(self.encoder_norm(x), pad_mask, n_text, attention)

    def decode_logits(self, target_prefix, encoder_output: EncoderOutput) -> torch.Tensor:
        """Logits ``B x J x V`` for every prefix position under causal masking."""
        if target_prefix.shape[-1] == 0:
            raise ContractError('decoder: empty target prefix')
        if bool((target_prefix[:, 0] != Vocabulary.bos_id).any()):
            raise ContractError('decoder: target prefix must start with <bos>')
        y = self._embed(self.target_embedding, target_prefix)
        for layer in self.decoder_layers:
            y = layer(y, encoder_output.hidden, encoder_output.pad_mask)
        return self.output_projection(self.decoder_norm(y))
