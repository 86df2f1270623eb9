"""Multimodal feature generator.

The feature is computed from text alone: the mean of the (position-encoded)
source embeddings is projected to the teacher's channel width and replicated
over all spatial regions by average unpooling. There is no image input.
"""

import logging

import torch

from ..config import ModelConfig
from ..engine import functional
from ..errors import ContractError, DimensionError

LOG = logging.getLogger(__name__)


class FeatureGenerator(torch.nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        # W^t
        self.projection = torch.nn.Linear(
            config.d_model, config.feature_channels, bias=config.generator_bias)
        self.activation = torch.nn.ReLU() if config.generator_activation else None

    @staticmethod
    def global_text_feature(t, source_pad_mask=None):
        """Mean over the real (non-pad) token rows of ``B x I x d``."""
        if source_pad_mask is None:
            source_pad_mask = torch.zeros(t.shape[:2], dtype=torch.bool, device=t.device)
        real = (~source_pad_mask).to(t.dtype)
        n_real = real.sum(dim=1, keepdim=True)
        if bool((n_real == 0).any()):
            raise ContractError('global text feature: a sequence has no real tokens')
        return (t * real[:, :, None]).sum(dim=1) / n_real

    def generate_multimodal(self, t_bar):
        """Feature map ``B x C_m x p x p`` from the pooled text feature ``B x d``."""
        if t_bar.shape[-1] != self.projection.in_features:
            raise DimensionError('generator: text feature {} does not match W^t input {}'.format(
                tuple(t_bar.shape), self.projection.in_features))
        v = self.projection(t_bar)
        if self.activation is not None:
            v = self.activation(v)
        return functional.avg_unpool2d(v[:, :, None, None], self.config.feature_size)

    def forward(self, t, source_pad_mask=None):
        return self.generate_multimodal(self.global_text_feature(t, source_pad_mask))


def as_regions(m):
    """``B x C x p x p`` feature map as ``B x P x C`` pseudo-token rows."""
    return m.flatten(2).transpose(1, 2)
