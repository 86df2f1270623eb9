import logging
from typing import List, Tuple

import torch

from .config import TrainConfig

LOG = logging.getLogger(__name__)


def trainable_parameters(model: torch.nn.Module) -> List[Tuple[str, torch.nn.Parameter]]:
    """Named parameters in optimizer order; the frozen teacher is excluded."""
    return [(name, p) for name, p in model.named_parameters() if p.requires_grad]


def factory_optimizer(config: TrainConfig, model: torch.nn.Module) -> torch.optim.Adam:
    """Adam with constant learning rate."""
    parameters = [p for _, p in trainable_parameters(model)]
    LOG.info('Adam optimizer: lr=%g betas=%s eps=%g, %d parameter tensors',
             config.lr, tuple(config.betas), config.adam_eps, len(parameters))
    return torch.optim.Adam(
        parameters,
        lr=config.lr, betas=tuple(config.betas), eps=config.adam_eps)
