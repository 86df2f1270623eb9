import logging
from typing import Optional

import torch

from ..config import ModelConfig
from ..errors import ConfigurationError
from ..engine import DTYPE
from ..data.vocab import SPECIALS
from .model import IkdMmt
from .visual import TeacherNet
from .. import weights

LOG = logging.getLogger(__name__)


def factory_teacher(config: ModelConfig, *, import_weights=True) -> TeacherNet:
    """Frozen teacher, identical for a given ``teacher_seed`` regardless of the global seed.

    Without ``import_weights`` the ``teacher_weights`` directory is not read;
    callers that restore a checkpoint already hold the teacher state.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.teacher_seed)
        teacher = TeacherNet(config)
    teacher.to(DTYPE)
    if import_weights and config.teacher_weights:
        weights.import_module(teacher, config.teacher_weights)
    return teacher


def factory(config: ModelConfig, *, seed: Optional[int] = None, import_teacher=True) -> IkdMmt:
    config.validate()
    if config.vocab_size < len(SPECIALS):
        raise ConfigurationError('vocab_size {} smaller than the {} reserved tokens'.format(
            config.vocab_size, len(SPECIALS)))
    if seed is not None:
        torch.manual_seed(seed)

    teacher = factory_teacher(config, import_weights=import_teacher)
    model = IkdMmt(config, teacher=teacher).to(DTYPE)
    shape = model.check_shapes()
    LOG.info({
        'type': 'model',
        'backbone': config.backbone,
        'feature_shape': list(shape),
        'n_parameters': sum(p.numel() for p in model.parameters() if p.requires_grad),
        'teacher_checksum': model.teacher.checksum(),
    })
    return model
