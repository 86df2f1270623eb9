import logging
from typing import Dict, Tuple

import torch

from ...config import DistillConfig, TrainConfig
from ...data.batch import Batch
from ...errors import ContractError
from .distill import iam_kd_loss, irm_kd_loss

LOG = logging.getLogger(__name__)


class JointLoss(torch.nn.Module):
    """Translation loss plus the enabled distillation losses.

    Disabled components are reported as exact zeros and are not added to the
    total, so with both distillation losses off the total is the translation
    loss itself.
    """
    component_names = ('J_trans', 'Loss_IrM', 'Loss_IaM')

    def __init__(self, distill: DistillConfig, *,
                 trans_weight=1.0, irm_weight=1.0, iam_weight=1.0):
        super().__init__()
        self.distill = distill
        self.trans_weight = trans_weight
        self.irm_weight = irm_weight
        self.iam_weight = iam_weight

    @classmethod
    def from_config(cls, distill: DistillConfig, train: TrainConfig):
        return cls(distill,
                   trans_weight=train.trans_weight,
                   irm_weight=train.irm_weight,
                   iam_weight=train.iam_weight)

    @property
    def field_names(self):
        return self.component_names

    def forward(self, model, batch: Batch) -> Tuple[torch.Tensor, Dict[str, torch.Tensor]]:
        if self.distill.enabled and batch.images is None:
            raise ContractError('distillation enabled but the batch has no images: '
                                'training requires triplets; inference does not')

        logits, m, _ = model(batch.source, batch.source_pad_mask, batch.target[:, :-1])
        translation = model.translation_loss_from_logits(logits, batch.target)
        zero = torch.zeros((), dtype=logits.dtype, device=logits.device)
        components = {
            'J_trans': translation.total,
            'Loss_IrM': zero,
            'Loss_IaM': zero,
        }
        total = self.trans_weight * translation.total

        if self.distill.enabled:
            student_image, student_trace = model.student(m)
            with torch.no_grad():
                teacher_trace = model.teacher(batch.images)
            if self.distill.enable_irm:
                components['Loss_IrM'] = irm_kd_loss(
                    teacher_trace, student_trace, m, batch.images, student_image, self.distill)
                total = total + self.irm_weight * components['Loss_IrM']
            if self.distill.enable_iam:
                components['Loss_IaM'] = iam_kd_loss(
                    batch.images, student_image, model.teacher, self.distill,
                    teacher_trace=teacher_trace)
                total = total + self.iam_weight * components['Loss_IaM']

        LOG.debug('loss components: %s', {k: float(v) for k, v in components.items()})
        return total, components
