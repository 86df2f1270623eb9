"""Distillation losses and the joint training objective."""

from .distill import (
    batch_similarity,
    iam_kd_loss,
    image_space_loss,
    irm_kd_loss,
    pair_representations,
    select_representations,
    similarity,
)
from .joint import JointLoss
