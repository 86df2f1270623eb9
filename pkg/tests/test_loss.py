import dataclasses

import pytest
import torch

from ikdmmt.config import DistillConfig
from ikdmmt.data import collate_triplets
from ikdmmt.errors import ContractError
from ikdmmt.network.losses import JointLoss, iam_kd_loss, irm_kd_loss


@pytest.fixture
def batch(synthetic):
    _, __, examples = synthetic
    return collate_triplets(examples[:4])


def test_total_is_translation_loss_without_distillation(tiny_model, batch):
    loss = JointLoss(DistillConfig(enable_irm=False, enable_iam=False))
    total, components = loss(tiny_model, batch)
    assert torch.equal(total, components['J_trans'])
    assert float(components['Loss_IrM']) == 0.0
    assert float(components['Loss_IaM']) == 0.0

    expected = tiny_model.translation_loss(batch).total
    assert torch.equal(total, expected)


def test_total_is_hand_sum(tiny_model, batch):
    loss = JointLoss(DistillConfig())
    total, components = loss(tiny_model, batch)
    assert set(components) == set(JointLoss.component_names)
    assert float(total) == float(components['J_trans'] + components['Loss_IrM']
                                 + components['Loss_IaM'])
    for value in components.values():
        assert float(value) >= 0.0

    # components computed independently
    with torch.no_grad():
        logits, m, _ = tiny_model(batch.source, batch.source_pad_mask, batch.target[:, :-1])
        translation = tiny_model.translation_loss_from_logits(logits, batch.target)
        student_image, student_trace = tiny_model.student(m)
        teacher_trace = tiny_model.teacher(batch.images)
        irm = irm_kd_loss(teacher_trace, student_trace, m, batch.images, student_image,
                          DistillConfig())
        iam = iam_kd_loss(batch.images, student_image, tiny_model.teacher, DistillConfig())
    assert float(components['J_trans']) == pytest.approx(float(translation.total), rel=1e-12)
    assert float(components['Loss_IrM']) == pytest.approx(float(irm), rel=1e-12)
    assert float(components['Loss_IaM']) == pytest.approx(float(iam), rel=1e-12)


def test_weights(tiny_model, batch):
    loss = JointLoss(DistillConfig(), irm_weight=2.0, iam_weight=0.5)
    total, components = loss(tiny_model, batch)
    expected = (components['J_trans'] + 2.0 * components['Loss_IrM']
                + 0.5 * components['Loss_IaM'])
    assert float(total) == pytest.approx(float(expected), rel=1e-12)


def test_single_component(tiny_model, batch):
    total, components = JointLoss(DistillConfig(enable_irm=False))(tiny_model, batch)
    assert float(components['Loss_IrM']) == 0.0
    assert float(components['Loss_IaM']) > 0.0
    assert float(total) == float(components['J_trans'] + components['Loss_IaM'])


def test_distillation_needs_images(tiny_model, batch):
    text_only = dataclasses.replace(batch, images=None)
    with pytest.raises(ContractError):
        JointLoss(DistillConfig())(tiny_model, text_only)
    total, _ = JointLoss(DistillConfig(enable_irm=False, enable_iam=False))(tiny_model, text_only)
    assert float(total) > 0.0


def test_translation_loss_counts_tokens(tiny_model, batch):
    translation = tiny_model.translation_loss(batch)
    assert translation.n_tokens == int((batch.target[:, 1:] != 0).sum())
    assert float(translation.mean) == pytest.approx(
        float(translation.total) / translation.n_tokens)
