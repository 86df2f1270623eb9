import math

import pytest
import torch

from ikdmmt.config import DistillConfig
from ikdmmt.engine import DTYPE
from ikdmmt.errors import ConfigurationError, DimensionError
from ikdmmt.network import ActivationTrace, factory
from ikdmmt.network.losses import (
    iam_kd_loss,
    image_space_loss,
    irm_kd_loss,
    pair_representations,
    similarity,
)

KINDS = ['L2', 'L1', 'Linf', 'Cosine', 'KL']


@pytest.mark.parametrize('kind', KINDS)
def test_similarity_zero_at_identity(kind):
    a = torch.randn(3, 4, dtype=DTYPE)
    assert float(similarity(a, a.clone(), kind)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('kind', ['L2', 'L1', 'Linf'])
def test_similarity_unit(kind):
    a = torch.tensor([1.0, 0.0], dtype=DTYPE)
    b = torch.tensor([0.0, 0.0], dtype=DTYPE)
    assert float(similarity(a, b, kind)) == 1.0


@pytest.mark.parametrize('kind,expected', [('L2', 5.0), ('L1', 7.0), ('Linf', 4.0)])
def test_similarity_norms(kind, expected):
    a = torch.tensor([[3.0], [-4.0]], dtype=DTYPE)
    assert float(similarity(a, torch.zeros_like(a), kind)) == expected


def test_cosine():
    a = torch.tensor([1.0, 0.0], dtype=DTYPE)
    b = torch.tensor([0.0, 2.0], dtype=DTYPE)
    assert float(similarity(a, b, 'Cosine')) == pytest.approx(1.0)
    assert float(similarity(a, -a, 'Cosine')) == pytest.approx(2.0)
    assert float(similarity(a, torch.zeros_like(a), 'Cosine')) == 0.0


def test_kl():
    uniform = torch.zeros(5, dtype=DTYPE)
    assert float(similarity(uniform, uniform + 3.0, 'KL')) == pytest.approx(0.0, abs=1e-15)
    g = torch.Generator().manual_seed(0)
    for _ in range(10):
        a = torch.randn(6, generator=g, dtype=DTYPE)
        b = torch.randn(6, generator=g, dtype=DTYPE)
        assert float(similarity(a, b, 'KL')) >= 0.0


def test_similarity_errors():
    with pytest.raises(DimensionError):
        similarity(torch.zeros(2), torch.zeros(3))
    with pytest.raises(ConfigurationError):
        similarity(torch.zeros(2), torch.zeros(2), 'L3')


def traces(model):
    config = model.config
    image = torch.rand(2, 3, config.image_size, config.image_size, dtype=DTYPE)
    source = torch.tensor([[5, 6, 7], [8, 9, 0]])
    _, m = model.encode(source, source == 0, return_feature=True)
    student_image, student_trace = model.student(m)
    return model.teacher(image), student_trace, m, image, student_image


@pytest.mark.parametrize('backbone,granularity,n_pairs', [
    ('bottleneck', 'Model', 1),
    ('bottleneck', 'Block', 3),
    ('bottleneck', 'Layer', 7),
    ('plain', 'Layer', 7),
    ('shallow', 'Block', 3),
    ('shallow', 'Layer', 3),
])
def test_pairing(model_config, backbone, granularity, n_pairs):
    model = factory(model_config(backbone=backbone), seed=0)
    teacher_trace, student_trace, m, _, __ = traces(model)
    pairs = pair_representations(teacher_trace, student_trace, m, granularity)
    assert len(pairs) == n_pairs
    for teacher_rep, student_rep in pairs:
        assert teacher_rep.shape == student_rep.shape
    # the generated feature always pairs with the last teacher activation
    assert pairs[0][0] is teacher_trace.last[1]
    assert pairs[0][1] is m


def test_pairing_unmatched():
    teacher_trace = ActivationTrace()
    teacher_trace.add('stem', torch.zeros(1, 4, 8, 8))
    teacher_trace.add('stage2', torch.zeros(1, 8, 4, 4))
    student_trace = ActivationTrace()
    student_trace.add('s-stage2', torch.zeros(1, 4, 6, 6))
    with pytest.raises(ConfigurationError) as e:
        pair_representations(teacher_trace, student_trace, torch.zeros(1, 8, 4, 4), 'Block')
    assert 'stem' in str(e.value)


def test_irm_hand_computed():
    teacher_trace = ActivationTrace()
    teacher_trace.add('stem', torch.tensor([[3.0, 0.0]], dtype=DTYPE))
    m = torch.tensor([[0.0, 4.0]], dtype=DTYPE)
    real = torch.tensor([[1.0, 2.0]], dtype=DTYPE)
    reconstructed = torch.tensor([[1.0, 0.0]], dtype=DTYPE)

    loss = irm_kd_loss(teacher_trace, ActivationTrace(), m, real, reconstructed, DistillConfig())
    assert float(loss) == 5.0 + 2.0

    image_only = DistillConfig(image_space_only=True)
    loss = irm_kd_loss(teacher_trace, ActivationTrace(), m, real, reconstructed, image_only)
    assert float(loss) == 2.0


def test_image_space_loss_sums_over_batch():
    real = torch.zeros(2, 3, 2, 2, dtype=DTYPE)
    reconstructed = torch.zeros_like(real)
    reconstructed[0, 0, 0, 0] = 3.0
    reconstructed[1, 0, 0, 0] = 4.0
    assert float(image_space_loss(real, reconstructed)) == 7.0


@pytest.mark.parametrize('granularity', ['Model', 'Block', 'Layer'])
def test_irm_zero_at_perfect_inversion(tiny_model, granularity):
    teacher_trace, _, __, image, ___ = traces(tiny_model)
    # a student that inverts perfectly reproduces the teacher stages in reverse
    entries = teacher_trace.blocks() if granularity == 'Block' else teacher_trace.layers()
    perfect = ActivationTrace()
    for name, value in reversed(entries[:-1]):
        perfect.add('s-' + name, value.clone())
    m = teacher_trace.last[1].clone()

    config = DistillConfig(granularity=granularity)
    loss = irm_kd_loss(teacher_trace, perfect, m, image, image.clone(), config)
    assert float(loss) == 0.0


@pytest.mark.parametrize('granularity', ['Model', 'Block', 'Layer'])
@pytest.mark.parametrize('kind', KINDS)
def test_iam_zero_at_perfect_inversion(tiny_model, granularity, kind):
    _, __, ___, image, ____ = traces(tiny_model)
    config = DistillConfig(similarity=kind, granularity=granularity)
    with torch.no_grad():
        loss = iam_kd_loss(image, image.clone(), tiny_model.teacher, config)
    assert float(loss) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('granularity', ['Model', 'Block', 'Layer'])
def test_losses_non_negative(tiny_model, granularity):
    teacher_trace, student_trace, m, image, student_image = traces(tiny_model)
    config = DistillConfig(granularity=granularity)
    assert float(irm_kd_loss(teacher_trace, student_trace, m, image, student_image, config)) > 0.0
    assert float(iam_kd_loss(image, student_image, tiny_model.teacher, config)) > 0.0


def test_iam_gradient_reaches_student_not_teacher(tiny_model):
    _, __, ___, image, student_image = traces(tiny_model)
    loss = iam_kd_loss(image, student_image, tiny_model.teacher, DistillConfig())
    loss.backward()
    assert all(p.grad is None for p in tiny_model.teacher.parameters())
    student_grads = [p.grad for p in tiny_model.student.parameters()]
    assert any(g is not None and float(g.abs().sum()) > 0.0 for g in student_grads)
    assert tiny_model.generator.projection.weight.grad is not None


def test_irm_teacher_targets_carry_no_gradient(tiny_model):
    teacher_trace, student_trace, m, image, student_image = traces(tiny_model)
    for _, value in teacher_trace:
        assert not value.requires_grad
    loss = irm_kd_loss(teacher_trace, student_trace, m, image, student_image,
                       DistillConfig(granularity='Layer'))
    assert loss.requires_grad
    loss.backward()
    assert float(tiny_model.transformer.source_embedding.grad.abs().sum()) > 0.0
    assert math.isfinite(float(loss))
