"""Inter-modal and intra-modal inversion distillation losses.

Teacher representations of the real image are targets and carry no gradient.
Student-path representations (the generated feature and the student stages)
carry gradients into the student, the generator and the embeddings. For the
intra-modal loss the reconstructed image passes through the frozen teacher so
gradients reach the student through the teacher's computation.
"""

import logging
from typing import List, Sequence, Tuple

import torch

from ...config import DistillConfig
from ...errors import ConfigurationError, DimensionError
from ..trace import ActivationTrace

LOG = logging.getLogger(__name__)

EPS_NORM = 1e-12
EPS_PROB = 1e-12


def similarity(a, b, kind='L2') -> torch.Tensor:
    """Discrepancy of two same-shape tensors, compared as flat vectors.

    >>> float(similarity(torch.tensor([1.0, 0.0]), torch.tensor([0.0, 0.0]), 'L2'))
    1.0
    """
    if a.shape != b.shape:
        raise DimensionError('similarity: shapes {} and {} differ'.format(
            tuple(a.shape), tuple(b.shape)))
    a = a.reshape(-1)
    b = b.reshape(-1)

    if kind == 'L2':
        return torch.linalg.vector_norm(a - b, ord=2)
    if kind == 'L1':
        return torch.linalg.vector_norm(a - b, ord=1)
    if kind == 'Linf':
        return torch.linalg.vector_norm(a - b, ord=float('inf'))
    if kind == 'Cosine':
        norm_a = torch.linalg.vector_norm(a)
        norm_b = torch.linalg.vector_norm(b)
        if float(norm_a) < EPS_NORM or float(norm_b) < EPS_NORM:
            return (a * 0.0).sum()
        return 1.0 - torch.dot(a, b) / (norm_a * norm_b)
    if kind == 'KL':
        p = torch.softmax(a, dim=0).clamp(min=EPS_PROB)
        q = torch.softmax(b, dim=0).clamp(min=EPS_PROB)
        return (p * torch.log(p / q)).sum()
    raise ConfigurationError('unknown similarity {}'.format(kind))


def batch_similarity(a, b, kind='L2') -> torch.Tensor:
    """Sum of per-example similarities over the leading batch axis."""
    if a.shape != b.shape:
        raise DimensionError('similarity: shapes {} and {} differ'.format(
            tuple(a.shape), tuple(b.shape)))
    return torch.stack([similarity(a_i, b_i, kind) for a_i, b_i in zip(a, b)]).sum()


def image_space_loss(real, reconstructed) -> torch.Tensor:
    """||I_r - I_s||_2 summed over the batch, always L2."""
    return batch_similarity(real, reconstructed, 'L2')


def _candidates(trace: ActivationTrace, granularity: str):
    if granularity == 'Block':
        return trace.blocks()
    if granularity == 'Layer':
        return trace.layers()
    raise ConfigurationError('unknown granularity {}'.format(granularity))


def _match(teacher_entries, student_entries) -> List[Tuple[torch.Tensor, torch.Tensor]]:
    """Pair every teacher entry with an unused student entry of identical shape.

    Teacher entries are visited deepest first and student entries in their
    (coarse to fine) execution order, so the mirror image of each teacher
    stage is found first.
    """
    used = set()
    pairs = []
    for t_name, t_value in reversed(teacher_entries):
        for s_i, (_, s_value) in enumerate(student_entries):
            if s_i not in used and s_value.shape[1:] == t_value.shape[1:]:
                used.add(s_i)
                pairs.append((t_value, s_value))
                break
        else:
            raise ConfigurationError(
                'no student representation matches teacher stage {} of shape {}'.format(
                    t_name, tuple(t_value.shape[1:])))
    return pairs


def pair_representations(teacher_trace: ActivationTrace, student_trace: ActivationTrace,
                         m, granularity='Model') -> List[Tuple[torch.Tensor, torch.Tensor]]:
    """(teacher, student-path) representation pairs of identical shape.

    At ``Model`` granularity the only pair is the teacher's last activation and
    the generated feature ``m``.
    """
    if granularity == 'Model':
        _, last = teacher_trace.last
        if last.shape[1:] != m.shape[1:]:
            raise ConfigurationError('teacher last activation {} does not match m {}'.format(
                tuple(last.shape[1:]), tuple(m.shape[1:])))
        return [(last, m)]

    student_entries = [('m', m)] + _candidates(student_trace, granularity)
    return _match(_candidates(teacher_trace, granularity), student_entries)


def select_representations(trace: ActivationTrace, granularity='Model') -> List[torch.Tensor]:
    if granularity == 'Model':
        return [trace.last[1]]
    return [v for _, v in _candidates(trace, granularity)]


def sum_pairs(pairs: Sequence[Tuple[torch.Tensor, torch.Tensor]], kind) -> torch.Tensor:
    return torch.stack([batch_similarity(t, s, kind) for t, s in pairs]).sum()


def irm_kd_loss(teacher_trace: ActivationTrace, student_trace: ActivationTrace, m,
                real_image, student_image, config: DistillConfig) -> torch.Tensor:
    loss = image_space_loss(real_image, student_image)
    if config.image_space_only:
        return loss
    pairs = pair_representations(teacher_trace, student_trace, m, config.granularity)
    pairs = [(t.detach(), s) for t, s in pairs]
    return sum_pairs(pairs, config.similarity) + loss


def iam_kd_loss(real_image, student_image, teacher, config: DistillConfig, *,
                teacher_trace: ActivationTrace = None) -> torch.Tensor:
    loss = image_space_loss(real_image, student_image)
    if config.image_space_only:
        return loss
    if teacher_trace is None:
        with torch.no_grad():
            teacher_trace = teacher(real_image)
    # pseudo visual representations of the reconstruction
    pseudo_trace = teacher(student_image)
    pairs = list(zip(
        (t.detach() for t in select_representations(teacher_trace, config.granularity)),
        select_representations(pseudo_trace, config.granularity),
    ))
    return sum_pairs(pairs, config.similarity) + loss
