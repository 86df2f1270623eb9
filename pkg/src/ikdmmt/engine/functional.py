"""Differentiable tensor operations with shape validation.

All operations act on float64 ``torch.Tensor`` values and are differentiated by
torch's reverse-mode autograd. The wrappers add the validation the rest of the
package relies on: shape mismatches raise :class:`DimensionError` naming both
shapes and out-of-range ids raise :class:`VocabularyIndexError`.
"""

import logging
from typing import Optional, Sequence

import torch

from ..errors import DimensionError, VocabularyIndexError

LOG = logging.getLogger(__name__)

DTYPE = torch.float64


def _shape(x):
    return tuple(x.shape)


def _broadcast_check(a, b, op_name):
    try:
        torch.broadcast_shapes(a.shape, b.shape)
    except RuntimeError as e:
        raise DimensionError('{}: shapes {} and {} do not broadcast'.format(
            op_name, _shape(a), _shape(b))) from e


def add(a, b):
    _broadcast_check(a, b, 'add')
    return a + b


def sub(a, b):
    _broadcast_check(a, b, 'sub')
    return a - b


def mul(a, b):
    _broadcast_check(a, b, 'mul')
    return a * b


def relu(x):
    return torch.nn.functional.relu(x)


def matmul(a, b):
    """Matrix product over the last two axes.

    >>> matmul(torch.tensor([[1.0, 2.0]]), torch.tensor([[3.0], [4.0]]))
    tensor([[11.]])
    """
    if a.dim() < 2 or b.dim() < 2:
        raise DimensionError('matmul: expected matrices, got {} and {}'.format(
            _shape(a), _shape(b)))
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError('matmul: inner dimensions of {} and {} disagree'.format(
            _shape(a), _shape(b)))
    return torch.matmul(a, b)


def softmax(x, axis=-1):
    if not -x.dim() <= axis < x.dim():
        raise DimensionError('softmax: axis {} invalid for shape {}'.format(axis, _shape(x)))
    # torch subtracts the running max internally
    return torch.softmax(x, dim=axis)


def layer_norm(x, gain=None, bias=None, eps=1e-12):
    """Normalize the last axis to zero mean and unit variance, then scale and shift."""
    width = x.shape[-1]
    for name, p in (('gain', gain), ('bias', bias)):
        if p is not None and _shape(p) != (width,):
            raise DimensionError('layer_norm: {} shape {} does not match input {}'.format(
                name, _shape(p), _shape(x)))
    return torch.nn.functional.layer_norm(x, (width,), weight=gain, bias=bias, eps=eps)


def conv2d(x, weight, bias=None, *, stride=1, padding=0):
    """Cross-correlation (no kernel flip) of an N x C x H x W input."""
    if x.dim() != 4 or weight.dim() != 4:
        raise DimensionError('conv2d: expected 4d input and weight, got {} and {}'.format(
            _shape(x), _shape(weight)))
    if x.shape[1] != weight.shape[1]:
        raise DimensionError('conv2d: input channels of {} do not match weight {}'.format(
            _shape(x), _shape(weight)))
    kernel_h, kernel_w = weight.shape[2:]
    if kernel_h > x.shape[2] + 2 * padding or kernel_w > x.shape[3] + 2 * padding:
        raise DimensionError('conv2d: kernel {} larger than padded input {} (padding {})'.format(
            _shape(weight), _shape(x), padding))
    return torch.nn.functional.conv2d(x, weight, bias, stride=stride, padding=padding)


def conv_output_size(size, kernel_size, stride=1, padding=0):
    return (size + 2 * padding - kernel_size) // stride + 1


def avg_pool2d(x, factor):
    if x.dim() != 4:
        raise DimensionError('avg_pool2d: expected 4d input, got {}'.format(_shape(x)))
    if x.shape[2] % factor or x.shape[3] % factor:
        raise DimensionError('avg_pool2d: spatial size of {} not divisible by {}'.format(
            _shape(x), factor))
    return torch.nn.functional.avg_pool2d(x, factor)


def avg_unpool2d(x, factor):
    """Replicate every cell into a factor x factor block.

    This is the exact right inverse of :func:`avg_pool2d`.

    >>> avg_unpool2d(torch.tensor([[[[5.0]]]]), 2)
    tensor([[[[5., 5.],
              [5., 5.]]]])
    """
    if factor < 1:
        raise DimensionError('avg_unpool2d: factor must be >= 1, got {}'.format(factor))
    if x.dim() != 4:
        raise DimensionError('avg_unpool2d: expected 4d input, got {}'.format(_shape(x)))
    return x.repeat_interleave(factor, dim=2).repeat_interleave(factor, dim=3)


def upsample_nearest(x, factor):
    """Index-free stand-in for max unpooling."""
    if x.dim() != 4:
        raise DimensionError('upsample_nearest: expected 4d input, got {}'.format(_shape(x)))
    return torch.nn.functional.interpolate(x, scale_factor=factor, mode='nearest')


def _check_ids(ids, n_entries, op_name):
    if ids.numel() and (int(ids.min()) < 0 or int(ids.max()) >= n_entries):
        raise VocabularyIndexError('{}: ids in [{}, {}] outside of [0, {})'.format(
            op_name, int(ids.min()), int(ids.max()), n_entries))


def embedding_lookup(table, ids):
    _check_ids(ids, table.shape[0], 'embedding_lookup')
    return torch.nn.functional.embedding(ids, table)


def cross_entropy(logits, target, *, ignore_index: Optional[int] = None, reduction='sum'):
    """Negative log-likelihood of target ids under softmax(logits).

    ``logits`` is ``[..., V]`` and ``target`` the matching ``[...]`` id tensor.
    Targets equal to ``ignore_index`` contribute nothing.
    """
    if _shape(logits)[:-1] != _shape(target):
        raise DimensionError('cross_entropy: logits {} and targets {} disagree'.format(
            _shape(logits), _shape(target)))
    valid = target if ignore_index is None else target[target != ignore_index]
    _check_ids(valid, logits.shape[-1], 'cross_entropy')
    return torch.nn.functional.cross_entropy(
        logits.reshape(-1, logits.shape[-1]),
        target.reshape(-1),
        ignore_index=-100 if ignore_index is None else ignore_index,
        reduction=reduction,
    )


def concat(tensors: Sequence[torch.Tensor], axis=0):
    axis %= tensors[0].dim()
    off_axis = {_shape(t)[:axis] + _shape(t)[axis + 1:] for t in tensors}
    if len(off_axis) > 1:
        raise DimensionError('concat: shapes {} disagree off axis {}'.format(
            [_shape(t) for t in tensors], axis))
    return torch.cat(list(tensors), dim=axis)
