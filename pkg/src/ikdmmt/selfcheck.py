"""Finite-difference checks of every differentiable operation and of the joint loss."""

import argparse
import json
import logging
import sys
import time
from typing import Callable, List, Tuple

import torch

from .config import DistillConfig, ModelConfig
from .data.batch import collate_triplets
from .data.corpus import TripletExample
from .engine import DTYPE, functional
from .engine.gradcheck import GradCheckReport, grad_check, grad_check_parameters
from .network.attention import MultiHeadAttention
from .network.factory import factory
from .network.losses.distill import similarity
from .network.losses.joint import JointLoss

LOG = logging.getLogger(__name__)

OP_TOL = 1e-4
END_TO_END_TOL = 1e-3


def _randn(generator, *shape):
    return torch.randn(*shape, generator=generator, dtype=DTYPE)


def _away_from_zero(x, margin=0.1):
    return x + margin * torch.sign(x)


def _weighted(op, weights):
    """Scalar projection ``sum(op(x) * weights)`` of a tensor-valued op."""
    def f(x):
        return (op(x) * weights).sum()
    return f


def op_checks(seed=0) -> List[Tuple[str, Callable, torch.Tensor]]:
    g = torch.Generator().manual_seed(seed)
    a = _randn(g, 3, 4)
    b = _randn(g, 3, 4)
    w34 = _randn(g, 3, 4)
    m45 = _randn(g, 4, 5)
    w35 = _randn(g, 3, 5)
    gain = _randn(g, 4)
    bias = _randn(g, 4)
    image = _randn(g, 2, 3, 6, 6)
    kernel = _randn(g, 4, 3, 3, 3)
    w_conv = _randn(g, 2, 4, 3, 3)
    w_pool = _randn(g, 2, 3, 3, 3)
    small = _randn(g, 2, 3, 2, 2)
    w_unpool = _randn(g, 2, 3, 4, 4)
    table = _randn(g, 6, 4)
    ids = torch.tensor([[1, 5, 0], [2, 2, 3]])
    w_lookup = _randn(g, 2, 3, 4)
    logits = _randn(g, 2, 3, 6)
    targets = torch.tensor([[1, 0, 4], [5, 2, 0]])
    c = _randn(g, 2, 4)
    w_concat = _randn(g, 5, 4)
    attention = MultiHeadAttention(4, 2).to(DTYPE)
    attention.requires_grad_(False)
    query = _randn(g, 2, 5, 4)
    keys = _randn(g, 2, 3, 4)
    w_attention = _randn(g, 2, 5, 4)

    checks = [
        ('add', _weighted(lambda x: functional.add(x, b), w34), a),
        ('sub', _weighted(lambda x: functional.sub(b, x), w34), a),
        ('mul', _weighted(lambda x: functional.mul(x, b), w34), a),
        ('relu', _weighted(functional.relu, w34), _away_from_zero(a)),
        ('matmul', _weighted(lambda x: functional.matmul(x, m45), w35), a),
        ('softmax', _weighted(lambda x: functional.softmax(x, axis=-1), w34), a),
        ('layer_norm', _weighted(lambda x: functional.layer_norm(x, gain, bias), w34), a),
        ('layer_norm.gain', _weighted(lambda x: functional.layer_norm(a, x, bias), w34), gain),
        ('conv2d', _weighted(lambda x: functional.conv2d(x, kernel, stride=2, padding=1), w_conv),
         image),
        ('conv2d.weight', _weighted(lambda x: functional.conv2d(image, x, stride=2, padding=1),
                                    w_conv), kernel),
        ('avg_pool2d', _weighted(lambda x: functional.avg_pool2d(x, 2), w_pool), image),
        ('avg_unpool2d', _weighted(lambda x: functional.avg_unpool2d(x, 2), w_unpool), small),
        ('upsample_nearest', _weighted(lambda x: functional.upsample_nearest(x, 2), w_unpool),
         small),
        ('embedding_lookup', _weighted(lambda x: functional.embedding_lookup(x, ids), w_lookup),
         table),
        ('cross_entropy', lambda x: functional.cross_entropy(x, targets, ignore_index=0), logits),
        ('concat', _weighted(lambda x: functional.concat([x, a], axis=0), w_concat), c),
        ('attention', _weighted(lambda x: attention(x, keys)[0], w_attention), query),
    ]
    for kind in ('L2', 'L1', 'Linf', 'Cosine', 'KL'):
        checks.append(('similarity.' + kind, lambda x, kind=kind: similarity(x, b, kind), a))
    return checks


def end_to_end_fixture(seed=0):
    """A tiny model and a two-example batch."""
    config = ModelConfig(vocab_size=12, d_model=8, n_heads=2,
                         n_encoder_layers=1, n_decoder_layers=1, ffn_dim=16,
                         image_size=16, stem_channels=8, stage_channels=[8, 16])
    model = factory(config, seed=seed)
    g = torch.Generator().manual_seed(seed)
    examples = [
        TripletExample([5, 6, 7], [2, 8, 9, 3], torch.rand(3, 16, 16, generator=g, dtype=DTYPE)),
        TripletExample([7, 10], [2, 11, 3], torch.rand(3, 16, 16, generator=g, dtype=DTYPE)),
    ]
    return model, collate_triplets(examples)


def suite(seed=0) -> List[GradCheckReport]:
    reports = [grad_check(f, x, name=name, tol=OP_TOL) for name, f, x in op_checks(seed)]

    model, batch = end_to_end_fixture(seed)
    loss = JointLoss(DistillConfig())
    reports.append(grad_check_parameters(
        lambda: loss(model, batch)[0], model.named_parameters(),
        n_samples=20, seed=seed, tol=END_TO_END_TOL, name='joint loss'))
    return reports


def table(reports: List[GradCheckReport]) -> str:
    width = max(len(r.name) for r in reports)
    lines = ['{:<{w}s} {:>12s} {:>8s} {:>6s}'.format('check', 'rel. error', 'tol', 'result',
                                                    w=width)]
    for r in reports:
        lines.append('{:<{w}s} {:12.3e} {:8.0e} {:>6s}'.format(
            r.name, r.max_rel_error, r.tol, 'pass' if r.passed else 'FAIL', w=width))
    return '\n'.join(lines)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'gradcheck', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--json', default=False, action='store_true',
                        help='print the reports as json')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    start = time.time()
    reports = suite(seed=args.seed or 0)
    if args.json:
        print(json.dumps([r.json_data() for r in reports], indent=2))
    else:
        print(table(reports))
    n_failed = sum(not r.passed for r in reports)
    LOG.info({'type': 'gradcheck', 'n_checks': len(reports), 'n_failed': n_failed,
              'time': round(time.time() - start, 1)})
    if n_failed:
        print('{} of {} gradient checks failed'.format(n_failed, len(reports)), file=sys.stderr)
        return 1
    return 0
