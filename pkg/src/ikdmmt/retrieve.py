"""Rank teacher features of real images by cosine similarity to generated features."""

import argparse
import json
import logging
import os

from . import analysis
from .data.corpus import load_prefix
from .engine import tnsr
from .manifest import RunManifest
from .translator import load_model

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'retrieve', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--checkpoint', required=True, help='checkpoint directory')
    parser.add_argument('--corpus', required=True,
                        help='corpus prefix with .src, .tgt and _images/')
    parser.add_argument('--out', required=True, help='output directory')
    parser.add_argument('--ks', type=int, nargs='+', default=[1, 5, 10, 15],
                        help='recall cut-offs')
    parser.add_argument('--vocab', default=None,
                        help='vocabulary file (default: vocab.txt beside the checkpoint)')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    manifest = RunManifest('retrieve', inputs={'checkpoint': args.checkpoint, 'corpus': args.corpus},
                           seed=args.seed)
    model, vocab = load_model(args.checkpoint, vocab_path=args.vocab)
    examples = load_prefix(args.corpus, vocab, require_images=True,
                           image_size=model.config.image_size)
    report, similarities = analysis.image_retrieval(model, examples, args.ks)

    os.makedirs(args.out, exist_ok=True)
    outputs = {
        'json': os.path.join(args.out, 'retrieval.json'),
        'text': os.path.join(args.out, 'retrieval.txt'),
        'cosine': os.path.join(args.out, 'cosine.tnsr'),
    }
    with open(outputs['json'], 'w', encoding='utf8') as f:
        json.dump(report.json_data(), f, indent=2, sort_keys=True)
    with open(outputs['text'], 'w', encoding='utf8') as f:
        f.write(report.text() + '\n')
    tnsr.write(outputs['cosine'], similarities)
    print(report.text())

    manifest.outputs = outputs
    manifest.write(args.out)
    LOG.info({'type': 'retrieve', **report.json_data()})
    return 0
