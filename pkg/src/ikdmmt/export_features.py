"""Export generated multimodal features, and teacher features of real images, as TNSR files."""

import argparse
import logging

from . import analysis
from .data.corpus import load_prefix
from .manifest import RunManifest
from .translator import load_model

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'export-features', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--checkpoint', required=True, help='checkpoint directory')
    parser.add_argument('--corpus', required=True, help='corpus prefix')
    parser.add_argument('--out', required=True, help='output directory')
    parser.add_argument('--vocab', default=None,
                        help='vocabulary file (default: vocab.txt beside the checkpoint)')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    manifest = RunManifest('export-features',
                           inputs={'checkpoint': args.checkpoint, 'corpus': args.corpus},
                           seed=args.seed)
    model, vocab = load_model(args.checkpoint, vocab_path=args.vocab)
    examples = load_prefix(args.corpus, vocab, image_size=model.config.image_size)
    written = analysis.export_features(model, examples, args.out)
    manifest.outputs = {name: '{}/{}'.format(args.out, name) for name in written}
    manifest.write(args.out)
    return 0
