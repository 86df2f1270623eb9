"""Export encoder attention of token and region rows over the source tokens as json."""

import argparse
import logging

from . import analysis
from .data.corpus import read_lines, source_examples
from .manifest import RunManifest, output_directory
from .translator import load_model

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'attention', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--checkpoint', required=True, help='checkpoint directory')
    parser.add_argument('--src', required=True, help='source sentences, one per line')
    parser.add_argument('--out', required=True, help='output json file')
    parser.add_argument('--n', type=int, default=None, help='only the first n sentences')
    parser.add_argument('--vocab', default=None,
                        help='vocabulary file (default: vocab.txt beside the checkpoint)')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    manifest = RunManifest('attention', inputs={'checkpoint': args.checkpoint, 'src': args.src},
                           outputs={'attention': args.out}, seed=args.seed)
    model, vocab = load_model(args.checkpoint, vocab_path=args.vocab)
    lines = read_lines(args.src)
    if args.n is not None:
        lines = lines[:args.n]
    records = analysis.export_attention(model, source_examples(lines, vocab), args.out,
                                        vocab=vocab)
    manifest.write(output_directory(args.out))
    LOG.info({'type': 'attention', 'n_sentences': len(lines), 'n_records': len(records)})
    return 0
