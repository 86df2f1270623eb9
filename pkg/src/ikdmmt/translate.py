"""Translate source sentences without images."""

import argparse
import logging
import os

from .data.corpus import read_lines
from .manifest import RunManifest, output_directory
from .translator import Translator

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'translate', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--checkpoint', required=True, help='checkpoint directory')
    parser.add_argument('--src', required=True, help='source sentences, one per line')
    parser.add_argument('--out', required=True, help='output file, one hypothesis per line')
    parser.add_argument('--beam', type=int, default=4, help='beam size, 1 for greedy')
    parser.add_argument('--max-len', type=int, default=None,
                        help='maximum output length (default: 50, at most max_positions)')
    parser.add_argument('--vocab', default=None,
                        help='vocabulary file (default: vocab.txt beside the checkpoint)')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    manifest = RunManifest('translate', outputs={'hypotheses': args.out}, seed=args.seed,
                           inputs={'checkpoint': args.checkpoint, 'src': args.src,
                                   'vocab': args.vocab})
    translator = Translator.from_checkpoint(args.checkpoint, vocab_path=args.vocab,
                                            beam=args.beam, max_len=args.max_len)
    hypotheses = translator.translate_lines(read_lines(args.src))

    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    with open(args.out, 'w', encoding='utf8') as f:
        f.writelines(h + '\n' for h in hypotheses)

    manifest.config = {'beam': translator.beam, 'max_len': translator.max_len}
    manifest.write(output_directory(out_dir))
    LOG.info({'type': 'translate', 'n_sentences': len(hypotheses), 'out': args.out})
    return 0
