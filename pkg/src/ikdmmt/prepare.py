"""Write a corpus and its vocabulary, synthetic or from parallel text files."""

import argparse
import logging
import os

from .data import synthetic
from .data.corpus import load_image, read_lines, tokenize, write_corpus
from .data.vocab import Vocabulary
from .errors import AlignmentError
from .manifest import RunManifest, output_directory

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'prepare', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    mode = parser.add_mutually_exclusive_group(required=True)
    mode.add_argument('--synthetic', type=int, metavar='N',
                      help='generate N synthetic disambiguation triplets')
    mode.add_argument('--src', help='source sentences, one per line')
    parser.add_argument('--tgt', help='target sentences aligned with --src')
    parser.add_argument('--images', help='directory of {index}.tnsr images aligned with --src')
    parser.add_argument('--holdout', type=int, default=0, metavar='M',
                        help='with --synthetic, also write M held-out triplets to <out>.test')
    parser.add_argument('--ambiguity-rate', type=float, default=1.0,
                        help='with --synthetic, fraction of sentences with an ambiguous word')
    parser.add_argument('--image-size', type=int, default=32,
                        help='with --synthetic, side length of the rendered images')
    parser.add_argument('--out', default='data/train',
                        help='output prefix for .src, .tgt and _images/')
    parser.add_argument('--vocab-out', default=None,
                        help='vocabulary file (default: <out directory>/vocab.txt)')
    parser.set_defaults(command=main, parser=parser)
    return parser


def prepare_synthetic(args):
    corpus = synthetic.synth_generate(args.synthetic + args.holdout, seed=args.seed or 0,
                                      ambiguity_rate=args.ambiguity_rate,
                                      image_size=args.image_size)
    n = args.synthetic
    write_corpus(args.out, corpus.sources[:n], corpus.targets[:n], corpus.images[:n])
    outputs = {'corpus': args.out}
    if args.holdout:
        write_corpus(args.out + '.test', corpus.sources[n:], corpus.targets[n:],
                     corpus.images[n:])
        outputs['holdout'] = args.out + '.test'
    return corpus.sources, corpus.targets, outputs


def prepare_files(args):
    sources = read_lines(args.src)
    targets = read_lines(args.tgt)
    if len(sources) != len(targets):
        raise AlignmentError('{} has {} lines but {} has {} lines'.format(
            args.src, len(sources), args.tgt, len(targets)))
    images = None
    if args.images is not None:
        images = [load_image(os.path.join(args.images, '{}.tnsr'.format(i)))
                  for i in range(len(sources))]
    sources = [' '.join(tokenize(s)) for s in sources]
    targets = [' '.join(tokenize(t)) for t in targets]
    write_corpus(args.out, sources, targets, images)
    return sources, targets, {'corpus': args.out}


def main(args: argparse.Namespace) -> int:
    if args.src is not None and args.tgt is None:
        args.parser.error('--src requires --tgt')
    if args.synthetic is not None and (args.tgt or args.images):
        args.parser.error('--synthetic conflicts with --tgt and --images')
    if args.synthetic is not None and args.synthetic < 1:
        args.parser.error('--synthetic needs a positive count')
    if args.synthetic is None and args.holdout:
        args.parser.error('--holdout requires --synthetic')

    manifest = RunManifest('prepare', seed=args.seed, inputs={
        'src': args.src, 'tgt': args.tgt, 'images': args.images})
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    if args.synthetic is not None:
        sources, targets, outputs = prepare_synthetic(args)
    else:
        sources, targets, outputs = prepare_files(args)

    vocab = Vocabulary.build(tokenize(line) for line in list(sources) + list(targets))
    vocab_out = args.vocab_out or os.path.join(out_dir, 'vocab.txt')
    vocab.write(vocab_out)
    outputs['vocab'] = vocab_out

    manifest.outputs = outputs
    manifest.write(output_directory(out_dir))
    LOG.info({'type': 'prepare', 'n_examples': len(sources), 'vocab_size': len(vocab),
              'outputs': outputs})
    return 0
