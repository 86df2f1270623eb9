"""Score translations with BLEU, or measure the BLEU drop under source degradation."""

import argparse
import json
import logging
import os

import torch

from . import analysis
from .data.corpus import load_prefix, read_lines
from .data.synthetic import MASK_SETS
from .errors import AlignmentError, ContractError
from .manifest import RunManifest, output_directory
from .metric.accuracy import AmbiguousAccuracy
from .metric.bleu import Bleu
from .translator import load_model

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'evaluate', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    group = parser.add_argument_group('translations')
    group.add_argument('--hyp', help='hypotheses, one per line')
    group.add_argument('--ref', help='references aligned with --hyp')
    group.add_argument('--src', default=None,
                       help='sources aligned with --hyp, adds ambiguous-word accuracy')

    group = parser.add_argument_group('degradation')
    group.add_argument('--checkpoint', help='checkpoint directory')
    group.add_argument('--corpus', help='corpus prefix with .src and .tgt files')
    group.add_argument('--mask', default='colors',
                       help='mask set: {} or a file with one token per line'.format(
                           ' or '.join(sorted(MASK_SETS))))
    group.add_argument('--mode', default='zero-shot', choices=analysis.DEGRADATION_MODES,
                       help='whether the model was trained on masked sources')
    group.add_argument('--beam', type=int, default=1, help='beam size')
    group.add_argument('--vocab', default=None,
                       help='vocabulary file (default: vocab.txt beside the checkpoint)')

    parser.add_argument('--out', default=None, help='json report file')
    parser.set_defaults(command=main, parser=parser)
    return parser


def mask_set(name):
    if name in MASK_SETS:
        return MASK_SETS[name]
    if not os.path.isfile(name):
        raise ContractError('mask set {} is neither {} nor a file'.format(
            name, ' nor '.join(sorted(MASK_SETS))))
    return [line.strip() for line in read_lines(name) if line.strip()]


def evaluate_translations(args):
    hypotheses = read_lines(args.hyp)
    references = read_lines(args.ref)
    sources = read_lines(args.src) if args.src is not None else None
    if len(hypotheses) != len(references) or (sources is not None and len(sources) != len(hypotheses)):
        raise AlignmentError('{} hypotheses, {} references and {} sources'.format(
            len(hypotheses), len(references), 'no' if sources is None else len(sources)))

    bleu = Bleu()
    metrics = [bleu]
    if sources is not None:
        accuracy = AmbiguousAccuracy()
        metrics.append(accuracy)
    for hypothesis, reference, source in zip(hypotheses, references, sources or [None] * len(hypotheses)):
        for metric in metrics:
            metric.accumulate(hypothesis, reference, source=source)

    report = bleu.report()
    data = {'bleu': report.json_data()}
    print(report.text())
    if sources is not None:
        data['ambiguous_accuracy'] = accuracy.value
        print('ambiguous accuracy = {:.4f}'.format(accuracy.value))
    return data


def evaluate_degradation(args):
    model, vocab = load_model(args.checkpoint, vocab_path=args.vocab)
    examples = load_prefix(args.corpus, vocab, image_dir=None)
    with torch.no_grad():
        report = analysis.degradation_eval(model, examples, mask_set(args.mask), vocab,
                                           mode=args.mode, beam=args.beam)
    print('clean  {}'.format(report.clean.text()))
    print('masked {}'.format(report.masked.text()))
    print('drop = {:.2f}, masked fraction = {:.4f}, mode = {}'.format(
        report.drop, report.masked_fraction, report.mode))
    return report.json_data()


def main(args: argparse.Namespace) -> int:
    translations = args.hyp is not None or args.ref is not None
    degradation = args.checkpoint is not None or args.corpus is not None
    if translations == degradation:
        args.parser.error('give either --hyp and --ref, or --checkpoint and --corpus')
    if translations and (args.hyp is None or args.ref is None):
        args.parser.error('--hyp and --ref go together')
    if degradation and (args.checkpoint is None or args.corpus is None):
        args.parser.error('--checkpoint and --corpus go together')

    manifest = RunManifest(
        'evaluate', seed=args.seed,
        inputs={k: getattr(args, k) for k in ('hyp', 'ref', 'src', 'checkpoint', 'corpus', 'mask', 'vocab')})
    data = evaluate_translations(args) if translations else evaluate_degradation(args)
    LOG.info({'type': 'evaluate', **data})
    if args.out is not None:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, 'w', encoding='utf8') as f:
            json.dump(data, f, indent=2, sort_keys=True)
        manifest.outputs = {'report': args.out}
        manifest.write(output_directory(args.out))
    return 0
