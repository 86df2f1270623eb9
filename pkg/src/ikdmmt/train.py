"""Train the image-free translation model with inverse knowledge distillation."""

import argparse
import logging
import os
import shutil

from . import logger
from .checkpoint import load_checkpoint, restore
from .config import ExperimentConfig
from .data.corpus import load_prefix
from .data.vocab import Vocabulary
from .manifest import RunManifest
from .network.factory import factory
from .network.losses.joint import JointLoss
from .network.trainer import CHECKPOINT_NAME, Trainer
from .optimize import factory_optimizer
from .translator import VOCAB_FILE

LOG = logging.getLogger(__name__)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'train', parents=parents, help=__doc__, description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--config', default=None,
                        help='json config overlay; missing fields keep their defaults')
    parser.add_argument('--train', required=True,
                        help='corpus prefix with .src and .tgt files')
    parser.add_argument('--images', default=None,
                        help='image directory aligned with the corpus (default: <train>_images)')
    parser.add_argument('--vocab', required=True, help='vocabulary file')
    parser.add_argument('--out', required=True, help='output directory')
    parser.add_argument('--epochs', type=int, default=None, help='override train.epochs')
    parser.add_argument('--max-steps', type=int, default=None, help='override train.max_steps')
    parser.add_argument('--resume', default=None, help='checkpoint directory to resume from')
    Trainer.cli(parser)
    parser.set_defaults(command=main)
    return parser


def resolve_config(args, vocab: Vocabulary) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    overlay = {'model.vocab_size': len(vocab)}
    if args.seed is not None:
        overlay['train.seed'] = args.seed
    if args.epochs is not None:
        overlay['train.epochs'] = args.epochs
    if args.max_steps is not None:
        overlay['train.max_steps'] = args.max_steps
    return config.overlay(overlay)


def main(args: argparse.Namespace) -> int:
    Trainer.configure(args)
    handler = logger.train_configure(args.out, args)
    try:
        return run(args)
    finally:
        logging.getLogger('ikdmmt').removeHandler(handler)
        handler.close()


def run(args: argparse.Namespace) -> int:
    manifest = RunManifest('train', inputs={
        'train': args.train, 'images': args.images, 'vocab': args.vocab,
        'config': args.config, 'resume': args.resume})
    vocab = Vocabulary.read(args.vocab)
    config = resolve_config(args, vocab)
    manifest.config = config.to_dict()
    manifest.seed = config.train.seed
    examples = load_prefix(args.train, vocab, image_dir=args.images,
                           require_images=config.distill.enabled,
                           image_size=config.model.image_size)

    model = factory(config.model, seed=config.train.seed)
    loss = JointLoss.from_config(config.distill, config.train)
    optimizer = factory_optimizer(config.train, model)

    start_step, stats = 0, None
    if args.resume:
        checkpoint = load_checkpoint(args.resume)
        restore(checkpoint, model, optimizer, config=config)
        start_step = checkpoint.step
        stats = checkpoint.stats.get('running')

    vocab_copy = os.path.join(args.out, VOCAB_FILE)
    if os.path.abspath(args.vocab) != os.path.abspath(vocab_copy):
        shutil.copyfile(args.vocab, vocab_copy)
    trainer = Trainer(model, loss, optimizer, args.out, config=config, stats=stats)
    history = trainer.loop(examples, start_step=start_step)

    manifest.outputs = {'checkpoint': os.path.join(args.out, CHECKPOINT_NAME),
                        'metrics': os.path.join(args.out, logger.METRICS_FILE)}
    manifest.write(args.out)
    LOG.info({'type': 'train-done', 'steps': history[-1]['step'] if history else start_step,
              'final': history[-1] if history else None})
    return 0
