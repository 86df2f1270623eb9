"""Ablation grid over distillation variants.

Every cell trains one model from the same seed on the same corpus and is
scored by BLEU on held-out data. Rows report the difference to the base row
(L2 similarity, Model granularity, both distillation losses).
"""

import argparse
from dataclasses import asdict, dataclass, field
import json
import logging
import multiprocessing
import os
import sys
from typing import List, Optional, Sequence

from . import logger
from .config import ExperimentConfig
from .data.corpus import TripletExample, load_prefix
from .data.vocab import Vocabulary
from .errors import ConfigurationError, ContractError
from .manifest import RunManifest
from .metric.accuracy import AmbiguousAccuracy
from .metric.bleu import Bleu
from .network.factory import factory
from .network.losses.joint import JointLoss
from .network.trainer import Trainer
from .optimize import factory_optimizer
from .translator import Translator

LOG = logging.getLogger(__name__)

BASE_NAME = 'base'


@dataclass
class GridCell:
    name: str
    overlay: dict = field(default_factory=dict)


SIMILARITY_ROWS = [GridCell('similarity=' + s, {'distill.similarity': s})
                   for s in ('L1', 'Linf', 'Cosine', 'KL')]
GRANULARITY_ROWS = [GridCell('granularity=' + g, {'distill.granularity': g})
                    for g in ('Block', 'Layer')]
BACKBONE_ROWS = [GridCell('backbone=' + b, {'model.backbone': b})
                 for b in ('plain', 'shallow')]
LOSS_ROWS = [
    GridCell('image space loss', {'distill.image_space_only': True, 'distill.enable_iam': False}),
    GridCell('w/o (IrM+IaM)', {'distill.enable_irm': False, 'distill.enable_iam': False}),
    GridCell('w/o IaM', {'distill.enable_iam': False}),
    GridCell('w/o IrM', {'distill.enable_irm': False}),
]


def table_grid(*, backbones=False) -> List[GridCell]:
    """The base row and the similarity, granularity and loss variants.

    With ``backbones`` the two backbone rows are included as well.
    """
    grid = [GridCell(BASE_NAME)] + SIMILARITY_ROWS + GRANULARITY_ROWS
    if backbones:
        grid += BACKBONE_ROWS
    return grid + LOSS_ROWS


def read_grid(path) -> List[GridCell]:
    """A JSON list of ``{"name": ..., "overlay": {...}}`` objects."""
    with open(path, 'r', encoding='utf8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError('{}: {}'.format(path, e)) from e
    if not isinstance(data, list) or not data:
        raise ConfigurationError('{}: grid must be a non-empty list of cells'.format(path))
    grid = []
    for i, cell in enumerate(data):
        if not isinstance(cell, dict) or 'name' not in cell:
            raise ConfigurationError('{}: cell {} needs a name'.format(path, i))
        grid.append(GridCell(cell['name'], cell.get('overlay', {})))
    names = [c.name for c in grid]
    if len(set(names)) != len(names):
        raise ConfigurationError('{}: duplicate cell names'.format(path))
    return grid


@dataclass
class AblationRow:
    name: str
    overlay: dict
    bleu: Optional[float] = None
    delta: Optional[float] = None
    ambiguous_accuracy: Optional[float] = None
    #: largest logged value per distillation component
    kd_max: dict = field(default_factory=dict)
    final_loss: Optional[float] = None
    error: Optional[str] = None


@dataclass
class AblationTable:
    rows: List[AblationRow]
    base: str

    def json_data(self):
        return {'base': self.base, 'rows': [asdict(r) for r in self.rows]}

    def text(self):
        width = max(len(r.name) for r in self.rows)
        lines = ['{:<{w}s} {:>8s} {:>8s} {:>8s}  {}'.format(
            'row', 'BLEU', 'delta', 'amb.acc', 'error', w=width)]
        for r in self.rows:
            lines.append('{:<{w}s} {:>8s} {:>8s} {:>8s}  {}'.format(
                r.name,
                '-' if r.bleu is None else '{:.2f}'.format(r.bleu),
                '-' if r.delta is None else '{:+.2f}'.format(r.delta),
                '-' if r.ambiguous_accuracy is None else '{:.3f}'.format(r.ambiguous_accuracy),
                r.error or '',
                w=width,
            ))
        return '\n'.join(lines)


class DummyPool():
    @staticmethod
    def starmap(f, iterable):
        return [f(*i) for i in iterable]


def run_cell(cell: GridCell, base_config: ExperimentConfig,
             train_examples: Sequence[TripletExample], test_examples: Sequence[TripletExample],
             vocab: Vocabulary, out_dir: Optional[str]) -> AblationRow:
    row = AblationRow(cell.name, cell.overlay)
    try:
        config = base_config.overlay(cell.overlay)
        model = factory(config.model, seed=config.train.seed)
        loss = JointLoss.from_config(config.distill, config.train)
        optimizer = factory_optimizer(config.train, model)
        cell_out = None
        if out_dir is not None:
            cell_out = os.path.join(out_dir, cell.name.replace('/', '_').replace(' ', '_'))
        history = Trainer(model, loss, optimizer, cell_out, config=config).loop(train_examples)

        translator = Translator(model, vocab)
        references = [' '.join(vocab.decode(e.target)) for e in test_examples]
        hypotheses = [' '.join(vocab.decode(translator.translate_ids(e.source)))
                      for e in test_examples]
        bleu, accuracy = Bleu(), AmbiguousAccuracy()
        for example, hypothesis, reference in zip(test_examples, hypotheses, references):
            source = ' '.join(vocab.decode(example.source))
            for metric in (bleu, accuracy):
                metric.accumulate(hypothesis, reference, source=source)

        row.bleu = bleu.report().score
        row.ambiguous_accuracy = accuracy.value
        row.kd_max = {k: max(h[k] for h in history) for k in ('Loss_IrM', 'Loss_IaM')}
        row.final_loss = history[-1]['total']
    except Exception as e:  # pylint: disable=broad-except
        LOG.exception('ablation cell %s failed', cell.name)
        row.error = '{}: {}'.format(type(e).__name__, e)
    LOG.info({'type': 'ablation-cell', **asdict(row)})
    return row


def ablate(grid: Sequence[GridCell], base_config: ExperimentConfig,
           train_examples: Sequence[TripletExample], test_examples: Sequence[TripletExample],
           vocab: Vocabulary, *,
           out_dir: Optional[str] = None, jobs=0) -> AblationTable:
    """Train and score every cell; rows keep grid order whatever ``jobs`` is."""
    if not grid:
        raise ContractError('empty ablation grid')

    pool = DummyPool()
    if jobs:
        LOG.info('creating ablation worker pool with %d workers', jobs)
        assert not sys.platform.startswith('win'), 'not supported, use --jobs=0 on windows'
        pool = multiprocessing.get_context('fork').Pool(jobs)
    try:
        rows = pool.starmap(run_cell, [
            (cell, base_config, train_examples, test_examples, vocab, out_dir)
            for cell in grid
        ])
    finally:
        if jobs:
            pool.close()

    base_rows = [r for r in rows if r.name == BASE_NAME] or rows[:1]
    base = base_rows[0]
    for row in rows:
        if row.bleu is not None and base.bleu is not None:
            row.delta = round(row.bleu - base.bleu, 2)
    return AblationTable(rows, base.name)


def cli(subparsers, parents):
    parser = subparsers.add_parser(
        'ablate', parents=parents, help='train and score an ablation grid',
        description=__doc__,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument('--grid', default=None,
                        help='json grid file (default: the base, similarity, granularity '
                             'and loss rows)')
    parser.add_argument('--full', default=False, action='store_true',
                        help='add the backbone rows to the default grid')
    parser.add_argument('--config', default=None, help='json config overlay for the base row')
    parser.add_argument('--train', required=True, help='training corpus prefix')
    parser.add_argument('--test', required=True, help='held-out corpus prefix')
    parser.add_argument('--vocab', required=True, help='vocabulary file')
    parser.add_argument('--out', required=True, help='output directory')
    parser.add_argument('--jobs', type=int, default=0,
                        help='worker processes, 0 trains cells in this process')
    parser.set_defaults(command=main)
    return parser


def main(args: argparse.Namespace) -> int:
    manifest = RunManifest('ablate', inputs={'train': args.train, 'test': args.test, 'vocab': args.vocab,
                                             'grid': args.grid, 'config': args.config})
    handler = logger.train_configure(args.out, args)
    try:
        vocab = Vocabulary.read(args.vocab)
        config = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
        overlay = {'model.vocab_size': len(vocab)}
        if args.seed is not None:
            overlay['train.seed'] = args.seed
        config = config.overlay(overlay)
        grid = read_grid(args.grid) if args.grid else table_grid(backbones=args.full)

        train_examples = load_prefix(args.train, vocab, require_images=True,
                                     image_size=config.model.image_size)
        test_examples = load_prefix(args.test, vocab, image_size=config.model.image_size)
        table = ablate(grid, config, train_examples, test_examples, vocab,
                       out_dir=args.out, jobs=args.jobs)

        outputs = {
            'json': os.path.join(args.out, 'ablation.json'),
            'text': os.path.join(args.out, 'ablation.txt'),
        }
        with open(outputs['json'], 'w', encoding='utf8') as f:
            json.dump(table.json_data(), f, indent=2, sort_keys=True)
        with open(outputs['text'], 'w', encoding='utf8') as f:
            f.write(table.text() + '\n')
        print(table.text())

        manifest.config = config.to_dict()
        manifest.seed = config.train.seed
        manifest.outputs = outputs
        manifest.write(args.out)
    finally:
        logging.getLogger('ikdmmt').removeHandler(handler)
        handler.close()
    return 0
