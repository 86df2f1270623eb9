"""Configuration through class attributes in forked ablation workers.

Cells of an ablation grid run in a 'fork' worker pool. Class attributes set
by ``configure()`` in the main process are visible in the workers; with
'spawn' they would not be.
"""

import argparse
import multiprocessing
import sys

import pytest

from ikdmmt import ablate
from ikdmmt.network import Trainer


def get_log_interval(_):
    return Trainer.log_interval


def test_class_attr():
    if sys.platform.startswith('win'):
        pytest.skip('multiprocessing not supported on windows')

    try:
        Trainer.configure(argparse.Namespace(log_interval=7, checkpoint_interval=None))
        multiprocessing_context = multiprocessing.get_context('fork')
        worker_pool = multiprocessing_context.Pool(2)
        result = worker_pool.starmap(get_log_interval, [(0.0,), (1.0,)])
        worker_pool.close()
    finally:
        Trainer.log_interval = None
        Trainer.checkpoint_interval = None
    assert result == [7, 7]


def test_ablation_workers_keep_grid_order(tiny_config, synthetic):
    if sys.platform.startswith('win'):
        pytest.skip('multiprocessing not supported on windows')

    _, vocab, examples = synthetic
    config = tiny_config.overlay({'train.max_steps': 1})
    grid = [ablate.GridCell('base'),
            ablate.GridCell('l1', {'distill.similarity': 'L1'}),
            ablate.GridCell('block', {'distill.granularity': 'Block'})]
    serial = ablate.ablate(grid, config, examples[:8], examples[8:10], vocab)
    parallel = ablate.ablate(grid, config, examples[:8], examples[8:10], vocab, jobs=2)
    assert [r.name for r in parallel.rows] == ['base', 'l1', 'block']
    assert [r.bleu for r in parallel.rows] == [r.bleu for r in serial.rows]
    assert [r.final_loss for r in parallel.rows] == [r.final_loss for r in serial.rows]
