"""Train the translation model jointly with the distillation losses."""

import argparse
import logging
import math
import os
import time
from typing import List, Optional, Sequence

import torch

from ..checkpoint import save_checkpoint
from ..config import ExperimentConfig
from ..data.batch import Batch, loader
from ..data.corpus import TripletExample
from ..errors import ContractError, DivergenceError

LOG = logging.getLogger(__name__)

CHECKPOINT_NAME = 'checkpoint'


class RunningStats:
    """Running means of the loss components."""

    def __init__(self, field_names: Sequence[str], state: Optional[dict] = None):
        self.field_names = list(field_names) + ['total']
        state = state or {}
        self.n_steps = state.get('n_steps', 0)
        self.sums = {k: state.get('sums', {}).get(k, 0.0) for k in self.field_names}

    def add(self, values: dict):
        self.n_steps += 1
        for k in self.field_names:
            self.sums[k] += values[k]

    def means(self):
        return {k: self.sums[k] / max(1, self.n_steps) for k in self.field_names}

    def state(self):
        return {'n_steps': self.n_steps, 'sums': dict(self.sums)}


class Trainer():
    log_interval = None
    checkpoint_interval = None

    def __init__(self, model, loss, optimizer, out: Optional[str], *,
                 config: ExperimentConfig,
                 stats: Optional[dict] = None):
        self.model = model
        self.loss = loss
        self.optimizer = optimizer
        self.out = out
        self.config = config

        train = config.train
        self.log_interval = self.log_interval or train.log_interval
        if self.checkpoint_interval is None:
            self.checkpoint_interval = train.checkpoint_interval

        self.stats = RunningStats(self.loss.field_names, stats)
        self.history: List[dict] = []

        LOG.info({
            'type': 'config',
            'field_names': list(self.loss.field_names),
            'config': config.to_dict(),
        })

    @classmethod
    def cli(cls, parser: argparse.ArgumentParser):
        group = parser.add_argument_group('trainer')
        group.add_argument('--log-interval', default=None, type=int,
                           help='log losses every n steps (default from config)')
        group.add_argument('--checkpoint-interval', default=None, type=int,
                           help='write a checkpoint every n steps, 0 for epoch ends only '
                                '(default from config)')

    @classmethod
    def configure(cls, args: argparse.Namespace):
        cls.log_interval = args.log_interval
        cls.checkpoint_interval = args.checkpoint_interval

    def steps_per_epoch(self, n_examples):
        return math.ceil(n_examples / self.config.train.batch_size)

    def total_steps(self, n_examples):
        steps = self.config.train.epochs * self.steps_per_epoch(n_examples)
        if self.config.train.max_steps is not None:
            steps = min(steps, self.config.train.max_steps)
        return steps

    def loop(self, examples: Sequence[TripletExample], start_step=0) -> List[dict]:
        """Train from ``start_step`` and return the per-step loss history.

        Epoch ``e`` shuffles with ``seed + e``, so a run resumed at any step
        sees the same batches as the uninterrupted run.
        """
        if not examples:
            raise ContractError('training corpus is empty')
        steps_per_epoch = self.steps_per_epoch(len(examples))
        total_steps = self.total_steps(len(examples))
        if start_step >= total_steps:
            raise ContractError('start step ({}) >= total steps ({})'.format(
                start_step, total_steps))

        teacher_checksum = self.model.teacher.checksum()
        step = start_step
        for epoch in range(start_step // steps_per_epoch, self.config.train.epochs):
            epoch_start = time.time()
            batches = loader(examples, self.config.train.batch_size,
                             seed=self.config.train.seed + epoch)
            for batch_idx, batch in enumerate(batches):
                if epoch * steps_per_epoch + batch_idx < step:
                    continue
                values = self.train_batch(batch, step)
                step += 1
                self.stats.add(values)
                record = {'type': 'train', 'step': step, 'epoch': epoch}
                record.update(values)
                self.history.append(record)
                if step % self.log_interval == 0:
                    LOG.info(record)

                if self.checkpoint_interval and step % self.checkpoint_interval == 0:
                    self.write_checkpoint(step, final=False)
                if step >= total_steps:
                    break

            LOG.info({
                'type': 'train-epoch',
                'epoch': epoch + 1,
                'step': step,
                'means': self.stats.means(),
                'time': round(time.time() - epoch_start, 1),
            })
            if step >= total_steps:
                break
            if not self.checkpoint_interval:
                self.write_checkpoint(step, final=False)

        if self.model.teacher.checksum() != teacher_checksum:
            raise ContractError('frozen teacher parameters changed during training')
        self.write_checkpoint(step, final=True)
        return self.history

    def train_batch(self, batch: Batch, step: int) -> dict:
        self.model.train()
        total, components = self.loss(self.model, batch)
        if not bool(torch.isfinite(total)):
            raise DivergenceError('loss diverged at step {}: total {}, components {}'.format(
                step + 1, float(total), {k: float(v) for k, v in components.items()}))

        self.optimizer.zero_grad()
        total.backward()
        self.optimizer.step()

        values = {k: float(v) for k, v in components.items()}
        values['total'] = float(total)
        return values

    def write_checkpoint(self, step, final=True):
        if self.out is None:
            return
        name = CHECKPOINT_NAME if final else '{}.step{:06d}'.format(CHECKPOINT_NAME, step)
        save_checkpoint(os.path.join(self.out, name), self.model, self.config,
                        step=step, optimizer=self.optimizer,
                        stats={'running': self.stats.state(), 'means': self.stats.means()})
