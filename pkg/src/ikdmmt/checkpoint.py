"""Training checkpoints.

A checkpoint is a directory holding one float64 TNSR file per model tensor and
per Adam moment buffer, and a ``manifest.json`` with the step, the config
snapshot, the optimizer step counters and running loss statistics. Saving a
loaded checkpoint again reproduces every file byte for byte.
"""

import dataclasses
from dataclasses import dataclass, field
import logging
from typing import Dict, Optional

import torch

from .config import ExperimentConfig
from .errors import ConfigurationError, FormatError
from . import weights
from .optimize import trainable_parameters

LOG = logging.getLogger(__name__)

PARAMETER_PREFIX = 'param.'
MOMENT_PREFIX = 'adam.'
MOMENTS = ('exp_avg', 'exp_avg_sq')


@dataclass
class Checkpoint:
    step: int
    config: ExperimentConfig
    #: model state (parameters and buffers) by name
    parameters: Dict[str, torch.Tensor]
    #: parameter name -> {'exp_avg': ..., 'exp_avg_sq': ...}
    moments: Dict[str, Dict[str, torch.Tensor]] = field(default_factory=dict)
    #: parameter name -> Adam step counter
    optimizer_steps: Dict[str, float] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)


def optimizer_state(model: torch.nn.Module, optimizer: torch.optim.Optimizer):
    names = [name for name, _ in trainable_parameters(model)]
    moments, steps = {}, {}
    for index, state in optimizer.state_dict()['state'].items():
        name = names[index]
        moments[name] = {k: state[k] for k in MOMENTS}
        steps[name] = float(state['step'])
    return moments, steps


def save_checkpoint(directory, model: torch.nn.Module, config: ExperimentConfig, *,
                    step: int,
                    optimizer: Optional[torch.optim.Optimizer] = None,
                    stats: Optional[dict] = None) -> Checkpoint:
    moments, steps = {}, {}
    if optimizer is not None:
        moments, steps = optimizer_state(model, optimizer)
    checkpoint = Checkpoint(
        step=step,
        config=config,
        parameters={k: v.detach() for k, v in model.state_dict().items()},
        moments=moments,
        optimizer_steps=steps,
        stats=dict(stats or {}),
    )
    write_checkpoint(directory, checkpoint)
    return checkpoint


def write_checkpoint(directory, checkpoint: Checkpoint):
    tensors = {PARAMETER_PREFIX + k: v for k, v in checkpoint.parameters.items()}
    for name, buffers in checkpoint.moments.items():
        for moment in MOMENTS:
            tensors['{}{}.{}'.format(MOMENT_PREFIX, name, moment)] = buffers[moment]
    weights.write_tensors(directory, tensors, extra={
        'kind': 'checkpoint',
        'step': checkpoint.step,
        'config': checkpoint.config.to_dict(),
        'optimizer_steps': checkpoint.optimizer_steps,
        'stats': checkpoint.stats,
    })
    LOG.info('checkpoint written: %s (step %d)', directory, checkpoint.step)


def load_checkpoint(directory) -> Checkpoint:
    tensors, manifest = weights.read_tensors(directory)
    if manifest.get('kind') != 'checkpoint':
        raise FormatError('{}: not a checkpoint (kind {})'.format(directory, manifest.get('kind')))
    for key in ('step', 'config', 'optimizer_steps', 'stats'):
        if key not in manifest:
            raise FormatError('{}: manifest lacks "{}"'.format(directory, key))

    parameters, moments = {}, {}
    for name, tensor in tensors.items():
        if name.startswith(PARAMETER_PREFIX):
            parameters[name[len(PARAMETER_PREFIX):]] = tensor
        elif name.startswith(MOMENT_PREFIX):
            parameter_name, _, moment = name[len(MOMENT_PREFIX):].rpartition('.')
            moments.setdefault(parameter_name, {})[moment] = tensor
        else:
            raise FormatError('{}: unexpected tensor {}'.format(directory, name))
    if set(moments) != set(manifest['optimizer_steps']):
        raise FormatError('{}: optimizer moments and step counters disagree'.format(directory))

    return Checkpoint(
        step=int(manifest['step']),
        config=ExperimentConfig.from_dict(manifest['config']),
        parameters=parameters,
        moments=moments,
        optimizer_steps={k: float(v) for k, v in manifest['optimizer_steps'].items()},
        stats=manifest['stats'],
    )


def check_config(checkpoint: Checkpoint, config: ExperimentConfig):
    stored = dataclasses.asdict(checkpoint.config.model)
    requested = dataclasses.asdict(config.model)
    differing = sorted(k for k in stored if stored[k] != requested.get(k))
    if differing:
        raise ConfigurationError('checkpoint model config differs in {}'.format(
            {k: (stored[k], requested[k]) for k in differing}))


def restore(checkpoint: Checkpoint, model: torch.nn.Module,
            optimizer: Optional[torch.optim.Optimizer] = None, *,
            config: Optional[ExperimentConfig] = None):
    """Load parameters and optimizer state; on any mismatch nothing is loaded."""
    if config is not None:
        check_config(checkpoint, config)

    optimizer_state_dict = None
    if optimizer is not None:
        named = trainable_parameters(model)
        unknown = sorted(set(checkpoint.moments) - {name for name, _ in named})
        if unknown:
            raise ConfigurationError('optimizer state for unknown parameters {}'.format(unknown))
        state = {}
        for index, (name, parameter) in enumerate(named):
            if name not in checkpoint.moments:
                continue
            for moment in MOMENTS:
                if checkpoint.moments[name][moment].shape != parameter.shape:
                    raise ConfigurationError('{} of {} has shape {}, parameter {}'.format(
                        moment, name, tuple(checkpoint.moments[name][moment].shape),
                        tuple(parameter.shape)))
            state[index] = {'step': torch.tensor(checkpoint.optimizer_steps[name])}
            state[index].update(checkpoint.moments[name])
        optimizer_state_dict = {
            'state': state,
            'param_groups': optimizer.state_dict()['param_groups'],
        }

    weights.load_state(model, checkpoint.parameters)
    if optimizer_state_dict is not None:
        optimizer.load_state_dict(optimizer_state_dict)
    LOG.info('restored checkpoint at step %d', checkpoint.step)
