"""Experiment configuration.

A configuration is a tree of dataclasses. JSON files and ablation cells are
overlays: any field they omit keeps its default.

>>> config = ExperimentConfig.from_dict({'distill.similarity': 'L1'})
>>> config.distill.similarity, config.distill.granularity
('L1', 'Model')
"""

import copy
import dataclasses
from dataclasses import dataclass, field
import json
import logging
from typing import List, Optional

from .errors import ConfigurationError

LOG = logging.getLogger(__name__)

SIMILARITIES = ('L2', 'L1', 'Linf', 'Cosine', 'KL')
GRANULARITIES = ('Model', 'Block', 'Layer')
BACKBONES = ('bottleneck', 'plain', 'shallow')
MULTIMODAL_SOURCES = ('generated', 'zeros')


@dataclass
class ModelConfig:
    vocab_size: int = 0
    d_model: int = 64
    n_heads: int = 4
    n_encoder_layers: int = 4
    n_decoder_layers: int = 4
    ffn_dim: int = 128
    max_positions: int = 256

    #: input images are 3 x image_size x image_size in [0, 1]
    image_size: int = 32
    stem_channels: int = 32
    stage_channels: List[int] = field(default_factory=lambda: [64, 128])
    backbone: str = 'bottleneck'
    image_mean: List[float] = field(default_factory=lambda: [0.5, 0.5, 0.5])
    image_std: List[float] = field(default_factory=lambda: [0.25, 0.25, 0.25])
    teacher_seed: int = 0
    teacher_weights: Optional[str] = None

    generator_bias: bool = False
    generator_activation: bool = False
    multimodal_source: str = 'generated'
    text_features: bool = True

    @property
    def n_stages(self) -> int:
        return 1 + len(self.stage_channels)

    @property
    def feature_size(self) -> int:
        """Side length p of the last teacher activation, P = p * p."""
        return self.image_size // 2 ** self.n_stages

    @property
    def n_regions(self) -> int:
        return self.feature_size ** 2

    @property
    def feature_channels(self) -> int:
        return self.stage_channels[-1] if self.stage_channels else self.stem_channels

    def validate(self):
        if self.d_model % self.n_heads:
            raise ConfigurationError('d_model ({}) not divisible by n_heads ({})'.format(
                self.d_model, self.n_heads))
        if self.feature_size < 1 or self.image_size % 2 ** self.n_stages:
            raise ConfigurationError('image_size {} not divisible by 2^{}'.format(
                self.image_size, self.n_stages))
        if self.backbone not in BACKBONES:
            raise ConfigurationError('backbone {} not in {}'.format(self.backbone, BACKBONES))
        if self.backbone == 'bottleneck' and any(c % 4 for c in self.stage_channels):
            raise ConfigurationError('bottleneck stages need channels divisible by 4')
        if self.multimodal_source not in MULTIMODAL_SOURCES:
            raise ConfigurationError('multimodal_source {} not in {}'.format(
                self.multimodal_source, MULTIMODAL_SOURCES))
        if len(self.image_mean) != 3 or len(self.image_std) != 3:
            raise ConfigurationError('image_mean and image_std need three channels')


@dataclass
class DistillConfig:
    similarity: str = 'L2'
    granularity: str = 'Model'
    enable_irm: bool = True
    enable_iam: bool = True
    #: only the image-space term, no representation pairs
    image_space_only: bool = False

    @property
    def enabled(self) -> bool:
        return self.enable_irm or self.enable_iam

    def validate(self):
        if self.similarity not in SIMILARITIES:
            raise ConfigurationError('similarity {} not in {}'.format(
                self.similarity, SIMILARITIES))
        if self.granularity not in GRANULARITIES:
            raise ConfigurationError('granularity {} not in {}'.format(
                self.granularity, GRANULARITIES))


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    lr: float = 3e-4
    betas: List[float] = field(default_factory=lambda: [0.9, 0.98])
    adam_eps: float = 1e-9
    seed: int = 1
    #: write a checkpoint every n steps, 0 for epoch ends only
    checkpoint_interval: int = 0
    log_interval: int = 1
    max_steps: Optional[int] = None
    trans_weight: float = 1.0
    irm_weight: float = 1.0
    iam_weight: float = 1.0

    def validate(self):
        if self.lr <= 0.0:
            raise ConfigurationError('learning rate must be > 0, got {}'.format(self.lr))
        if self.epochs < 1:
            raise ConfigurationError('epochs must be >= 1, got {}'.format(self.epochs))
        if self.batch_size < 1:
            raise ConfigurationError('batch_size must be >= 1, got {}'.format(self.batch_size))


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    distill: DistillConfig = field(default_factory=DistillConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self):
        self.model.validate()
        self.distill.validate()
        self.train.validate()
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    def overlay(self, overlay: dict) -> 'ExperimentConfig':
        """Return a copy with the overlay applied.

        Keys are either nested (``{'distill': {'similarity': 'L1'}}``) or
        dotted (``{'distill.similarity': 'L1'}``).
        """
        result = copy.deepcopy(self)
        for key, value in _flatten(overlay).items():
            section_name, _, field_name = key.partition('.')
            section = getattr(result, section_name, None)
            if not dataclasses.is_dataclass(section) or not field_name:
                raise ConfigurationError('unknown config section in "{}"'.format(key))
            if field_name not in {f.name for f in dataclasses.fields(section)}:
                raise ConfigurationError('unknown config field "{}"'.format(key))
            setattr(section, field_name, value)
        return result.validate()

    @classmethod
    def from_dict(cls, overlay: Optional[dict] = None) -> 'ExperimentConfig':
        return cls().overlay(overlay or {})

    @classmethod
    def from_json(cls, path) -> 'ExperimentConfig':
        with open(path, 'r', encoding='utf8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError('{}: {}'.format(path, e)) from e
        LOG.debug('config overlay from %s: %s', path, data)
        return cls.from_dict(data)


def _flatten(tree: dict, prefix=''):
    flat = {}
    for key, value in tree.items():
        full_key = prefix + key
        if isinstance(value, dict) and '.' not in full_key:
            flat.update(_flatten(value, full_key + '.'))
        else:
            flat[full_key] = value
    return flat
