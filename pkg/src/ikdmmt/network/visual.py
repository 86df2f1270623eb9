"""Visual teacher and inverted student convolutional networks.

The teacher downsamples an image through a stem convolution and residual
stages. The student mirrors it: starting from the multimodal feature it
upsamples stage by stage so that every student stage output has the shape of
exactly one teacher stage output, and ends in a 3-channel image.
"""

import hashlib
import logging

import torch

from ..config import ModelConfig
from ..engine import functional
from ..errors import DimensionError
from .trace import ActivationTrace

LOG = logging.getLogger(__name__)


class Conv2d(torch.nn.Conv2d):
    """Convolution routed through the validating functional op."""

    def forward(self, x):  # pylint: disable=arguments-renamed
        return functional.conv2d(x, self.weight, self.bias,
                                 stride=self.stride[0], padding=self.padding[0])


class DownBlock(torch.nn.Module):
    """Bottleneck 1x1 / 3x3 stride 2 / 1x1 with a projection shortcut.

    Without ``residual`` this is the plain variant of the same layers.
    """

    def __init__(self, inp, oup, *, residual=True):
        super().__init__()
        width = oup // 4
        self.reduce = Conv2d(inp, width, 1)
        self.spatial = Conv2d(width, width, 3, stride=2, padding=1)
        self.expand = Conv2d(width, oup, 1)
        self.shortcut = Conv2d(inp, oup, 1, stride=2) if residual else None

    def forward(self, x, trace: ActivationTrace, name: str):
        h = trace.add(name + '.reduce', functional.relu(self.reduce(x)))
        h = trace.add(name + '.spatial', functional.relu(self.spatial(h)))
        h = self.expand(h)
        if self.shortcut is not None:
            h = functional.add(h, self.shortcut(x))
        return trace.add(name, functional.relu(h))


class UpBlock(torch.nn.Module):
    """Inverse of :class:`DownBlock`: 1x1 / upsample + 3x3 / 1x1.

    Nearest-neighbour upsampling takes the place of max unpooling since the
    student never ran the pooling whose indices unpooling would need.
    """

    def __init__(self, inp, oup, *, residual=True):
        super().__init__()
        width = inp // 4
        self.reduce = Conv2d(inp, width, 1)
        self.spatial = Conv2d(width, width, 3, padding=1)
        self.expand = Conv2d(width, oup, 1)
        self.shortcut = Conv2d(inp, oup, 1) if residual else None

    def forward(self, x, trace: ActivationTrace, name: str):
        h = trace.add(name + '.reduce', functional.relu(self.reduce(x)))
        h = functional.upsample_nearest(h, 2)
        h = trace.add(name + '.spatial', functional.relu(self.spatial(h)))
        h = self.expand(h)
        if self.shortcut is not None:
            h = functional.add(h, self.shortcut(functional.upsample_nearest(x, 2)))
        return trace.add(name, functional.relu(h))


class ShallowDownBlock(torch.nn.Module):
    def __init__(self, inp, oup, **_):
        super().__init__()
        self.conv = Conv2d(inp, oup, 3, stride=2, padding=1)

    def forward(self, x, trace: ActivationTrace, name: str):
        return trace.add(name, functional.relu(self.conv(x)))


class ShallowUpBlock(torch.nn.Module):
    def __init__(self, inp, oup, **_):
        super().__init__()
        self.conv = Conv2d(inp, oup, 3, padding=1)

    def forward(self, x, trace: ActivationTrace, name: str):
        x = functional.upsample_nearest(x, 2)
        return trace.add(name, functional.relu(self.conv(x)))


BLOCKS = {
    'bottleneck': (DownBlock, UpBlock, {'residual': True}),
    'plain': (DownBlock, UpBlock, {'residual': False}),
    'shallow': (ShallowDownBlock, ShallowUpBlock, {}),
}


def stage_names(config: ModelConfig):
    return ['stem'] + ['stage{}'.format(i + 2) for i in range(len(config.stage_channels))]


class TeacherNet(torch.nn.Module):
    """Frozen visual teacher.

    Parameters never receive gradients, but gradients do flow through the
    computation into the input image.
    """

    def __init__(self, config: ModelConfig, *, frozen=True):
        super().__init__()
        self.config = config
        self.frozen = frozen
        down_block, _, block_kwargs = BLOCKS[config.backbone]

        self.stem = Conv2d(3, config.stem_channels, 7, stride=2, padding=3)
        channels = [config.stem_channels] + list(config.stage_channels)
        self.stages = torch.nn.ModuleList([
            down_block(inp, oup, **block_kwargs)
            for inp, oup in zip(channels[:-1], channels[1:])
        ])
        self.register_buffer('mean', torch.tensor(config.image_mean).reshape(1, 3, 1, 1))
        self.register_buffer('std', torch.tensor(config.image_std).reshape(1, 3, 1, 1))

        if frozen:
            self.requires_grad_(False)
        LOG.debug('teacher stages: %s', stage_names(config))

    def train(self, mode=True):
        # no train-time behaviour; a frozen teacher always stays in eval mode
        return super().train(mode and not self.frozen)

    def forward(self, image) -> ActivationTrace:
        expected = (3, self.config.image_size, self.config.image_size)
        if image.dim() != 4 or tuple(image.shape[1:]) != expected:
            raise DimensionError('teacher: image batch {} does not match N x {}'.format(
                tuple(image.shape), expected))

        names = stage_names(self.config)
        trace = ActivationTrace()
        x = (image - self.mean) / self.std
        x = trace.add(names[0], functional.relu(self.stem(x)))
        for name, stage in zip(names[1:], self.stages):
            x = stage(x, trace, name)
        return trace

    def checksum(self) -> str:
        sha256_hash = hashlib.sha256()
        for name, p in sorted(self.state_dict().items()):
            sha256_hash.update(name.encode())
            sha256_hash.update(p.detach().cpu().contiguous().numpy().tobytes())
        return sha256_hash.hexdigest()


class StudentNet(torch.nn.Module):
    """Inverted student: multimodal feature map to an image in [0, 1]."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        _, up_block, block_kwargs = BLOCKS[config.backbone]

        channels = [config.stem_channels] + list(config.stage_channels)
        self.stages = torch.nn.ModuleList([
            up_block(inp, oup, **block_kwargs)
            for inp, oup in zip(channels[:0:-1], channels[-2::-1])
        ])
        self.head = Conv2d(config.stem_channels, 3, 7, padding=3)

    def forward(self, m):
        expected = (self.config.feature_channels,
                    self.config.feature_size, self.config.feature_size)
        if m.dim() != 4 or tuple(m.shape[1:]) != expected:
            raise DimensionError('student: feature batch {} does not match N x {}'.format(
                tuple(m.shape), expected))

        # student stage i inverts teacher stage i
        names = ['s-' + n for n in stage_names(self.config)[:0:-1]]
        trace = ActivationTrace()
        x = m
        for name, stage in zip(names, self.stages):
            x = stage(x, trace, name)
        x = functional.upsample_nearest(x, 2)
        image = torch.sigmoid(self.head(x))
        return image, trace
