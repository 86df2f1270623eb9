import logging
from typing import Optional

import torch

from ..config import ModelConfig
from ..data.batch import Batch
from ..data.vocab import Vocabulary
from ..engine import functional
from ..errors import ContractError
from .backbone import EncoderOutput, MultimodalTransformer
from .generator import FeatureGenerator, as_regions
from .visual import StudentNet, TeacherNet

LOG = logging.getLogger(__name__)


class TranslationLoss:
    """Teacher-forced negative log-likelihood summed over non-pad target tokens."""

    def __init__(self, total: torch.Tensor, n_tokens: int):
        self.total = total
        self.n_tokens = n_tokens

    @property
    def mean(self) -> torch.Tensor:
        return self.total / max(1, self.n_tokens)


class IkdMmt(torch.nn.Module):
    """Translation backbone, text-only feature generator and the teacher/student pair.

    Inference needs only :attr:`transformer` and :attr:`generator`; the
    visual networks are used for the distillation losses during training.
    """

    def __init__(self, config: ModelConfig, *, teacher: Optional[TeacherNet] = None):
        super().__init__()
        self.config = config
        self.transformer = MultimodalTransformer(config)
        self.generator = FeatureGenerator(config)
        self.student = StudentNet(config)
        self.teacher = teacher if teacher is not None else TeacherNet(config)

    def multimodal_feature(self, t, source_pad_mask) -> torch.Tensor:
        """Image-free multimodal feature map ``B x C_m x p x p``."""
        if self.config.multimodal_source == 'zeros':
            return torch.zeros(
                t.shape[0], self.config.feature_channels,
                self.config.feature_size, self.config.feature_size,
                dtype=t.dtype, device=t.device)
        return self.generator(t, source_pad_mask)

    def encode(self, source, source_pad_mask, *, return_feature=False):
        t = self.transformer.embed_source(source)
        m = self.multimodal_feature(t, source_pad_mask)
        encoder_output = self.transformer.encode_multimodal(t, as_regions(m), source_pad_mask)
        if return_feature:
            return encoder_output, m
        return encoder_output

    def forward(self, source, source_pad_mask, target_prefix):
        encoder_output, m = self.encode(source, source_pad_mask, return_feature=True)
        logits = self.transformer.decode_logits(target_prefix, encoder_output)
        return logits, m, encoder_output

    def translation_loss_from_logits(self, logits, target) -> TranslationLoss:
        labels = target[:, 1:]
        total = functional.cross_entropy(logits, labels, ignore_index=Vocabulary.pad_id, reduction='sum')
        return TranslationLoss(total, int((labels != Vocabulary.pad_id).sum()))

    def translation_loss(self, batch: Batch) -> TranslationLoss:
        logits, _, __ = self(batch.source, batch.source_pad_mask, batch.target[:, :-1])
        return self.translation_loss_from_logits(logits, batch.target)

    def encoder_output(self, batch: Batch) -> EncoderOutput:
        return self.encode(batch.source, batch.source_pad_mask)

    def check_shapes(self):
        """The generated feature must have the teacher's last activation shape."""
        size = self.config.image_size
        with torch.no_grad():
            image = torch.zeros(1, 3, size, size, dtype=self.teacher.mean.dtype)
            _, last = self.teacher(image).last
            t = torch.zeros(1, 1, self.config.d_model, dtype=image.dtype)
            m = self.generator(t)
        if last.shape != m.shape:
            raise ContractError('generated feature {} does not match teacher activation {}'.format(
                tuple(m.shape), tuple(last.shape)))
        return tuple(m.shape[1:])
