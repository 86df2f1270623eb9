"""Translation backbone, feature generator, visual networks and training."""

from .attention import AttentionRecord, MultiHeadAttention
from .backbone import EncoderOutput, MultimodalTransformer
from .factory import factory, factory_teacher
from .generator import FeatureGenerator, as_regions
from .model import IkdMmt, TranslationLoss
from .trace import ActivationTrace
from .trainer import Trainer
from .visual import StudentNet, TeacherNet
from . import losses
