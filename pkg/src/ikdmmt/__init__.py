"""Image-free multimodal machine translation with inversion knowledge distillation."""

# pylint: disable=wrong-import-position

__version__ = '0.1.0'

from .config import DistillConfig, ExperimentConfig, ModelConfig, TrainConfig
from .errors import (
    AlignmentError,
    ConfigurationError,
    ContractError,
    DimensionError,
    DivergenceError,
    FormatError,
    IkdmmtError,
    VocabularyIndexError,
)
from .translator import Translator, load_model
from . import data
from . import engine
from . import logger
from . import metric
from . import network
from . import optimize
