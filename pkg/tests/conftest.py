import pytest
import torch

from ikdmmt.config import ExperimentConfig, ModelConfig
from ikdmmt.data import Vocabulary, make_example, synth_generate, tokenize
from ikdmmt.engine import DTYPE
from ikdmmt.network import factory


TINY_MODEL = {
    'd_model': 16,
    'n_heads': 2,
    'n_encoder_layers': 1,
    'n_decoder_layers': 1,
    'ffn_dim': 32,
    'max_positions': 32,
    'image_size': 16,
    'stem_channels': 8,
    'stage_channels': [8, 16],
}


@pytest.fixture
def synthetic():
    corpus = synth_generate(16, seed=0, image_size=16)
    vocab = Vocabulary.build(tokenize(line) for line in corpus.sources + corpus.targets)
    examples = [
        make_example(tokenize(s), tokenize(t), vocab, torch.as_tensor(image, dtype=DTYPE))
        for s, t, image in zip(corpus.sources, corpus.targets, corpus.images)
    ]
    return corpus, vocab, examples


@pytest.fixture
def tiny_config(synthetic):
    _, vocab, __ = synthetic
    return ExperimentConfig.from_dict({
        'model': dict(TINY_MODEL, vocab_size=len(vocab)),
        'train': {'batch_size': 4, 'epochs': 2, 'lr': 1e-3},
    })


@pytest.fixture
def tiny_model(tiny_config):
    return factory(tiny_config.model, seed=0)


@pytest.fixture
def model_config():
    """Factory of tiny model configs with a vocabulary of 12."""
    def make(**kwargs) -> ModelConfig:
        return ModelConfig(**dict(TINY_MODEL, vocab_size=12, **kwargs))
    return make
