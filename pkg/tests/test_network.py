import numpy as np
import pytest
import torch

from ikdmmt.config import ModelConfig
from ikdmmt.data import Vocabulary, collate_triplets
from ikdmmt.data.corpus import TripletExample
from ikdmmt.engine import DTYPE
from ikdmmt.errors import ConfigurationError, ContractError, DimensionError
from ikdmmt.network import FeatureGenerator, as_regions, factory


def random_config(seed) -> ModelConfig:
    rng = np.random.default_rng(seed)
    n_heads = int(rng.choice([1, 2, 4]))
    n_stages = int(rng.integers(0, 3))
    return ModelConfig(
        vocab_size=int(rng.integers(8, 20)),
        d_model=n_heads * int(rng.choice([2, 4, 8])),
        n_heads=n_heads,
        n_encoder_layers=int(rng.integers(1, 3)),
        n_decoder_layers=int(rng.integers(1, 3)),
        ffn_dim=int(rng.choice([8, 16])),
        max_positions=16,
        image_size=int(rng.choice([16, 32])),
        stem_channels=4 * int(rng.integers(1, 3)),
        stage_channels=[4 * int(rng.integers(1, 4)) for _ in range(n_stages)],
        backbone=str(rng.choice(['bottleneck', 'plain', 'shallow'])),
    )


def random_batch(config, seed, batch_size=3):
    g = torch.Generator().manual_seed(seed)
    examples = []
    for i in range(batch_size):
        source = torch.randint(5, config.vocab_size, (2 + i,), generator=g).tolist()
        target = [2] + torch.randint(5, config.vocab_size, (1 + 2 * i,), generator=g).tolist() + [3]
        image = torch.rand(3, config.image_size, config.image_size, generator=g, dtype=DTYPE)
        examples.append(TripletExample(source, target, image))
    return collate_triplets(examples)


@pytest.mark.parametrize('seed', range(10))
def test_shape_laws(seed):
    config = random_config(seed)
    model = factory(config, seed=seed)
    batch = random_batch(config, seed)
    batch_size, n_tokens = batch.source.shape

    t = model.transformer.embed_source(batch.source)
    m = model.multimodal_feature(t, batch.source_pad_mask)
    _, last = model.teacher(batch.images).last
    assert m.shape == last.shape
    assert m.shape == (batch_size, config.feature_channels,
                       config.feature_size, config.feature_size)

    fused = model.transformer.fuse_query(t, as_regions(m))
    assert fused.shape == (batch_size, n_tokens + config.n_regions, config.d_model)

    logits, _, encoder_output = model(batch.source, batch.source_pad_mask, batch.target[:, :-1])
    assert encoder_output.hidden.shape == fused.shape
    assert logits.shape == (batch_size, batch.target.shape[1] - 1, config.vocab_size)

    image, _ = model.student(m)
    assert image.shape == batch.images.shape


def test_decoder_is_causal(tiny_model):
    model = tiny_model
    source = torch.tensor([[5, 6, 7]])
    encoder_output = model.encode(source, source == 0)
    prefix = torch.tensor([[2, 8, 9, 10]])
    changed = torch.tensor([[2, 8, 11, 12]])
    with torch.no_grad():
        a = model.transformer.decode_logits(prefix, encoder_output)
        b = model.transformer.decode_logits(changed, encoder_output)
    assert torch.equal(a[:, :2], b[:, :2])
    assert not torch.equal(a[:, 2:], b[:, 2:])


def test_decoder_needs_bos(tiny_model):
    source = torch.tensor([[5, 6]])
    encoder_output = tiny_model.encode(source, source == 0)
    with pytest.raises(ContractError):
        tiny_model.transformer.decode_logits(torch.tensor([[5, 6]]), encoder_output)


def test_encoder_attention(tiny_model):
    config = tiny_model.config
    source = torch.tensor([[5, 6, 7, 8], [5, 6, 0, 0]])
    with torch.no_grad():
        output = tiny_model.encode(source, source == Vocabulary.pad_id)
    assert output.n_text == 4
    for weights in output.attention:
        # queries: all fused rows, keys: text rows
        assert weights.shape == (2, config.n_heads, 4 + config.n_regions, 4)
        np.testing.assert_allclose(weights.sum(dim=-1).numpy(), 1.0, rtol=1e-12)
        assert torch.all(weights[1, :, :, 2:] == 0.0)
    assert output.pad_mask.tolist()[1][:4] == [False, False, True, True]
    assert not output.pad_mask[:, 4:].any()


def test_encoder_rejects_all_padding(tiny_model):
    source = torch.tensor([[5, 6], [0, 0]])
    with pytest.raises(ContractError):
        tiny_model.encode(source, source == Vocabulary.pad_id)


def test_sequence_length_limit(tiny_model):
    source = torch.full((1, tiny_model.config.max_positions + 1), 5)
    with pytest.raises(ContractError):
        tiny_model.encode(source, source == 0)


def test_generator_ignores_padding(model_config):
    generator = FeatureGenerator(model_config()).to(DTYPE)
    t = torch.randn(1, 3, 16, dtype=DTYPE)
    padded = torch.cat([t, torch.randn(1, 2, 16, dtype=DTYPE)], dim=1)
    pad_mask = torch.tensor([[False, False, False, True, True]])
    with torch.no_grad():
        np.testing.assert_allclose(generator(padded, pad_mask).numpy(),
                                   generator(t).numpy(), rtol=1e-12)


def test_generator_replicates_regions(model_config):
    config = model_config()
    generator = FeatureGenerator(config).to(DTYPE)
    m = generator(torch.randn(2, 4, 16, dtype=DTYPE))
    assert m.shape == (2, config.feature_channels, config.feature_size, config.feature_size)
    regions = as_regions(m)
    assert regions.shape == (2, config.n_regions, config.feature_channels)
    assert torch.equal(regions, regions[:, :1].expand_as(regions))

    with pytest.raises(DimensionError):
        generator.generate_multimodal(torch.zeros(2, 8, dtype=DTYPE))
    with pytest.raises(ContractError):
        generator(torch.zeros(1, 2, 16, dtype=DTYPE), torch.tensor([[True, True]]))


def test_generator_sees_only_text(tiny_model):
    source = torch.tensor([[5, 6, 7]])
    _, m = tiny_model.encode(source, source == 0, return_feature=True)
    _, m_again = tiny_model.encode(source, source == 0, return_feature=True)
    assert torch.equal(m, m_again)
    other = torch.tensor([[5, 6, 8]])
    _, m_other = tiny_model.encode(other, other == 0, return_feature=True)
    assert not torch.equal(m, m_other)


def test_zeros_multimodal_source(model_config):
    model = factory(model_config(multimodal_source='zeros'), seed=0)
    source = torch.tensor([[5, 6, 7]])
    _, m = model.encode(source, source == 0, return_feature=True)
    assert not m.any()


def test_without_text_features(model_config):
    config = model_config(text_features=False)
    model = factory(config, seed=0)
    source = torch.tensor([[5, 6, 7]])
    output = model.encode(source, source == 0)
    assert output.n_text == 0
    assert output.hidden.shape == (1, config.n_regions, config.d_model)


def test_teacher_frozen(tiny_model):
    teacher = tiny_model.teacher
    assert not any(p.requires_grad for p in teacher.parameters())
    tiny_model.train()
    assert not teacher.training
    assert tiny_model.transformer.training

    with pytest.raises(DimensionError):
        teacher(torch.zeros(1, 3, 8, 8, dtype=DTYPE))


def test_teacher_independent_of_global_seed(model_config):
    config = model_config()
    a = factory(config, seed=1)
    b = factory(config, seed=2)
    assert a.teacher.checksum() == b.teacher.checksum()
    assert not torch.equal(a.transformer.source_embedding, b.transformer.source_embedding)

    c = factory(model_config(teacher_seed=5), seed=1)
    assert c.teacher.checksum() != a.teacher.checksum()


def test_student_stages_mirror_teacher(tiny_model):
    config = tiny_model.config
    image = torch.rand(1, 3, config.image_size, config.image_size, dtype=DTYPE)
    teacher_shapes = [tuple(v.shape) for _, v in tiny_model.teacher(image).blocks()]
    _, m = tiny_model.encode(torch.tensor([[5, 6]]), torch.tensor([[False, False]]),
                             return_feature=True)
    _, student_trace = tiny_model.student(m)
    student_shapes = [tuple(m.shape)] + [tuple(v.shape) for _, v in student_trace.blocks()]
    assert student_shapes == teacher_shapes[::-1]


def test_factory_validation(model_config):
    with pytest.raises(ConfigurationError):
        factory(model_config(d_model=15))
    with pytest.raises(ConfigurationError):
        factory(model_config(image_size=20))
    with pytest.raises(ConfigurationError):
        factory(ModelConfig(vocab_size=3))
