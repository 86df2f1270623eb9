import json
import os

import numpy as np
import pytest

from ikdmmt import analysis
from ikdmmt.data import source_examples
from ikdmmt.data.synthetic import COLOR_TOKENS
from ikdmmt.engine import tnsr
from ikdmmt.errors import ContractError


def test_export_attention(tiny_model, synthetic, tmp_path):
    corpus, vocab, _ = synthetic
    examples = source_examples(corpus.sources[:2], vocab)
    path = tmp_path / 'attention.json'
    analysis.export_attention(tiny_model, examples, path, vocab=vocab)

    with open(path, encoding='utf8') as f:
        records = json.load(f)
    config = tiny_model.config
    assert len(records) == 2 * config.n_encoder_layers * config.n_heads
    record = records[0]
    n_tokens = len(examples[0].source)
    assert len(record['rows']) == n_tokens + config.n_regions
    assert record['row_labels'][0] == 'token:0'
    assert record['row_labels'][-1] == 'region:{}'.format(config.n_regions - 1)
    assert record['tokens'] == corpus.sources[0].split()
    np.testing.assert_allclose(np.array(record['rows']).sum(axis=1), 1.0, rtol=1e-9)


def test_features(tiny_model, synthetic, tmp_path):
    _, __, examples = synthetic
    generated, visual = analysis.features(tiny_model, examples[:5])
    assert generated.shape == visual.shape
    assert generated.shape[0] == 5

    written = analysis.export_features(tiny_model, examples[:5], str(tmp_path))
    assert written == {'generated': 5, 'teacher': 5}
    stored = tnsr.read(os.path.join(tmp_path, 'generated', '0.tnsr'))
    np.testing.assert_allclose(stored.numpy(), generated[0].numpy(), rtol=1e-6, atol=1e-6)


def test_features_without_images(tiny_model, synthetic, tmp_path):
    corpus, vocab, _ = synthetic
    examples = source_examples(corpus.sources[:3], vocab)
    written = analysis.export_features(tiny_model, examples, str(tmp_path))
    assert written == {'generated': 3}
    with pytest.raises(ContractError):
        analysis.image_retrieval(tiny_model, examples)


def test_image_retrieval(tiny_model, synthetic):
    _, __, examples = synthetic
    report, similarities = analysis.image_retrieval(tiny_model, examples, (1, 5))
    assert report.n_queries == len(examples)
    assert similarities.shape == (len(examples), len(examples))
    assert report.recall[1] <= report.recall[5]


def test_degradation(tiny_model, synthetic):
    _, vocab, examples = synthetic
    report = analysis.degradation_eval(tiny_model, examples, COLOR_TOKENS, vocab, max_len=10)
    assert report.mode == 'zero-shot'
    assert report.masked_fraction > 0.0
    assert report.drop == report.clean.score - report.masked.score
    assert set(report.json_data()) == {'clean', 'masked', 'drop', 'masked_fraction', 'mode'}

    with pytest.raises(ContractError):
        analysis.degradation_eval(tiny_model, examples[:4], COLOR_TOKENS, vocab, mode='other')
