import math

import numpy as np
import pytest
import torch

from ikdmmt.errors import ContractError
from ikdmmt.metric import AmbiguousAccuracy, Bleu, ambiguous_accuracy, bleu4, retrieval_rk


def test_bleu_identity():
    sentences = ['ein mann sitzt nahe dem baum', 'eine frau geht bei dem auto']
    report = bleu4(sentences, sentences)
    assert report.score == pytest.approx(100.0)
    assert report.precisions == [1.0, 1.0, 1.0, 1.0]
    assert report.brevity_penalty == 1.0
    assert report.text().startswith('BLEU = 100.00')


def test_bleu_clipped_unigrams():
    report = bleu4(['the the the the the'], ['the cat sat'])
    assert report.precisions[0] == pytest.approx(0.2, abs=1e-4)
    assert report.precisions[1:] == [0.0, 0.0, 0.0]
    assert report.brevity_penalty == 1.0
    assert report.score == 0.0


def test_bleu_brevity_penalty():
    report = bleu4(['a b c d'], ['a b c d e f'])
    assert report.precisions == [1.0, 1.0, 1.0, 1.0]
    assert report.brevity_penalty == pytest.approx(math.exp(1.0 - 6.0 / 4.0), abs=1e-4)
    assert report.score == pytest.approx(100.0 * math.exp(-0.5), abs=1e-4)
    assert report.hypothesis_length == 4
    assert report.reference_length == 6


def test_bleu_partial_match():
    report = bleu4(['The cat sat on the mat'], ['the cat sat on a mat'])
    expected = [5 / 6, 3 / 5, 2 / 4, 1 / 3]
    np.testing.assert_allclose(report.precisions, expected, atol=1e-4)
    geometric_mean = math.exp(sum(math.log(p) for p in expected) / 4)
    assert report.score == pytest.approx(100.0 * geometric_mean, abs=1e-4)


def test_bleu_errors():
    with pytest.raises(ContractError):
        bleu4([], [])
    with pytest.raises(ContractError):
        bleu4(['a'], ['a', 'b'])


def test_bleu_metric():
    metric = Bleu()
    metric.accumulate('a b c d', 'a b c d')
    stats = metric.stats()
    assert len(stats['stats']) == len(stats['text_labels'])
    assert stats['stats'][0] == pytest.approx(100.0)


def brute_force_recall(queries, gallery, k):
    q = queries.numpy()
    g = gallery.numpy()
    hits = 0
    for i in range(len(q)):
        sims = [float(np.dot(q[i], g[j]) / (np.linalg.norm(q[i]) * np.linalg.norm(g[j])))
                for j in range(len(g))]
        # ties rank the lower gallery index first
        rank = sum(1 for j in range(len(g)) if sims[j] > sims[i] or (sims[j] == sims[i] and j < i))
        hits += rank < k
    return hits / len(q)


@pytest.mark.parametrize('seed', [0, 1, 2])
def test_retrieval_matches_brute_force(seed):
    g = torch.Generator().manual_seed(seed)
    gallery = torch.randn(20, 8, generator=g, dtype=torch.float64)
    queries = gallery + 1.5 * torch.randn(20, 8, generator=g, dtype=torch.float64)
    report = retrieval_rk(queries, gallery, (1, 5, 10, 15))
    assert report.n_queries == 20
    for k in (1, 5, 10, 15):
        assert report.recall[k] == pytest.approx(brute_force_recall(queries, gallery, k))
    recalls = [report.recall[k] for k in (1, 5, 10, 15)]
    assert recalls == sorted(recalls)


def test_retrieval_identity():
    features = torch.randn(6, 2, 2, 2, dtype=torch.float64)
    report = retrieval_rk(features, features, (1, 3))
    assert report.recall == {1: 1.0, 3: 1.0}
    assert 'R@1' in report.json_data()['recall']


def test_retrieval_errors():
    with pytest.raises(ContractError):
        retrieval_rk(torch.zeros(3, 2), torch.zeros(4, 2))
    with pytest.raises(ContractError):
        retrieval_rk(torch.ones(3, 2), torch.ones(3, 2), (0,))


def test_ambiguous_accuracy():
    sources = ['a man sits near the bank', 'a dog sits near the tree', 'a cat sits by the bat']
    references = ['ein mann sitzt nahe dem ufer', 'ein hund sitzt nahe dem baum',
                  'ein katze sitzt bei dem schlaeger']
    hypotheses = ['ein mann sitzt nahe dem ufer', 'ein hund sitzt nahe dem auto',
                  'ein katze sitzt bei dem fledermaus']
    assert ambiguous_accuracy(sources, hypotheses, references) == 0.5

    metric = AmbiguousAccuracy()
    for source, hypothesis, reference in zip(sources, hypotheses, references):
        metric.accumulate(hypothesis, reference, source=source)
    assert metric.stats()['stats'] == [0.5, 2]

    with pytest.raises(ContractError):
        ambiguous_accuracy(sources, hypotheses[:2], references)
