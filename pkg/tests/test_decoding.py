import inspect

import numpy as np
import pytest

from ikdmmt import decoding
from ikdmmt.data import Vocabulary
from ikdmmt.errors import ContractError
from ikdmmt.translator import Translator

SOURCES = [[5, 6, 7], [8, 9], [10, 11, 12, 13], [5]]


@pytest.mark.parametrize('source', SOURCES)
@pytest.mark.parametrize('beam', [2, 4])
def test_beam_at_least_greedy(tiny_model, source, beam):
    greedy = decoding.decode_greedy(tiny_model, source, max_len=8)
    best = decoding.decode_beam(tiny_model, source, beam=beam, max_len=8)
    assert best.score >= greedy.score
    assert len(best.tokens) <= 8


@pytest.mark.parametrize('source', SOURCES)
def test_beam_one_is_greedy(tiny_model, source):
    greedy = decoding.decode_greedy(tiny_model, source, max_len=8)
    assert decoding.decode_beam(tiny_model, source, beam=1, max_len=8) == greedy


@pytest.mark.parametrize('source', SOURCES)
def test_scores_agree_with_teacher_forcing(tiny_model, source):
    greedy = decoding.decode_greedy(tiny_model, source, max_len=8)
    np.testing.assert_allclose(
        decoding.score_hypothesis(tiny_model, source, greedy.tokens), greedy.score, rtol=1e-9)


def test_hypothesis():
    finished = decoding.Hypothesis([7, 8, Vocabulary.eos_id], -3.0)
    assert finished.finished
    assert finished.output_ids() == [7, 8]
    assert finished.score == -1.0
    live = decoding.Hypothesis([7, 8], -3.0)
    assert not live.finished
    assert live.output_ids() == [7, 8]


def test_decode_errors(tiny_model):
    with pytest.raises(ContractError):
        decoding.decode_beam(tiny_model, [5], beam=0)
    with pytest.raises(ContractError):
        decoding.decode_greedy(tiny_model, [5], max_len=0)
    with pytest.raises(ContractError):
        decoding.decode_greedy(tiny_model, [5], max_len=tiny_model.config.max_positions + 1)
    with pytest.raises(ContractError):
        decoding.score_hypothesis(tiny_model, [5], [])


def test_translator(tiny_model, synthetic):
    corpus, vocab, _ = synthetic
    translator = Translator(tiny_model, vocab, beam=2, max_len=6)
    hypotheses = translator.translate_lines(corpus.sources[:3])
    assert len(hypotheses) == 3
    for hypothesis in hypotheses:
        assert len(hypothesis.split()) <= 6
        assert '<eos>' not in hypothesis.split()

    with pytest.raises(ContractError):
        translator.translate_lines(['a dog', ''])
    with pytest.raises(ContractError):
        Translator(tiny_model, Vocabulary.build([['a']]))


def test_translator_length_within_positions(tiny_model, synthetic):
    corpus, vocab, _ = synthetic
    assert tiny_model.config.max_positions < 50
    translator = Translator(tiny_model, vocab)
    assert translator.max_len == tiny_model.config.max_positions
    assert len(translator.translate_lines(corpus.sources[:1])) == 1

    with pytest.raises(ContractError):
        Translator(tiny_model, vocab, max_len=50).translate_lines(corpus.sources[:1])


@pytest.mark.parametrize('function', [
    decoding.decode_greedy,
    decoding.decode_beam,
    Translator.__init__,
    Translator.from_checkpoint,
    Translator.translate_ids,
    Translator.translate_tokens,
    Translator.translate_lines,
])
def test_inference_takes_no_image(function):
    parameters = inspect.signature(function).parameters
    assert not any('image' in name for name in parameters)
