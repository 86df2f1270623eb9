"""Greedy and beam-search decoding from source text alone."""

import dataclasses
from dataclasses import dataclass
import logging
from typing import List, Sequence

import torch

from .data.vocab import Vocabulary
from .errors import ContractError
from .network.backbone import EncoderOutput

LOG = logging.getLogger(__name__)


@dataclass
class Hypothesis:
    #: generated ids after <bos>, ending in <eos> when finished
    tokens: List[int]
    log_prob: float = 0.0

    @property
    def finished(self) -> bool:
        return bool(self.tokens) and self.tokens[-1] == Vocabulary.eos_id

    @property
    def score(self) -> float:
        """Length-normalized log-probability."""
        return self.log_prob / max(1, len(self.tokens))

    def output_ids(self) -> List[int]:
        return self.tokens[:-1] if self.finished else list(self.tokens)


def _check(model, beam, max_len):
    if beam < 1:
        raise ContractError('beam must be >= 1, got {}'.format(beam))
    if max_len < 1:
        raise ContractError('max_len must be >= 1, got {}'.format(max_len))
    if max_len > model.config.max_positions:
        raise ContractError('max_len {} exceeds max_positions {}'.format(
            max_len, model.config.max_positions))


def _source_tensor(source_ids: Sequence[int]):
    source = torch.as_tensor([list(source_ids)], dtype=torch.long)
    return source, source == Vocabulary.pad_id


def _expand(encoder_output: EncoderOutput, k: int) -> EncoderOutput:
    return dataclasses.replace(
        encoder_output,
        hidden=encoder_output.hidden.expand(k, -1, -1),
        pad_mask=encoder_output.pad_mask.expand(k, -1),
    )


def _next_log_probs(model, hypotheses: Sequence[Hypothesis], encoder_output) -> torch.Tensor:
    prefix = torch.as_tensor([[Vocabulary.bos_id] + h.tokens for h in hypotheses],
                             dtype=torch.long)
    logits = model.transformer.decode_logits(prefix, _expand(encoder_output, len(hypotheses)))
    return torch.log_softmax(logits[:, -1], dim=-1)


def encode_source(model, source_ids: Sequence[int]) -> EncoderOutput:
    source, pad_mask = _source_tensor(source_ids)
    return model.encode(source, pad_mask)


@torch.no_grad()
def decode_greedy(model, source_ids: Sequence[int], *, max_len=50) -> Hypothesis:
    """Argmax rollout; among equal logits the lower token id wins."""
    _check(model, 1, max_len)
    model.eval()
    encoder_output = encode_source(model, source_ids)
    hypothesis = Hypothesis([])
    while len(hypothesis.tokens) < max_len and not hypothesis.finished:
        log_probs = _next_log_probs(model, [hypothesis], encoder_output)[0]
        token = int(torch.argmax(log_probs))
        hypothesis = Hypothesis(hypothesis.tokens + [token],
                                hypothesis.log_prob + float(log_probs[token]))
    return hypothesis


@torch.no_grad()
def decode_beam(model, source_ids: Sequence[int], *, beam=4, max_len=50) -> Hypothesis:
    """Beam search over length-normalized scores.

    Candidates are ranked by accumulated log-probability with a stable sort,
    so ties go to the earlier hypothesis and then to the lower token id. The
    greedy rollout competes with the beam for the final pick.
    """
    _check(model, beam, max_len)
    greedy = decode_greedy(model, source_ids, max_len=max_len)
    if beam == 1:
        return greedy

    encoder_output = encode_source(model, source_ids)
    live = [Hypothesis([])]
    finished: List[Hypothesis] = []
    for _ in range(max_len):
        log_probs = _next_log_probs(model, live, encoder_output)
        vocab_size = log_probs.shape[1]
        totals = torch.as_tensor([h.log_prob for h in live], dtype=log_probs.dtype)[:, None] + log_probs
        _, order = torch.sort(totals.flatten(), descending=True, stable=True)

        next_live = []
        for flat_index in order[:beam].tolist():
            parent, token = divmod(flat_index, vocab_size)
            candidate = Hypothesis(live[parent].tokens + [token], float(totals[parent, token]))
            (finished if candidate.finished else next_live).append(candidate)
        live = next_live
        if not live or len(finished) >= beam:
            break

    candidates = finished + live + [greedy]
    best = candidates[0]
    for candidate in candidates[1:]:
        if candidate.score > best.score:
            best = candidate
    LOG.debug('beam %d: %d finished, best score %.4f (greedy %.4f)',
              beam, len(finished), best.score, greedy.score)
    return best


@torch.no_grad()
def score_hypothesis(model, source_ids: Sequence[int], tokens: Sequence[int]) -> float:
    """Length-normalized log-probability of ``tokens`` under teacher forcing."""
    if not tokens:
        raise ContractError('cannot score an empty hypothesis')
    model.eval()
    encoder_output = encode_source(model, source_ids)
    prefix = torch.as_tensor([[Vocabulary.bos_id] + list(tokens[:-1])], dtype=torch.long)
    log_probs = torch.log_softmax(model.transformer.decode_logits(prefix, encoder_output), dim=-1)
    target = torch.as_tensor(list(tokens), dtype=torch.long)
    return float(log_probs[0, torch.arange(len(tokens)), target].sum()) / len(tokens)
