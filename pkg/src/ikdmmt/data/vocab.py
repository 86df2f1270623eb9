import logging
from typing import Dict, Iterable, List, Sequence

from ..errors import FormatError, VocabularyIndexError

LOG = logging.getLogger(__name__)

PAD, UNK, BOS, EOS = '<pad>', '<unk>', '<bos>', '<eos>'
MASK = '[U]'
RESERVED = (PAD, UNK, BOS, EOS)
SPECIALS = RESERVED + (MASK,)


class Vocabulary:
    """Token to id map with reserved ids 0..3 and the mask token at id 4.

    >>> v = Vocabulary.build([['a', 'dog'], ['a', 'cat']])
    >>> v.encode(['a', 'cat', 'bird'])
    [5, 7, 1]
    >>> v.decode([5, 7])
    ['a', 'cat']
    """
    pad_id = 0
    unk_id = 1
    bos_id = 2
    eos_id = 3
    mask_id = 4

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:len(SPECIALS)]) != SPECIALS:
            raise FormatError('vocabulary must start with {}'.format(SPECIALS))
        self.tokens: List[str] = list(tokens)
        self.ids: Dict[str, int] = {}
        for i, token in enumerate(self.tokens):
            if token in self.ids:
                raise FormatError('duplicate vocabulary entry "{}"'.format(token))
            self.ids[token] = i

    @classmethod
    def build(cls, sentences: Iterable[Sequence[str]]):
        """Collect tokens in order of first occurrence after the specials."""
        seen = {t: None for t in SPECIALS}
        for sentence in sentences:
            for token in sentence:
                seen.setdefault(token, None)
        return cls(list(seen))

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.ids

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.ids.get(t, self.unk_id) for t in tokens]

    def decode(self, ids: Sequence[int], *, strip_specials=True) -> List[str]:
        tokens = []
        for i in ids:
            i = int(i)
            if not 0 <= i < len(self.tokens):
                raise VocabularyIndexError('id {} outside of vocabulary of size {}'.format(
                    i, len(self.tokens)))
            if strip_specials and i in (self.pad_id, self.bos_id, self.eos_id):
                continue
            tokens.append(self.tokens[i])
        return tokens

    def write(self, path):
        with open(path, 'w', encoding='utf8') as f:
            for token in self.tokens:
                f.write(token + '\n')
        LOG.info('vocabulary of %d entries written to %s', len(self), path)

    @classmethod
    def read(cls, path):
        with open(path, 'r', encoding='utf8') as f:
            tokens = [line.rstrip('\n') for line in f]
        return cls(tokens)
