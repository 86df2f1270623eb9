"""Seeded disambiguation corpus with rendered images.

Every sentence follows ``a <adj> <noun> <verb> <prep> the <object>``. When the
object is ambiguous, its translation is chosen by the colour of a square patch
rendered into the paired image; all other words translate by a fixed
dictionary.
"""

from dataclasses import dataclass
import logging
from typing import List, Optional

import numpy as np

from ..errors import ContractError

LOG = logging.getLogger(__name__)

DICTIONARY = {
    'a': 'ein',
    'the': 'dem',
    # adjectives
    'red': 'rot', 'blue': 'blau', 'green': 'gruen', 'yellow': 'gelb',
    'small': 'klein', 'old': 'alt', 'young': 'jung', 'tall': 'gross',
    # subjects
    'man': 'mann', 'woman': 'frau', 'dog': 'hund', 'child': 'kind',
    'boy': 'junge', 'girl': 'maedchen', 'worker': 'arbeiter', 'cat': 'katze',
    # verbs
    'sits': 'sitzt', 'stands': 'steht', 'waits': 'wartet', 'walks': 'geht',
    'plays': 'spielt', 'rests': 'ruht',
    # prepositions
    'near': 'nahe', 'by': 'bei',
    # unambiguous objects
    'tree': 'baum', 'wall': 'mauer', 'car': 'auto', 'house': 'haus',
}

#: source word -> (translation under SENSE_COLORS[0], under SENSE_COLORS[1])
AMBIGUOUS = {
    'bank': ('ufer', 'bank'),
    'bat': ('fledermaus', 'schlaeger'),
    'court': ('hof', 'gericht'),
    'glasses': ('glaeser', 'brille'),
}

SENSE_COLORS = (
    (1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0),
)

ADJECTIVES = ('red', 'blue', 'green', 'yellow', 'small', 'old', 'young', 'tall')
SUBJECTS = ('man', 'woman', 'dog', 'child', 'boy', 'girl', 'worker', 'cat')
VERBS = ('sits', 'stands', 'waits', 'walks', 'plays', 'rests')
PREPOSITIONS = ('near', 'by')
OBJECTS = ('tree', 'wall', 'car', 'house')

COLOR_TOKENS = ('red', 'blue', 'green', 'yellow')
ENTITY_TOKENS = SUBJECTS + OBJECTS + tuple(AMBIGUOUS)

MASK_SETS = {
    'colors': COLOR_TOKENS,
    'entities': ENTITY_TOKENS,
}


@dataclass
class SyntheticCorpus:
    sources: List[str]
    targets: List[str]
    #: 3 x H x W float arrays in [0, 1]
    images: List[np.ndarray]
    #: sense index per sentence, None without ambiguous word
    senses: List[Optional[int]]


def render_image(rng: np.random.Generator, color, image_size: int) -> np.ndarray:
    image = np.clip(0.5 + 0.1 * rng.standard_normal((3, image_size, image_size)), 0.0, 1.0)
    patch = max(1, image_size // 4)
    y, x = rng.integers(0, image_size - patch + 1, size=2)
    image[:, y:y + patch, x:x + patch] = np.asarray(color)[:, None, None]
    return image


def synth_generate(n: int, seed: int, ambiguity_rate=1.0, *,
                   image_size=32) -> SyntheticCorpus:
    if n <= 0:
        raise ContractError('number of examples must be positive, got {}'.format(n))
    if not 0.0 <= ambiguity_rate <= 1.0:
        raise ContractError('ambiguity_rate must be in [0, 1], got {}'.format(ambiguity_rate))

    rng = np.random.default_rng(seed)
    ambiguous_words = sorted(AMBIGUOUS)
    corpus = SyntheticCorpus([], [], [], [])
    for _ in range(n):
        adjective = ADJECTIVES[rng.integers(len(ADJECTIVES))]
        subject = SUBJECTS[rng.integers(len(SUBJECTS))]
        verb = VERBS[rng.integers(len(VERBS))]
        preposition = PREPOSITIONS[rng.integers(len(PREPOSITIONS))]
        sense = int(rng.integers(2))

        if rng.random() < ambiguity_rate:
            obj = ambiguous_words[rng.integers(len(ambiguous_words))]
            obj_translation = AMBIGUOUS[obj][sense]
            corpus.senses.append(sense)
        else:
            obj = OBJECTS[rng.integers(len(OBJECTS))]
            obj_translation = DICTIONARY[obj]
            corpus.senses.append(None)

        source = ['a', adjective, subject, verb, preposition, 'the', obj]
        target = [DICTIONARY[w] for w in source[:-1]] + [obj_translation]
        corpus.sources.append(' '.join(source))
        corpus.targets.append(' '.join(target))
        corpus.images.append(render_image(rng, SENSE_COLORS[sense], image_size))

    LOG.info('generated %d synthetic examples (seed = %d, ambiguity rate = %.2f)',
             n, seed, ambiguity_rate)
    return corpus
