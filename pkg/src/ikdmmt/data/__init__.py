"""Corpus ingestion, vocabulary, batching and the synthetic corpus."""

from .batch import Batch, batchify, collate_triplets, loader, pad_ids
from .corpus import (
    TripletExample,
    load_corpus,
    load_prefix,
    make_example,
    mask_tokens,
    masked_fraction,
    read_lines,
    source_examples,
    tokenize,
    write_corpus,
)
from .synthetic import synth_generate, SyntheticCorpus
from .vocab import Vocabulary
from . import synthetic
