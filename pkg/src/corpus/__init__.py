"""Corpus data model, text handling, file formats and synthetic generation."""

from .io import (
    annotation_records,
    decode_features,
    encode_features,
    load_features,
    read_jsonl,
    reference_records,
    save_features,
    write_jsonl,
)
from .models import (
    AnnotationRecord,
    CaptionRecord,
    ReferenceRecord,
    Shot,
    Video,
    caption_pool,
)
from .split import leave_one_out, train_test_split
from .synthetic import SyntheticSpec, default_templates, generate_synthetic
from .text import (
    BOS,
    EOS,
    PAD,
    RESERVED_TOKENS,
    UNK,
    Caption,
    Vocabulary,
    build_vocab,
    tokenize,
)

__all__ = [
    "BOS",
    "EOS",
    "PAD",
    "RESERVED_TOKENS",
    "UNK",
    "AnnotationRecord",
    "Caption",
    "CaptionRecord",
    "ReferenceRecord",
    "Shot",
    "SyntheticSpec",
    "Video",
    "Vocabulary",
    "annotation_records",
    "build_vocab",
    "caption_pool",
    "decode_features",
    "default_templates",
    "encode_features",
    "generate_synthetic",
    "leave_one_out",
    "load_features",
    "read_jsonl",
    "reference_records",
    "save_features",
    "tokenize",
    "train_test_split",
    "write_jsonl",
]
