"""Text-overlap evaluation of synopses."""

from .metrics import (
    PRF,
    bleu2,
    lcs_length,
    multi_ref_f1,
    multi_ref_prf,
    rouge_l,
    rouge_su4,
    su_units,
)
from .report import EvalReport, ReportMetadata, VideoScore, build_report, score_synopsis

__all__ = [
    "PRF",
    "EvalReport",
    "ReportMetadata",
    "VideoScore",
    "bleu2",
    "build_report",
    "lcs_length",
    "multi_ref_f1",
    "multi_ref_prf",
    "rouge_l",
    "rouge_su4",
    "score_synopsis",
    "su_units",
]
