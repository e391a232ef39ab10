"""Evaluation reports: per-video scores against every reference, macro-averaged."""

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict, Field

from ..core.exceptions import ContractError
from .metrics import PRF, bleu2, multi_ref_prf, rouge_l, rouge_su4

Tokens = Sequence[str]


class VideoScore(BaseModel):
    """Scores of one synopsis; field order is the report's field order."""

    model_config = ConfigDict(frozen=True)

    rouge_su4: PRF
    rouge_l: PRF
    bleu2: float


class ReportMetadata(BaseModel):
    seed: int | None = None
    config_hash: str | None = None
    passes: int | None = None
    ablation: str | None = None
    references: int = 0


class EvalReport(BaseModel):
    per_video: dict[str, VideoScore] = Field(default_factory=dict)
    macro: VideoScore
    metadata: ReportMetadata = Field(default_factory=ReportMetadata)


def score_synopsis(candidate: Tokens, references: Sequence[Tokens]) -> VideoScore:
    """Each metric against each reference, averaged over references."""
    if not references:
        raise ContractError("a synopsis needs at least one reference to be scored")
    return VideoScore(
        rouge_su4=multi_ref_prf(candidate, references, rouge_su4),
        rouge_l=multi_ref_prf(candidate, references, rouge_l),
        bleu2=sum(bleu2([candidate], [ref]) for ref in references) / len(references),
    )


def _mean_prf(values: Sequence[PRF]) -> PRF:
    count = len(values)
    return PRF(
        precision=sum(v.precision for v in values) / count,
        recall=sum(v.recall for v in values) / count,
        f1=sum(v.f1 for v in values) / count,
    )


def macro_average(scores: Sequence[VideoScore]) -> VideoScore:
    if not scores:
        raise ContractError("nothing to average")
    return VideoScore(
        rouge_su4=_mean_prf([s.rouge_su4 for s in scores]),
        rouge_l=_mean_prf([s.rouge_l for s in scores]),
        bleu2=sum(s.bleu2 for s in scores) / len(scores),
    )


def build_report(
    per_video: dict[str, VideoScore],
    metadata: ReportMetadata | None = None,
) -> EvalReport:
    """Report with videos in id order."""
    ordered = {video: per_video[video] for video in sorted(per_video)}
    meta = metadata or ReportMetadata()
    return EvalReport(
        per_video=ordered, macro=macro_average(list(ordered.values())), metadata=meta
    )
