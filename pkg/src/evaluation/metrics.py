"""Text-overlap scores between token sequences.

Documents are flat token sequences; no stemming or stopword removal.
"""

import math
from collections import Counter
from collections.abc import Callable, Hashable, Sequence

from pydantic import BaseModel, ConfigDict

from ..core.exceptions import ContractError

BLEU_EPSILON = 1e-9
SKIP_GAP = 4

Tokens = Sequence[str]


class PRF(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0

    @classmethod
    def from_counts(cls, overlap: int, candidate: int, reference: int) -> "PRF":
        if candidate == 0 or reference == 0:
            return cls()
        precision = overlap / candidate
        recall = overlap / reference
        if precision + recall == 0:
            return cls(precision=precision, recall=recall, f1=0.0)
        return cls(
            precision=precision,
            recall=recall,
            f1=2 * precision * recall / (precision + recall),
        )


def lcs_length(a: Tokens, b: Tokens) -> int:
    """Longest common subsequence length, O(|a| |b|) with one rolling row."""
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: Tokens, reference: Tokens) -> PRF:
    if not candidate or not reference:
        return PRF()
    overlap = lcs_length(candidate, reference)
    return PRF.from_counts(overlap, len(candidate), len(reference))


def su_units(tokens: Tokens, gap: int = SKIP_GAP) -> Counter[Hashable]:
    """Unigrams plus ordered pairs at most ``gap`` tokens apart."""
    units: Counter[Hashable] = Counter((token,) for token in tokens)
    for i, first in enumerate(tokens):
        for j in range(i + 1, min(len(tokens), i + gap + 2)):
            units[(first, tokens[j])] += 1
    return units


def rouge_su4(candidate: Tokens, reference: Tokens) -> PRF:
    if not candidate or not reference:
        return PRF()
    cand = su_units(candidate)
    ref = su_units(reference)
    overlap = sum((cand & ref).values())
    return PRF.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def _ngrams(tokens: Tokens, n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu2(candidates: Sequence[Tokens], references: Sequence[Tokens]) -> float:
    """Corpus-level BLEU with 1- and 2-gram clipped precisions and a brevity penalty."""
    if len(candidates) != len(references):
        raise ContractError(
            f"{len(candidates)} candidates but {len(references)} references",
            error_code="LENGTH_MISMATCH",
        )
    matches = [0, 0]
    totals = [0, 0]
    cand_length = 0
    ref_length = 0
    for candidate, reference in zip(candidates, references):
        cand_length += len(candidate)
        ref_length += len(reference)
        for n in (1, 2):
            cand = _ngrams(candidate, n)
            matches[n - 1] += sum((cand & _ngrams(reference, n)).values())
            totals[n - 1] += sum(cand.values())
    if cand_length == 0:
        return 0.0
    log_precision = 0.0
    for matched, total in zip(matches, totals):
        precision = matched / total if total else 0.0
        log_precision += math.log(precision if matched else BLEU_EPSILON) / 2
    penalty = 1.0
    if cand_length < ref_length:
        penalty = math.exp(1 - ref_length / cand_length)
    return penalty * math.exp(log_precision)


Metric = Callable[[Tokens, Tokens], PRF]


def multi_ref_prf(
    candidate: Tokens, references: Sequence[Tokens], metric: Metric
) -> PRF:
    """Component-wise mean of ``metric`` against each reference."""
    if not references:
        raise ContractError("at least one reference is required")
    scores = [metric(candidate, reference) for reference in references]
    count = len(scores)
    return PRF(
        precision=sum(s.precision for s in scores) / count,
        recall=sum(s.recall for s in scores) / count,
        f1=sum(s.f1 for s in scores) / count,
    )


def multi_ref_f1(
    candidate: Tokens, references: Sequence[Tokens], metric: Metric
) -> float:
    return multi_ref_prf(candidate, references, metric).f1
