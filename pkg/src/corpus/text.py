"""Tokenization, vocabulary and captions."""

import json
import string
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from ..core.exceptions import ContractError, DomainError, FormatError, TokenIndexError

PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>")

_PUNCTUATION = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip ASCII punctuation from token ends."""
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_PUNCTUATION)
        if token:
            tokens.append(token)
    return tokens


@dataclass(frozen=True, slots=True)
class Caption:
    """An ordered token sequence without reserved tokens."""

    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "Caption":
        return cls(tuple(tokenize(text)))

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return self.text


class Vocabulary:
    """Bijective token <-> index map; indices 0..3 are PAD, BOS, EOS, UNK."""

    def __init__(self, tokens: Sequence[str]) -> None:
        if tuple(tokens[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ContractError("vocabulary must start with the reserved tokens")
        if len(set(tokens)) != len(tokens):
            raise ContractError("vocabulary tokens must be unique")
        self._tokens = tuple(tokens)
        self._index = {token: i for i, token in enumerate(self._tokens)}

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        return self._index.get(token, UNK)

    def token(self, index: int) -> str:
        if not 0 <= index < len(self._tokens):
            raise TokenIndexError(f"token index {index} outside [0, {len(self)})")
        return self._tokens[index]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to indices; unknown tokens become UNK."""
        return [self.index(token) for token in tokens]

    def decode(self, indices: Iterable[int]) -> list[str]:
        return [self.token(i) for i in indices]

    def save(self, path: Path) -> None:
        path.write_text(json.dumps({"tokens": list(self._tokens)}, indent=2) + "\n")

    @classmethod
    def load(cls, path: Path) -> "Vocabulary":
        try:
            payload = json.loads(path.read_text())
            return cls(payload["tokens"])
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise FormatError(
                f"unreadable vocabulary file: {e}", context={"path": str(path)}
            ) from e

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._tokens == other._tokens

    def __hash__(self) -> int:
        return hash(self._tokens)


def build_vocab(captions: Iterable[Sequence[str]], min_count: int = 1) -> Vocabulary:
    """Tokens seen at least ``min_count`` times, by descending frequency then text."""
    if min_count < 1:
        raise ContractError(f"min_count must be >= 1, got {min_count}")
    counts: Counter[str] = Counter()
    seen_any = False
    for caption in captions:
        seen_any = True
        counts.update(token for token in caption if token not in RESERVED_TOKENS)
    if not seen_any or not counts:
        raise DomainError("cannot build a vocabulary from an empty corpus")
    kept = sorted(
        (token for token, count in counts.items() if count >= min_count),
        key=lambda token: (-counts[token], token),
    )
    return Vocabulary([*RESERVED_TOKENS, *kept])
