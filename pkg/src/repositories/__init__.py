"""Repository pattern implementations."""

from .corpus import CorpusRepository
from .model import ModelRepository

__all__ = ["CorpusRepository", "ModelRepository"]
