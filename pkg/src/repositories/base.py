"""Base repository interface."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Generic, TypeVar

ModelType = TypeVar("ModelType")


class BaseRepository(ABC, Generic[ModelType]):
    """Abstract base repository over one directory on disk."""

    def __init__(self, root: Path) -> None:
        """Initialize repository with its root directory."""
        self.root = Path(root)

    @abstractmethod
    def save(self, entity: ModelType, **kwargs: Any) -> Path:
        """Persist an entity under the root; returns the written path."""
        ...

    @abstractmethod
    def get(self, id: Any) -> ModelType:
        """Get entity by ID; raises NotFoundError when absent."""
        ...

    @abstractmethod
    def list(self) -> list[str]:
        """List stored entity ids in sorted order."""
        ...

    def exists(self) -> bool:
        return self.root.is_dir()
