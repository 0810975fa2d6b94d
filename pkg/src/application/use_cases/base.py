"""Base use case class."""

from abc import ABC, abstractmethod
from typing import Any


class UseCase(ABC):
    """Base class for use cases."""

    @abstractmethod
    def execute(self, *args: Any, **kwargs: Any) -> Any:
        """Run the use case."""
