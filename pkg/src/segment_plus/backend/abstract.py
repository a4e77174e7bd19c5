"""Abstract backend interface for language-model calls.

This module defines the interface that both the HTTP (real model) and the
oracle (scripted) backends implement, so the pipeline can switch between a
live endpoint and fully offline runs without code changes.
"""

from abc import ABC, abstractmethod

from segment_plus.models import BackendRequest, BackendResponse


class AbstractBackend(ABC):
    """Abstract language-model backend.

    Implementations must be safe to call from many asyncio tasks at once;
    the pipeline bounds the number of in-flight calls.
    """

    @property
    @abstractmethod
    def is_oracle(self) -> bool:
        """Check if this is a scripted oracle backend.

        Returns:
            True if responses are scripted rather than model generated.
        """
        pass

    @abstractmethod
    async def complete(self, request: BackendRequest) -> BackendResponse:
        """Send one prompt and return the model text.

        Args:
            request: Stage-tagged prompt and sampling parameters.

        Returns:
            Model text with usage and attempt count.

        Raises:
            BackendUnavailable: If retries are exhausted.
            BackendRejected: On a non-retryable status.
            BackendTimeout: If every attempt timed out.
        """
        pass

    async def aclose(self) -> None:
        """Release transport resources.

        Default implementation does nothing.
        """
        pass

    async def __aenter__(self) -> "AbstractBackend":
        return self

    async def __aexit__(self, exc_type: object, exc_val: object, exc_tb: object) -> None:
        await self.aclose()
