"""OpenAI-compatible chat-completions backend over HTTP.

This module talks to any endpoint exposing ``POST {base}/chat/completions``
(OpenAI, vLLM, llama.cpp server and similar) using httpx.
"""

import asyncio
import logging
from typing import Any, Awaitable, Callable, Dict, Optional, Tuple

import httpx

from segment_plus.config import api_base, api_key
from segment_plus.models import BackendRequest, BackendResponse, Usage
from segment_plus.utils import (
    BackendRejected,
    BackendTimeout,
    BackendUnavailable,
    ConfigInvalid,
)

from ..abstract import AbstractBackend

logger = logging.getLogger(__name__)

RETRY_DELAYS = (1.0, 2.0, 4.0)
RETRYABLE_STATUS = {408, 409, 429}


def _retryable(status: int) -> bool:
    return status in RETRYABLE_STATUS or status >= 500


class HttpBackend(AbstractBackend):
    """Chat-completions backend for a live model endpoint.

    The whole rendered prompt is sent as a single user message. Timeouts,
    transport errors, 429 and 5xx responses are retried with exponential
    backoff; other client errors fail immediately.

    Example:
        ```python
        async with HttpBackend(model="gpt-3.5-turbo") as backend:
            response = await backend.complete(request)
        ```
    """

    def __init__(
        self,
        model: str,
        base_url: Optional[str] = None,
        api_key_value: Optional[str] = None,
        timeout: float = 60.0,
        retry_delays: Tuple[float, ...] = RETRY_DELAYS,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ):
        """Initialize the backend.

        Args:
            model: Model name sent in the request body.
            base_url: Endpoint base URL (defaults to ``SEGPLUS_API_BASE``).
            api_key_value: Bearer credential (defaults to ``SEGPLUS_API_KEY``).
            timeout: Per-request timeout in seconds.
            retry_delays: Delay before each retry; its length is the retry cap.
            transport: Optional httpx transport, used by tests.
            sleep: Coroutine used to wait between retries.

        Raises:
            ConfigInvalid: If no credential is available.
        """
        self.model = model
        self.base_url = (base_url or api_base()).rstrip("/")
        key = api_key_value or api_key()
        if not key:
            raise ConfigInvalid("SEGPLUS_API_KEY", "SEGPLUS_API_KEY is not set")
        self._retry_delays = tuple(retry_delays)
        self._sleep = sleep
        self._client = httpx.AsyncClient(
            base_url=self.base_url,
            timeout=timeout,
            headers={"Authorization": f"Bearer {key}"},
            transport=transport,
        )
        logger.info(f"HTTP backend initialized for {self.base_url} (model={model})")

    @property
    def is_oracle(self) -> bool:
        """Check if this is a scripted oracle backend."""
        return False

    async def aclose(self) -> None:
        """Close the underlying HTTP client."""
        await self._client.aclose()

    def _body(self, request: BackendRequest) -> Dict[str, Any]:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_output_tokens,
        }

    @staticmethod
    def _parse(response: httpx.Response, attempts: int) -> BackendResponse:
        try:
            payload: Dict[str, Any] = response.json()
        except ValueError as e:
            raise BackendRejected(
                response.status_code, f"Completion body is not JSON: {response.text[:200]!r}"
            ) from e
        try:
            text = payload["choices"][0]["message"]["content"] or ""
            usage = payload.get("usage") or {}
            return BackendResponse(
                text=text,
                usage=Usage(
                    prompt_tokens=int(usage.get("prompt_tokens") or 0),
                    completion_tokens=int(usage.get("completion_tokens") or 0),
                ),
                attempts=attempts,
            )
        except (KeyError, IndexError, TypeError, AttributeError, ValueError) as e:
            raise BackendRejected(
                response.status_code, f"Malformed completion payload: {e}"
            ) from e

    async def complete(self, request: BackendRequest) -> BackendResponse:
        """POST the prompt, retrying transient failures."""
        body = self._body(request)
        max_attempts = len(self._retry_delays) + 1
        last_error: Optional[Exception] = None
        timed_out = False

        for attempt in range(1, max_attempts + 1):
            try:
                response = await self._client.post("/chat/completions", json=body)
            except httpx.TimeoutException as e:
                last_error, timed_out = e, True
            except httpx.TransportError as e:
                last_error, timed_out = e, False
            else:
                if response.status_code < 400:
                    return self._parse(response, attempt)
                if not _retryable(response.status_code):
                    raise BackendRejected(response.status_code, response.text[:200])
                last_error = BackendUnavailable(f"HTTP {response.status_code}")
                timed_out = False

            if attempt < max_attempts:
                delay = self._retry_delays[attempt - 1]
                logger.warning(
                    f"{request.stage.value} call attempt {attempt}/{max_attempts} "
                    f"failed ({last_error!r}); retrying in {delay:.0f}s"
                )
                await self._sleep(delay)

        if timed_out:
            raise BackendTimeout(f"Timed out after {max_attempts} attempts: {last_error}")
        raise BackendUnavailable(f"Request failed after {max_attempts} attempts: {last_error}")
