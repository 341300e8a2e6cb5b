"""Narrow interfaces to external services, with mock and replay variants.

Tests never touch the network: they use `Mock*` clients scripted inline or
`Replay*` clients backed by a recorded JSON cache. The HTTP variants read
their endpoint and credential from the environment.
"""

from __future__ import annotations

import json
import os
from typing import Callable, Protocol

CHAT_ENDPOINT_ENV = "FORGE_CHAT_ENDPOINT"
CHAT_API_KEY_ENV = "FORGE_CHAT_API_KEY"
SEARCH_ENDPOINT_ENV = "FORGE_SEARCH_ENDPOINT"


class ClientError(RuntimeError):
    """A client call failed or refused."""


class ChatClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class SearchClient(Protocol):
    def search(self, query: str, k: int) -> list[str]: ...


class PageClient(Protocol):
    def fetch(self, url: str) -> str: ...


class MockChatClient:
    """Scripted completions; records every prompt it sees."""

    def __init__(self, responses: list[str] | Callable[[str], str]):
        self._responses = responses
        self._cursor = 0
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if callable(self._responses):
            return self._responses(prompt)
        if self._cursor >= len(self._responses):
            raise ClientError("mock chat client ran out of scripted responses")
        out = self._responses[self._cursor]
        self._cursor += 1
        return out


class MockSearchClient:
    def __init__(self, results: dict[str, list[str]], failures_before_success: int = 0):
        self._results = results
        self._failures_left = failures_before_success
        self.queries: list[str] = []

    def search(self, query: str, k: int) -> list[str]:
        self.queries.append(query)
        if self._failures_left > 0:
            self._failures_left -= 1
            raise ClientError("transient search failure")
        if query not in self._results:
            return []
        return list(self._results[query])[: max(k, 0) or None]


class MockPageClient:
    def __init__(self, pages: dict[str, str]):
        self._pages = pages

    def fetch(self, url: str) -> str:
        if url not in self._pages:
            raise ClientError(f"no page recorded for {url}")
        return self._pages[url]


class ReplayChatClient:
    """Replays completions from a prompt -> response JSON cache file."""

    def __init__(self, cache_path: str | os.PathLike):
        with open(cache_path, "r", encoding="utf-8") as fh:
            self._cache: dict[str, str] = json.load(fh)

    def complete(self, prompt: str) -> str:
        if prompt not in self._cache:
            raise ClientError("prompt not present in replay cache")
        return self._cache[prompt]


class HttpChatClient:
    """POSTs {"prompt": ...} to the configured endpoint; expects {"completion": ...}."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get(CHAT_ENDPOINT_ENV)
        self.api_key = api_key or os.environ.get(CHAT_API_KEY_ENV)
        self.timeout = timeout
        if not self.endpoint:
            raise ClientError(
                f"chat endpoint not configured; set {CHAT_ENDPOINT_ENV} or pass --mock"
            )

    def complete(self, prompt: str) -> str:
        import httpx

        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            resp = httpx.post(
                self.endpoint, json={"prompt": prompt}, headers=headers, timeout=self.timeout
            )
            resp.raise_for_status()
            return str(resp.json()["completion"])
        except Exception as err:  # noqa: BLE001 - surface every transport failure uniformly
            raise ClientError(f"chat completion failed: {err}") from err


class HttpSearchClient:
    """POSTs {"query": ..., "k": ...} to the configured endpoint; expects {"urls": [...]}."""

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get(SEARCH_ENDPOINT_ENV)
        self.timeout = timeout
        if not self.endpoint:
            raise ClientError(
                f"search endpoint not configured; set {SEARCH_ENDPOINT_ENV} or pass --mock"
            )

    def search(self, query: str, k: int) -> list[str]:
        import httpx

        try:
            resp = httpx.post(
                self.endpoint, json={"query": query, "k": k}, timeout=self.timeout
            )
            resp.raise_for_status()
            return [str(u) for u in resp.json()["urls"]]
        except Exception as err:  # noqa: BLE001
            raise ClientError(f"search failed: {err}") from err


class HttpPageClient:
    def __init__(self, timeout: float = 30.0):
        self.timeout = timeout

    def fetch(self, url: str) -> str:
        import httpx

        try:
            resp = httpx.get(url, timeout=self.timeout, follow_redirects=True)
            resp.raise_for_status()
            return resp.text
        except Exception as err:  # noqa: BLE001
            raise ClientError(f"page fetch failed: {err}") from err
