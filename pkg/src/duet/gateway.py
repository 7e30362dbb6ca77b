"""Pluggable clients for image-to-PlantUML conversion and text generation.

Both clients speak a chat-completion style JSON wire format, so hosted and
locally served models work behind the same configuration. All network
activity funnels through a single injectable transport callable, which is
how tests count attempts and how offline mode can guarantee that none
happen. API keys never appear in logs or serialized form.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import random
import re
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .errors import (
    NoDiagramInResponseError,
    OfflineModeError,
    TemplateNotFoundError,
    TransportError,
    UnsupportedImageError,
)
from .model import DiagramKind
from .resources import templates_root

MAX_IMAGE_BYTES = 10 * 1024 * 1024

ENV_VISION_ENDPOINT = "DUET_VISION_ENDPOINT"
ENV_VISION_MODEL = "DUET_VISION_MODEL"
ENV_VISION_KEY = "DUET_VISION_KEY"
ENV_TEXT_ENDPOINT = "DUET_TEXT_ENDPOINT"
ENV_TEXT_MODEL = "DUET_TEXT_MODEL"
ENV_TEXT_KEY = "DUET_TEXT_KEY"
ENV_OFFLINE = "DUET_OFFLINE"

PROMPT_KEYS = ("convert.class", "convert.er", "paraphrase.student", "paraphrase.educator")

_BLOCK = re.compile(r"@startuml.*?@enduml", re.DOTALL)


@dataclass(frozen=True)
class GatewayConfig:
    vision_endpoint: str = ""
    vision_model: str = ""
    text_endpoint: str = ""
    text_model: str = ""
    vision_key: str = field(default="", repr=False)
    text_key: str = field(default="", repr=False)
    offline: bool = False
    timeout: float = 30.0
    max_retries: int = 3

    @classmethod
    def from_env(cls, environ=None) -> "GatewayConfig":
        env = os.environ if environ is None else environ
        return cls(
            vision_endpoint=env.get(ENV_VISION_ENDPOINT, ""),
            vision_model=env.get(ENV_VISION_MODEL, ""),
            text_endpoint=env.get(ENV_TEXT_ENDPOINT, ""),
            text_model=env.get(ENV_TEXT_MODEL, ""),
            vision_key=env.get(ENV_VISION_KEY, ""),
            text_key=env.get(ENV_TEXT_KEY, ""),
            offline=env.get(ENV_OFFLINE, "") == "1",
        )

    def to_public_dict(self) -> dict:
        """Serializable view; key material is reduced to a set/unset flag."""
        return {
            "vision_endpoint": self.vision_endpoint,
            "vision_model": self.vision_model,
            "text_endpoint": self.text_endpoint,
            "text_model": self.text_model,
            "vision_key_set": bool(self.vision_key),
            "text_key_set": bool(self.text_key),
            "offline": self.offline,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
        }


@dataclass(frozen=True)
class ConversionResult:
    plantuml: str
    model_id: str
    raw_response_digest: str


def extract_plantuml_block(text: str) -> str:
    """Return the first @startuml...@enduml span exactly as it appears."""
    match = _BLOCK.search(text)
    if not match:
        raise NoDiagramInResponseError(
            "response contains no @startuml/@enduml block"
        )
    return match.group(0)


def _sniff_image(image: bytes) -> str:
    if image[:8] == b"\x89PNG\r\n\x1a\n":
        return "image/png"
    if image[:3] == b"\xff\xd8\xff":
        return "image/jpeg"
    raise UnsupportedImageError("image must be PNG or JPEG")


def http_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    """Default transport: one JSON POST; failures become TransportError."""
    import httpx

    try:
        response = httpx.post(url, json=payload, headers=headers, timeout=timeout)
        response.raise_for_status()
        return response.json()
    except TransportError:
        raise
    except Exception as exc:
        raise TransportError(str(exc)) from exc


def chat_response(content: str) -> dict:
    """Build a chat-completion response body; handy for mocks and fixtures."""
    return {"choices": [{"message": {"content": content}}]}


class MockTransport:
    """Scripted transport for tests and offline development.

    `outcomes` is consumed one per attempt; an Exception instance is raised,
    anything else is returned as the response body. The last outcome repeats
    once the script is exhausted. Every attempt is recorded.
    """

    def __init__(self, outcomes):
        self._outcomes = list(outcomes)
        self.calls = []

    @property
    def attempts(self) -> int:
        return len(self.calls)

    def __call__(self, url, payload, headers, timeout):
        self.calls.append({"url": url, "payload": payload, "headers": dict(headers)})
        index = min(len(self.calls) - 1, len(self._outcomes) - 1)
        outcome = self._outcomes[index]
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


class NetworkSentinel:
    """Transport stand-in that fails the suite on any network attempt."""

    def __init__(self):
        self.attempts = 0

    def __call__(self, url, payload, headers, timeout):
        self.attempts += 1
        raise TransportError(f"network attempt blocked by sentinel: {url}")


class LlmGateway:
    """Immutable client pair for vision conversion and text generation."""

    def __init__(
        self,
        config: GatewayConfig,
        transport: Optional[Callable] = None,
        sleeper: Optional[Callable] = None,
        rng: Optional[random.Random] = None,
        templates_dir=None,
    ):
        self.config = config
        self._transport = transport or http_transport
        self._sleeper = sleeper or time.sleep
        self._rng = rng or random.Random()
        self._templates_dir = templates_dir

    def with_vision_key(self, key: str) -> "LlmGateway":
        """Clone with a per-request vision key; the key is never persisted."""
        return LlmGateway(
            replace(self.config, vision_key=key),
            transport=self._transport,
            sleeper=self._sleeper,
            rng=self._rng,
            templates_dir=self._templates_dir,
        )

    def load_prompt_template(self, key: str) -> str:
        if key not in PROMPT_KEYS:
            raise TemplateNotFoundError(f"unknown prompt template key {key!r}")
        path = templates_root(self._templates_dir) / "prompts" / f"{key}.prompt"
        if not path.is_file():
            raise TemplateNotFoundError(f"prompt template file missing: {path}")
        return path.read_text(encoding="utf-8")

    def _call(self, endpoint: str, payload: dict, api_key: str) -> dict:
        if not endpoint:
            raise TransportError("no endpoint configured")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        attempts = max(1, self.config.max_retries)
        last_error: Optional[Exception] = None
        for attempt in range(attempts):
            try:
                return self._transport(endpoint, payload, headers, self.config.timeout)
            except TransportError as exc:
                last_error = exc
                if attempt + 1 < attempts:
                    # 1s / 2s / 4s backoff with +-20% jitter
                    delay = (2 ** attempt) * self._rng.uniform(0.8, 1.2)
                    self._sleeper(delay)
        raise TransportError(
            f"all {attempts} attempts failed: {last_error}"
        ) from last_error

    @staticmethod
    def _completion_text(response: dict) -> str:
        try:
            return response["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc

    def convert_image(self, image: bytes, kind: DiagramKind) -> ConversionResult:
        """Send an image through the vision endpoint; return the first
        PlantUML block found in the completion."""
        if self.config.offline:
            raise OfflineModeError("image conversion requires network access")
        if len(image) > MAX_IMAGE_BYTES:
            raise UnsupportedImageError(
                f"image exceeds {MAX_IMAGE_BYTES // (1024 * 1024)} MiB"
            )
        mime = _sniff_image(image)
        prompt_key = "convert.er" if kind == DiagramKind.ER else "convert.class"
        prompt = self.load_prompt_template(prompt_key)
        data_url = f"data:{mime};base64,{base64.b64encode(image).decode('ascii')}"
        payload = {
            "model": self.config.vision_model,
            "messages": [
                {
                    "role": "user",
                    "content": [
                        {"type": "text", "text": prompt},
                        {"type": "image_url", "image_url": {"url": data_url}},
                    ],
                }
            ],
        }
        response = self._call(
            self.config.vision_endpoint, payload, self.config.vision_key
        )
        text = self._completion_text(response)
        digest = hashlib.sha256(
            json.dumps(response, sort_keys=True).encode("utf-8")
        ).hexdigest()
        return ConversionResult(
            plantuml=extract_plantuml_block(text),
            model_id=self.config.vision_model,
            raw_response_digest=digest,
        )

    def generate_text(self, prompt: str) -> str:
        """Plain completion through the text endpoint."""
        if self.config.offline:
            raise OfflineModeError("text generation requires network access")
        payload = {
            "model": self.config.text_model,
            "messages": [{"role": "user", "content": prompt}],
        }
        response = self._call(self.config.text_endpoint, payload, self.config.text_key)
        return self._completion_text(response)
