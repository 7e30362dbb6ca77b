import base64
import logging

import pytest

from duet.errors import (
    NoDiagramInResponseError,
    OfflineModeError,
    TemplateNotFoundError,
    TransportError,
    UnsupportedImageError,
)
from duet.gateway import (
    GatewayConfig,
    LlmGateway,
    MAX_IMAGE_BYTES,
    MockTransport,
    NetworkSentinel,
    chat_response,
    extract_plantuml_block,
)
from duet.model import DiagramKind

PNG = b"\x89PNG\r\n\x1a\n" + b"\x00" * 32
JPEG = b"\xff\xd8\xff\xe0" + b"\x00" * 32

VISION_CONFIG = GatewayConfig(
    vision_endpoint="http://localhost/v1/chat",
    vision_model="vision-model",
    vision_key="secret-vision-key",
    text_endpoint="http://localhost/v1/chat",
    text_model="text-model",
    text_key="secret-text-key",
)


def _gateway(outcomes, config=VISION_CONFIG):
    transport = MockTransport(outcomes)
    gateway = LlmGateway(config, transport=transport, sleeper=lambda _s: None)
    return gateway, transport


class TestBlockExtraction:
    def test_first_block_returned_exactly(self):
        text = "noise\n@startuml\nclass A\n@enduml\nmore\n@startuml\nclass B\n@enduml"
        assert extract_plantuml_block(text) == "@startuml\nclass A\n@enduml"

    def test_prose_only(self):
        with pytest.raises(NoDiagramInResponseError):
            extract_plantuml_block("I could not read the image, sorry.")


class TestConvertImage:
    def test_offline_refuses(self):
        gateway, transport = _gateway([], GatewayConfig(offline=True))
        with pytest.raises(OfflineModeError):
            gateway.convert_image(PNG, DiagramKind.CLASS)
        assert transport.attempts == 0

    def test_block_extracted_from_response(self):
        body = chat_response("Here you go:\n@startuml\nclass A\n@enduml\nEnjoy.")
        gateway, transport = _gateway([body])
        result = gateway.convert_image(PNG, DiagramKind.CLASS)
        assert result.plantuml == "@startuml\nclass A\n@enduml"
        assert result.model_id == "vision-model"
        assert len(result.raw_response_digest) == 64
        assert transport.attempts == 1

    def test_prose_response_raises(self):
        gateway, _ = _gateway([chat_response("no diagram here")])
        with pytest.raises(NoDiagramInResponseError):
            gateway.convert_image(PNG, DiagramKind.CLASS)

    def test_rejects_non_image(self):
        gateway, transport = _gateway([])
        with pytest.raises(UnsupportedImageError):
            gateway.convert_image(b"plain text", DiagramKind.CLASS)
        assert transport.attempts == 0

    def test_rejects_oversize(self):
        gateway, _ = _gateway([])
        huge = PNG + b"\x00" * MAX_IMAGE_BYTES
        with pytest.raises(UnsupportedImageError):
            gateway.convert_image(huge, DiagramKind.CLASS)

    def test_kind_selects_prompt_and_payload_shape(self):
        gateway, transport = _gateway(
            [chat_response("@startuml\nentity E\n@enduml")]
        )
        gateway.convert_image(JPEG, DiagramKind.ER)
        payload = transport.calls[0]["payload"]
        parts = payload["messages"][0]["content"]
        assert parts[0]["type"] == "text"
        assert "crow" in parts[0]["text"].lower()
        image_url = parts[1]["image_url"]["url"]
        assert image_url.startswith("data:image/jpeg;base64,")
        decoded = base64.b64decode(image_url.split(",", 1)[1])
        assert decoded == JPEG

    def test_api_key_goes_to_header_only(self):
        gateway, transport = _gateway([chat_response("@startuml\n@enduml")])
        gateway.convert_image(PNG, DiagramKind.CLASS)
        call = transport.calls[0]
        assert call["headers"]["Authorization"] == "Bearer secret-vision-key"
        assert "secret-vision-key" not in str(call["payload"])


class TestRetries:
    def test_success_on_third_attempt(self):
        sleeps = []
        transport = MockTransport(
            [TransportError("one"), TransportError("two"), chat_response("fine")]
        )
        gateway = LlmGateway(
            VISION_CONFIG, transport=transport, sleeper=sleeps.append
        )
        assert gateway.generate_text("hello") == "fine"
        assert transport.attempts == 3
        assert len(sleeps) == 2  # two retries recorded
        # backoff near 1s then 2s, with +-20% jitter
        assert 0.8 <= sleeps[0] <= 1.2
        assert 1.6 <= sleeps[1] <= 2.4

    def test_exhausted_retries_raise(self):
        transport = MockTransport([TransportError("always")])
        gateway = LlmGateway(VISION_CONFIG, transport=transport, sleeper=lambda s: None)
        with pytest.raises(TransportError):
            gateway.generate_text("hello")
        assert transport.attempts == VISION_CONFIG.max_retries


class TestPromptTemplates:
    def test_known_keys_load(self):
        gateway, _ = _gateway([])
        for key in ("convert.class", "convert.er", "paraphrase.student",
                    "paraphrase.educator"):
            assert gateway.load_prompt_template(key).strip()

    def test_unknown_key(self):
        gateway, _ = _gateway([])
        with pytest.raises(TemplateNotFoundError):
            gateway.load_prompt_template("convert.sequence")


class TestSecretRedaction:
    def test_repr_hides_keys(self):
        assert "secret-vision-key" not in repr(VISION_CONFIG)
        assert "secret-text-key" not in repr(VISION_CONFIG)

    def test_public_dict_hides_keys(self):
        public = VISION_CONFIG.to_public_dict()
        assert public["vision_key_set"] is True
        assert "secret-vision-key" not in str(public)

    def test_no_key_material_in_logs(self, caplog):
        gateway, _ = _gateway([chat_response("@startuml\n@enduml")])
        with caplog.at_level(logging.DEBUG):
            gateway.convert_image(PNG, DiagramKind.CLASS)
            gateway.generate_text("x")
        for record in caplog.records:
            assert "secret-vision-key" not in record.getMessage()
            assert "secret-text-key" not in record.getMessage()


class TestNetworkSentinel:
    def test_counts_and_blocks(self):
        sentinel = NetworkSentinel()
        gateway = LlmGateway(
            GatewayConfig(offline=True), transport=sentinel
        )
        with pytest.raises(OfflineModeError):
            gateway.generate_text("x")
        assert sentinel.attempts == 0


def test_config_from_env():
    env = {
        "DUET_VISION_ENDPOINT": "http://v",
        "DUET_VISION_MODEL": "vm",
        "DUET_VISION_KEY": "vk",
        "DUET_TEXT_ENDPOINT": "http://t",
        "DUET_TEXT_MODEL": "tm",
        "DUET_TEXT_KEY": "tk",
        "DUET_OFFLINE": "1",
    }
    config = GatewayConfig.from_env(env)
    assert config.vision_endpoint == "http://v"
    assert config.text_model == "tm"
    assert config.offline is True
