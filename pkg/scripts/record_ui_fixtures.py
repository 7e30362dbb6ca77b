#!/usr/bin/env python3
"""Record API responses as JSON fixtures for the web UI test suite.

Drives the real application offline with deterministic ids, so the frontend
stub server replays exactly what the backend produces. Output goes to
frontend/tests/fixtures/.
"""
import io
import json
import random
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from duet.api import AppConfig, create_app
from duet.gateway import GatewayConfig, LlmGateway, NetworkSentinel
from duet.store import Store, UlidFactory

REFERENCE_SOURCE = (
    "@startuml\n"
    "class Student {\n +name : String\n -gpa : Float\n}\n"
    "class Course {\n +title : String\n}\n"
    'Student "0..*" -- "1..*" Course : enrolls\n'
    "@enduml"
)
MULTIPLICITY_MUTANT = REFERENCE_SOURCE.replace('"0..*"', '"1..*"')
ATTR_TYPE_MUTANT = REFERENCE_SOURCE.replace("gpa : Float", "gpa : int")
BROKEN_SOURCE = "@startuml\nclass Student {\n gpa Float\n}\n@enduml"

OUT_DIR = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        store = Store(
            tmp,
            id_factory=UlidFactory(
                clock=lambda: 1_700_000_000.0, rng=random.Random(42)
            ),
        )
        app = create_app(
            AppConfig(store_dir=tmp),
            store=store,
            gateway=LlmGateway(GatewayConfig(offline=True), transport=NetworkSentinel()),
        )
        client = TestClient(app)

        fixtures = {}
        fixtures["health"] = client.get("/api/health").json()

        created = client.post(
            "/api/references",
            json={"name": "University", "kind": "class", "plantuml": REFERENCE_SOURCE},
        )
        assert created.status_code == 201, created.text
        reference_id = created.json()["id"]

        identity = client.post(
            f"/api/references/{reference_id}/submissions",
            json={"plantuml": REFERENCE_SOURCE},
        )
        assert identity.status_code == 200
        fixtures["submission_identity"] = identity.json()

        multiplicity = client.post(
            f"/api/references/{reference_id}/submissions",
            json={"plantuml": MULTIPLICITY_MUTANT},
        )
        assert multiplicity.status_code == 200
        fixtures["submission_multiplicity"] = multiplicity.json()

        broken = client.post(
            f"/api/references/{reference_id}/submissions",
            json={"plantuml": BROKEN_SOURCE},
        )
        assert broken.status_code == 400
        fixtures["parse_error"] = broken.json()

        batch = client.post(
            f"/api/references/{reference_id}/batch",
            files=[
                ("files", ("a.puml", io.BytesIO(ATTR_TYPE_MUTANT.encode()), "text/plain")),
                ("files", ("b.puml", io.BytesIO(MULTIPLICITY_MUTANT.encode()), "text/plain")),
            ],
        )
        assert batch.status_code == 200

        fixtures["references"] = client.get("/api/references").json()
        fixtures["analytics"] = client.get(
            f"/api/references/{reference_id}/analytics"
        ).json()
        fixtures["unknown_reference"] = client.get(
            "/api/references/NO-SUCH-ID/analytics"
        ).json()
        # the stub server replays responses keyed on these request bodies
        fixtures["meta"] = {
            "reference_id": reference_id,
            "sources": {
                "reference": REFERENCE_SOURCE,
                "multiplicity_mutant": MULTIPLICITY_MUTANT,
                "broken": BROKEN_SOURCE,
            },
        }

    for name, payload in fixtures.items():
        path = OUT_DIR / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
