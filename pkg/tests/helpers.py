from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"
PINNED_TIME = datetime(2014, 1, 15, 12, 0, tzinfo=timezone.utc)


def threat_payload(**overrides: Any) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "id": "wsdl-tampering",
        "name": "WSDL Parameter Tampering",
        "categories": ["tampering"],
        "affected_assets": ["clc"],
        "impact": "Tampering",
        "evidential_sources": [{"location": "WSDL files", "description": "WSDL file"}],
        "knowledge_area": "wsdl",
        "risk": {"value": 2},
    }
    payload.update(overrides)
    return payload


def catalog_payload(**overrides: Any) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "schema_version": "1",
        "service_name": "Test Cloud",
        "scale": {"kind": "low-med-high"},
        "assets": [{"id": "clc", "name": "Cloud Controller"}],
        "threats": [threat_payload()],
        "knowledge_areas": [{"id": "wsdl", "name": "WSDL Security and Investigation"}],
        "assessments": [],
    }
    payload.update(overrides)
    return payload
