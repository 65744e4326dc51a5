"""
CVE feed ingestion: turn NVD JSON export files into draft threats.

Both the legacy 1.1 feed layout (``CVE_Items``) and the 2.0 layout
(``vulnerabilities``) are accepted. Ingestion is offline; download the feeds first.
"""

from __future__ import annotations

import gzip
import json
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from pydantic import ValidationError as PydanticValidationError

from .cvss import base_score, parse_vector
from .errors import ParseError
from .models import (
    CveRecord,
    RiskSource,
    ServiceCatalog,
    StrideCategory,
    TechnologyRisk,
    ThreatDraft,
)

LOG = logging.getLogger(__name__)

NVD_V2_KEY = "vulnerabilities"
NVD_V1_KEY = "CVE_Items"


@dataclass
class MergeResult:
    catalog: ServiceCatalog
    merged: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)


def parse_feed(path: Path | str) -> List[CveRecord]:
    """
    Read an NVD JSON export and return one record per usable item.

    Items without an identifier or publication date are skipped with a warning; only an
    unreadable document or an unrecognized top-level shape aborts.

    Raises
    ------
    ParseError
        If the file is not JSON or matches neither NVD schema.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
        if path.suffix == ".gz":
            raw = gzip.decompress(raw)
        data = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source=str(path), line=exc.lineno) from exc
    except (OSError, UnicodeDecodeError, EOFError) as exc:
        raise ParseError(f"cannot read feed: {exc}", source=str(path)) from exc

    if isinstance(data, dict) and NVD_V2_KEY in data:
        items, extract = data[NVD_V2_KEY], _extract_v2
    elif isinstance(data, dict) and NVD_V1_KEY in data:
        items, extract = data[NVD_V1_KEY], _extract_v1
    else:
        raise ParseError(
            f"unrecognized feed schema: missing top-level key {NVD_V2_KEY!r} (NVD 2.0) "
            f"or {NVD_V1_KEY!r} (NVD 1.1)",
            source=str(path),
        )
    if not isinstance(items, list):
        raise ParseError("feed item collection must be an array", source=str(path))

    records: List[CveRecord] = []
    for position, item in enumerate(items):
        try:
            fields = extract(item) if isinstance(item, dict) else None
            if fields is None:
                raise ValueError("item is not an object")
            records.append(CveRecord.model_validate(fields))
        except (
            ValueError,
            PydanticValidationError,
            TypeError,
            KeyError,
            AttributeError,
        ) as exc:
            LOG.warning(
                "Skipping malformed feed item",
                extra={
                    "extra_payload": {
                        "path": str(path),
                        "position": position,
                        "error": str(exc).splitlines()[0],
                    }
                },
            )

    LOG.info(
        "Feed parsed",
        extra={"extra_payload": {"path": str(path), "items": len(items), "records": len(records)}},
    )
    return records


def _english(entries: Iterable[Dict[str, Any]]) -> str:
    entries = [entry for entry in entries or [] if isinstance(entry, dict)]
    for entry in entries:
        if entry.get("lang") == "en":
            return entry.get("value", "")
    return entries[0].get("value", "") if entries else ""


def _urls(references: Iterable[Dict[str, Any]]) -> List[str]:
    return [ref["url"] for ref in references or [] if isinstance(ref, dict) and ref.get("url")]


def _published(value: Optional[str]) -> Optional[date]:
    if not value:
        return None
    return date.fromisoformat(value[:10])


def _extract_v2(item: Dict[str, Any]) -> Dict[str, Any]:
    cve = item.get("cve", {})
    metrics = cve.get("metrics", {})

    vector: Optional[str] = None
    base: Optional[float] = None
    for key in ("cvssMetricV31", "cvssMetricV30", "cvssMetricV2"):
        entries = metrics.get(key) or []
        if not entries:
            continue
        cvss_data = entries[0].get("cvssData", {})
        if key == "cvssMetricV31":
            vector = cvss_data.get("vectorString")
        if base is None:
            base = cvss_data.get("baseScore")

    return {
        "cve_id": cve.get("id"),
        "description": _english(cve.get("descriptions", [])),
        "cvss_vector": vector,
        "cvss_base": base,
        "published": _published(cve.get("published")),
        "references": _urls(cve.get("references", [])),
    }


def _extract_v1(item: Dict[str, Any]) -> Dict[str, Any]:
    cve = item.get("cve", {})
    impact = item.get("impact", {})

    vector: Optional[str] = None
    base: Optional[float] = None
    v3 = impact.get("baseMetricV3", {}).get("cvssV3", {})
    if v3:
        if str(v3.get("vectorString", "")).startswith("CVSS:3.1/"):
            vector = v3["vectorString"]
        base = v3.get("baseScore")
    if base is None:
        base = impact.get("baseMetricV2", {}).get("cvssV2", {}).get("baseScore")

    references = cve.get("references", {}).get("reference_data", [])
    return {
        "cve_id": cve.get("CVE_data_meta", {}).get("ID"),
        "description": _english(cve.get("description", {}).get("description_data", [])),
        "cvss_vector": vector,
        "cvss_base": base,
        "published": _published(item.get("publishedDate")),
        "references": _urls(references),
    }


def draft_id(cve_id: str) -> str:
    return f"cve-{cve_id.lower().removeprefix('cve-')}"


def to_draft(rec: CveRecord, default_category: StrideCategory) -> ThreatDraft:
    """
    Convert a CVE record into a draft threat.

    The risk comes from the v3.1 vector when present, otherwise from the recorded base
    score. A record with neither yields an unscored draft; no score is ever invented.

    Raises
    ------
    VectorError
        If the record carries a malformed vector.
    """
    risk: Optional[TechnologyRisk] = None
    if rec.cvss_vector:
        score = base_score(parse_vector(rec.cvss_vector))
        risk = TechnologyRisk(
            value=score.base, source=RiskSource.CVSS_VECTOR, vector=rec.cvss_vector
        )
    elif rec.cvss_base is not None:
        risk = TechnologyRisk(value=rec.cvss_base, source=RiskSource.MANUAL)

    return ThreatDraft(
        id=draft_id(rec.cve_id),
        name=rec.cve_id,
        description=rec.description,
        categories=[default_category],
        affected_assets=[],
        impact=default_category.display_name,
        evidential_sources=[],
        knowledge_area="",
        risk=risk,
        mitigation_notes=None,
        provenance=rec.cve_id,
    )


def merge_drafts(catalog: ServiceCatalog, drafts: Iterable[ThreatDraft]) -> MergeResult:
    """Append drafts as threats; drafts whose id already exists are skipped and reported."""
    existing = {threat.id for threat in catalog.threats}
    result = MergeResult(catalog=catalog)
    additions = []
    for draft in drafts:
        if draft.id in existing:
            LOG.warning(
                "Skipping draft with existing id",
                extra={"extra_payload": {"threat_id": draft.id, "provenance": draft.provenance}},
            )
            result.skipped.append(draft.id)
            continue
        existing.add(draft.id)
        additions.append(draft.to_threat())
        result.merged.append(draft.id)

    if additions:
        result.catalog = catalog.model_copy(update={"threats": [*catalog.threats, *additions]})
    return result
