"""
Assessment reports: a canonical JSON document and fixed-width plain-text tables.

Both renderings are projections of one ``AssessmentReport``. Priorities keep full
precision; two-decimal rounding is applied only to the ``display`` values and table
cells.
"""

from __future__ import annotations

import json
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence

from tabulate import tabulate

from .catalog import CatalogIndex, evidential_sources_for, threats_by_impact
from .models import (
    SCHEMA_VERSION,
    AssessmentReport,
    BloomLevel,
    EvidencePlanItem,
    RiskScaleKind,
    ServiceCatalog,
)
from .scoring import display_priority, effective_levels, prioritize, training_needs, what_if

TABLE_WIDTH = 120
COLUMN_GAP = 2
MIN_PROSE_WIDTH = 12
ELLIPSIS = "..."


class TableKind(str, Enum):
    THREATS = "threats"
    PRIORITIES = "priorities"
    EVIDENCE = "evidence"
    TRAINING = "training"


def build_report(
    catalog: ServiceCatalog,
    generated_on: datetime,
    overrides: Optional[Mapping[str, BloomLevel]] = None,
    impact: Optional[str] = None,
) -> AssessmentReport:
    """
    Assemble the assessment report for a catalog.

    ``generated_on`` is supplied by the caller so renderings are reproducible.
    ``impact`` restricts the report to threats of one impact class.
    """
    if impact is not None:
        catalog = catalog.model_copy(update={"threats": threats_by_impact(catalog, impact)})

    if overrides and len(overrides) == 1:
        [(area, level)] = overrides.items()
        entries = what_if(catalog, area, level)
    else:
        for area in overrides or {}:
            CatalogIndex(catalog).require_area(area)
        entries = prioritize(catalog, overrides)
    levels = effective_levels(catalog, overrides)

    evidence_plan: List[EvidencePlanItem] = []
    for asset in catalog.assets:
        for threat, source in evidential_sources_for(catalog, asset.id):
            evidence_plan.append(
                EvidencePlanItem(
                    asset_id=asset.id,
                    asset_name=asset.name,
                    threat_id=threat.id,
                    threat_name=threat.name,
                    location=source.location,
                    description=source.description,
                    collection_notes=source.collection_notes,
                )
            )

    return AssessmentReport(
        service_name=catalog.service_name,
        generated_on=generated_on,
        scale=catalog.scale,
        entries=entries,
        evidence_plan=evidence_plan,
        unassessed_areas=[area.id for area in catalog.knowledge_areas if area.id not in levels],
        training_needs=training_needs(catalog, entries, overrides),
        threats=catalog.threats,
        assets=catalog.assets,
        knowledge_areas=catalog.knowledge_areas,
    )


# JSON ----------------------------------------------------------------------------------


def render_json(report: AssessmentReport) -> str:
    """Canonical JSON: fixed key order, full-precision numbers plus two-decimal displays."""
    index = _index(report)
    payload: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "service_name": report.service_name,
        "generated_on": report.generated_on.isoformat(),
        "scale": {"kind": report.scale.kind.value, "t_max": report.scale.t_max},
        "entries": [
            {
                "rank": entry.rank,
                "threat_id": entry.threat_id,
                "threat_name": entry.threat_name,
                "knowledge_area": entry.knowledge_area,
                "t_s": entry.t_s,
                "k_s": entry.k_s,
                "priority": entry.priority,
                "display": display_priority(entry.priority),
            }
            for entry in report.entries
        ],
        "training_needs": [
            {
                "area_id": need.area_id,
                "area_name": need.area_name,
                "level": need.level.verb,
                "priority": need.priority,
                "display": display_priority(need.priority),
                "threat_ids": need.threat_ids,
            }
            for need in report.training_needs
        ],
        "evidence_plan": [item.model_dump(mode="json") for item in report.evidence_plan],
        "unassessed_areas": report.unassessed_areas,
        "threats": [
            {
                "id": threat.id,
                "name": threat.name,
                "description": threat.description,
                "categories": [category.value for category in threat.categories],
                "assets": [index.asset_name(asset_id) for asset_id in threat.affected_assets],
                "impact": threat.impact,
                "risk": threat.risk.value if threat.risk else None,
                "evidential_sources": [source.description for source in threat.evidential_sources],
                "knowledge": index.area_name(threat.knowledge_area),
            }
            for threat in report.threats
        ],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


# Tables --------------------------------------------------------------------------------


def render_table(report: AssessmentReport, kind: TableKind | str, color: bool = False) -> str:
    """Render one fixed-width table; an empty report yields the header only."""
    kind = TableKind(kind)
    index = _index(report)

    if kind == TableKind.THREATS:
        headers, rows, prose = _threat_rows(report, index)
    elif kind == TableKind.PRIORITIES:
        threats = {threat.id: threat for threat in report.threats}
        headers = ["Priority", "Threat", "Asset", "Impact", "Evidential Sources", "Knowledge"]
        rows = []
        for entry in report.entries:
            threat = threats[entry.threat_id]
            rows.append(
                [
                    display_priority(entry.priority),
                    entry.threat_name,
                    ", ".join(index.asset_name(a) for a in threat.affected_assets),
                    threat.impact,
                    "; ".join(s.description or s.location for s in threat.evidential_sources),
                    index.area_name(entry.knowledge_area),
                ]
            )
        prose = {4}
    elif kind == TableKind.EVIDENCE:
        headers = ["Asset", "Threat", "Location", "Description", "Collection Notes"]
        rows = [
            [
                item.asset_name,
                item.threat_name,
                item.location,
                item.description,
                item.collection_notes or "",
            ]
            for item in report.evidence_plan
        ]
        prose = {2, 3, 4}
    else:
        headers = ["Knowledge", "Level", "Priority", "Threats"]
        rows = [
            [
                need.area_name,
                need.level.verb,
                display_priority(need.priority),
                ", ".join(need.threat_ids),
            ]
            for need in report.training_needs
        ]
        prose = set()

    rows = _fit_width(headers, rows, prose)
    if color:
        headers = [f"\033[1m{header}\033[0m" for header in headers]
    return tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True) + "\n"


def _threat_rows(report: AssessmentReport, index: CatalogIndex):
    cvss = report.scale.kind == RiskScaleKind.CVSS
    headers = ["Threat", "Description", "Asset", "Threat Impact"]
    if cvss:
        headers.append("CVSS")
    headers.append("Potential Evidential Sources")
    if cvss:
        headers.append("Knowledge")

    rows = []
    for threat in report.threats:
        row = [
            threat.name,
            threat.description,
            ", ".join(index.asset_name(a) for a in threat.affected_assets),
            threat.impact,
        ]
        if cvss:
            row.append(f"{threat.risk.value:.1f}" if threat.risk else "")
        row.append("; ".join(s.description or s.location for s in threat.evidential_sources))
        if cvss:
            row.append(index.area_name(threat.knowledge_area))
        rows.append(row)
    prose = {1, 5 if cvss else 4}
    return headers, rows, prose


def _fit_width(headers: Sequence[str], rows: List[List[str]], prose: set[int]) -> List[List[str]]:
    """Truncate prose columns so the table fits TABLE_WIDTH; other cells are never cut."""
    if not rows or not prose:
        return rows
    fixed = sum(
        max(len(headers[col]), *(len(row[col]) for row in rows))
        for col in range(len(headers))
        if col not in prose
    )
    budget = TABLE_WIDTH - fixed - COLUMN_GAP * (len(headers) - 1)
    limit = max(MIN_PROSE_WIDTH, budget // len(prose))
    return [
        [_truncate(cell, limit) if col in prose else cell for col, cell in enumerate(row)]
        for row in rows
    ]


def _truncate(text: str, limit: int) -> str:
    if len(text) <= limit:
        return text
    return text[: limit - len(ELLIPSIS)].rstrip() + ELLIPSIS


def _index(report: AssessmentReport) -> CatalogIndex:
    # Enough of a catalog to resolve display names.
    return CatalogIndex(
        ServiceCatalog(
            schema_version=SCHEMA_VERSION,
            service_name=report.service_name,
            scale=report.scale,
            assets=report.assets,
            knowledge_areas=report.knowledge_areas,
        )
    )
