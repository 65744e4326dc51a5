"""
Catalog loading, serialization, validation and cross-linking.

A catalog is a single UTF-8 JSON document describing one service: its asset
components, the STRIDE threats against them, the evidential data sources each threat
leaves behind, the knowledge areas needed to investigate them and the organization's
Bloom-level assessment of each area.
"""

from __future__ import annotations

import copy
import json
import logging
import math
import re
from collections import Counter
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError as PydanticValidationError

from .cvss import base_score, parse_vector
from .errors import ParseError, UnknownArea, UnknownAsset, ValidationError, VectorError
from .models import (
    DEFAULT_T_MAX,
    AssetComponent,
    EvidentialSource,
    KnowledgeArea,
    RiskSource,
    ServiceCatalog,
    StrideCategory,
    ThreatRecord,
    Violation,
)

LOG = logging.getLogger(__name__)


def normalize_label(label: str) -> str:
    """Create a normalized key for free-text label comparisons."""
    return re.sub(r"\s+", " ", label.strip()).lower()


class CatalogIndex:
    """Index of catalog entities for quick lookup by id."""

    def __init__(self, catalog: ServiceCatalog):
        self.catalog = catalog
        self._assets: Dict[str, AssetComponent] = {}
        self._threats: Dict[str, ThreatRecord] = {}
        self._areas: Dict[str, KnowledgeArea] = {}
        # First declaration wins; duplicates are reported by validate().
        for asset in catalog.assets:
            self._assets.setdefault(asset.id, asset)
        for threat in catalog.threats:
            self._threats.setdefault(threat.id, threat)
        for area in catalog.knowledge_areas:
            self._areas.setdefault(area.id, area)

    def get_asset(self, asset_id: str) -> Optional[AssetComponent]:
        return self._assets.get(asset_id)

    def get_threat(self, threat_id: str) -> Optional[ThreatRecord]:
        return self._threats.get(threat_id)

    def get_area(self, area_id: str) -> Optional[KnowledgeArea]:
        return self._areas.get(area_id)

    def require_asset(self, asset_id: str) -> AssetComponent:
        asset = self.get_asset(asset_id)
        if asset is None:
            raise UnknownAsset(asset_id)
        return asset

    def require_area(self, area_id: str) -> KnowledgeArea:
        area = self.get_area(area_id)
        if area is None:
            raise UnknownArea(area_id)
        return area

    def asset_name(self, asset_id: str) -> str:
        asset = self.get_asset(asset_id)
        return asset.name if asset else asset_id

    def area_name(self, area_id: str) -> str:
        area = self.get_area(area_id)
        return area.name if area else area_id


# Loading ---------------------------------------------------------------------------------


def load_catalog(path: Path | str, *, lenient: bool = False, check: bool = True) -> ServiceCatalog:
    """
    Load a catalog document from disk.

    Parameters
    ----------
    path:
        Catalog JSON file.
    lenient:
        Log unknown keys as warnings instead of rejecting the document.
    check:
        Raise ``ValidationError`` when the parsed catalog breaks an invariant. Callers
        that expect incomplete content (ingestion drafts) pass ``False``.

    Raises
    ------
    ParseError
        If the file cannot be read or is not a well-formed catalog document.
    ValidationError
        If ``check`` is set and ``validate`` reports violations.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read catalog: {exc}", source=str(path)) from exc

    catalog = parse_catalog(text, source=str(path), lenient=lenient)

    violations = validate(catalog)
    if violations:
        if check:
            raise ValidationError(violations)
        LOG.warning(
            "Catalog has violations",
            extra={"extra_payload": {"path": str(path), "violations": len(violations)}},
        )
    LOG.debug(
        "Catalog loaded",
        extra={
            "extra_payload": {
                "path": str(path),
                "assets": len(catalog.assets),
                "threats": len(catalog.threats),
            }
        },
    )
    return catalog


def parse_catalog(
    text: str, *, source: Optional[str] = None, lenient: bool = False
) -> ServiceCatalog:
    """Parse a catalog document without checking cross-entity invariants."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source=source, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ParseError("catalog document must be a JSON object", source=source, line=1)

    if lenient:
        data = copy.deepcopy(data)
    while True:
        try:
            return ServiceCatalog.model_validate(data)
        except PydanticValidationError as exc:
            errors = exc.errors()
            unknown = [err["loc"] for err in errors if err["type"] == "extra_forbidden"]
            if not lenient or not unknown:
                first = errors[0]
                raise ParseError(
                    f"{first['msg']} ({len(errors)} error(s))",
                    source=source,
                    field=_describe_loc(data, first["loc"]),
                ) from exc
            # Every pass removes at least one key, so this terminates.
            for loc in unknown:
                LOG.warning(
                    "Ignoring unknown catalog key",
                    extra={"extra_payload": {"source": source, "field": _describe_loc(data, loc)}},
                )
                _delete_at(data, loc)


def _describe_loc(data: Any, loc: Sequence[Any]) -> str:
    """Render a pydantic error location, naming list entries by their id when present."""
    parts: List[str] = []
    node = data
    for key in loc:
        if isinstance(key, int):
            label = f"[{key}]"
            if isinstance(node, list) and 0 <= key < len(node):
                node = node[key]
                if isinstance(node, dict) and node.get("id"):
                    label = f"[{key}]({node['id']})"
            else:
                node = None
            parts.append(label)
        else:
            parts.append(f".{key}" if parts else str(key))
            node = node.get(key) if isinstance(node, dict) else None
    return "".join(parts)


def _delete_at(data: Any, loc: Sequence[Any]) -> None:
    node = data
    for key in loc[:-1]:
        node = node[key]
    if isinstance(node, dict):
        node.pop(loc[-1], None)


# Serialization ---------------------------------------------------------------------------


def dump_catalog(catalog: ServiceCatalog) -> str:
    """Serialize a catalog to its canonical JSON document."""
    payload = catalog.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def save_catalog(catalog: ServiceCatalog, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_catalog(catalog), encoding="utf-8")
    return path


# Validation ------------------------------------------------------------------------------


def validate(catalog: ServiceCatalog) -> List[Violation]:
    """Check every catalog invariant; an empty list means the catalog is valid."""
    violations: List[Violation] = []
    violations.extend(_check_scale(catalog))
    violations.extend(_check_ids("asset", [asset.id for asset in catalog.assets]))
    violations.extend(_check_ids("knowledge area", [area.id for area in catalog.knowledge_areas]))
    violations.extend(_check_ids("threat", [threat.id for threat in catalog.threats]))

    asset_ids = {asset.id for asset in catalog.assets}
    area_ids = {area.id for area in catalog.knowledge_areas}
    for threat in catalog.threats:
        violations.extend(_check_threat(threat, asset_ids, area_ids, catalog.scale.t_max))

    seen_areas: set[str] = set()
    for assessment in catalog.assessments:
        if assessment.area not in area_ids:
            violations.append(
                Violation(
                    entity_id=assessment.area,
                    rule="unknown-assessment-area",
                    message=f"assessment references undeclared knowledge area {assessment.area!r}",
                )
            )
        if assessment.area in seen_areas:
            violations.append(
                Violation(
                    entity_id=assessment.area,
                    rule="duplicate-assessment",
                    message="knowledge area is assessed more than once",
                )
            )
        seen_areas.add(assessment.area)

    return violations


def _check_scale(catalog: ServiceCatalog) -> Iterable[Violation]:
    scale = catalog.scale
    if not math.isfinite(scale.t_max):
        yield Violation(
            entity_id=catalog.service_name,
            rule="invalid-scale",
            message=f"t_max must be a finite number, got {scale.t_max}",
        )
        return
    if scale.t_max <= 0:
        yield Violation(
            entity_id=catalog.service_name,
            rule="invalid-scale",
            message=f"t_max must be positive, got {scale.t_max:g}",
        )
    expected = DEFAULT_T_MAX.get(scale.kind)
    if expected is not None and scale.t_max != expected:
        yield Violation(
            entity_id=catalog.service_name,
            rule="invalid-scale",
            message=f"{scale.kind.value} scale requires t_max {expected:g}, got {scale.t_max:g}",
        )


def _check_ids(kind: str, ids: List[str]) -> Iterable[Violation]:
    counts = Counter(ids)
    reported: set[str] = set()
    for entity_id in ids:
        if not entity_id.strip():
            yield Violation(entity_id=entity_id, rule="empty-id", message=f"{kind} id is empty")
        elif counts[entity_id] > 1 and entity_id not in reported:
            reported.add(entity_id)
            yield Violation(
                entity_id=entity_id,
                rule="duplicate-id",
                message=f"{kind} id declared {counts[entity_id]} times",
            )


def _check_threat(
    threat: ThreatRecord, asset_ids: set[str], area_ids: set[str], t_max: float
) -> Iterable[Violation]:
    def violation(rule: str, message: str) -> Violation:
        return Violation(entity_id=threat.id, rule=rule, message=message)

    if not threat.categories:
        yield violation("empty-categories", "threat has no STRIDE category")
    if not threat.affected_assets:
        yield violation("empty-affected-assets", "threat affects no asset")
    for asset_id in threat.affected_assets:
        if asset_id not in asset_ids:
            yield violation("unknown-asset", f"references undeclared asset {asset_id!r}")
    if threat.knowledge_area not in area_ids:
        yield violation(
            "unknown-knowledge-area",
            f"references undeclared knowledge area {threat.knowledge_area!r}",
        )
    for source in threat.evidential_sources:
        if not source.location.strip():
            yield violation("empty-location", "evidential source has an empty location")

    named = StrideCategory.matching_label(threat.impact)
    if named is not None and named not in threat.categories:
        yield violation(
            "impact-category-mismatch",
            f"impact {threat.impact!r} requires category {named.value}",
        )

    risk = threat.risk
    if risk is None:
        yield violation("unscored-threat", "threat has no technology risk score")
        return
    if not math.isfinite(risk.value):
        yield violation("risk-out-of-range", f"risk must be a finite number, got {risk.value}")
    elif not 0 <= risk.value <= t_max:
        yield violation(
            "risk-out-of-range", f"risk {risk.value:g} outside the scale range [0, {t_max:g}]"
        )
    if risk.source == RiskSource.CVSS_VECTOR and risk.vector:
        try:
            computed = base_score(parse_vector(risk.vector)).base
        except VectorError as exc:
            yield violation("invalid-cvss-vector", str(exc))
            return
        if computed != risk.value:
            yield violation(
                "cvss-score-mismatch",
                f"risk {risk.value:g} differs from the vector base score {computed:g}",
            )


# Queries ---------------------------------------------------------------------------------


def evidential_sources_for(
    catalog: ServiceCatalog, asset_id: str
) -> List[Tuple[ThreatRecord, EvidentialSource]]:
    """Every (threat, evidential source) pair for threats affecting the asset, in catalog order."""
    CatalogIndex(catalog).require_asset(asset_id)
    return [
        (threat, source)
        for threat in catalog.threats
        if asset_id in threat.affected_assets
        for source in threat.evidential_sources
    ]


def threats_by_impact(catalog: ServiceCatalog, impact: str) -> List[ThreatRecord]:
    """Threats sharing an impact class, matched case-insensitively."""
    wanted = normalize_label(impact)
    return [threat for threat in catalog.threats if normalize_label(threat.impact) == wanted]


def required_knowledge(catalog: ServiceCatalog) -> Dict[str, List[str]]:
    """Knowledge-area id -> ids of the threats whose investigation needs it."""
    required: Dict[str, List[str]] = {area.id: [] for area in catalog.knowledge_areas}
    for threat in catalog.threats:
        required.setdefault(threat.knowledge_area, []).append(threat.id)
    return required
