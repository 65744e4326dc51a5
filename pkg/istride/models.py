"""
Shared pydantic models and enumerations used across the application.

Catalog documents are parsed straight into these models. Structural problems (wrong
types, unknown enumeration values, unknown keys) surface as pydantic errors; the
cross-entity rules (dangling references, duplicate ids, score ranges) are checked by
``istride.catalog.validate`` so they can be reported as data.
"""

from __future__ import annotations

import re
from datetime import date, datetime
from enum import Enum, IntEnum
from typing import Any, List, Literal, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from .cvss import base_score, parse_vector
from .errors import VectorError

SCHEMA_VERSION = "1"
K_MAX = 6
CVE_ID_PATTERN = re.compile(r"^CVE-\d{4}-\d{4,}$")

LOW_MED_HIGH_LEVELS = {"low": 1.0, "medium": 2.0, "high": 3.0}


def _token_key(value: str) -> str:
    return re.sub(r"[^a-z0-9]", "", value.lower())


def _risk_label(value: Any) -> Optional[float]:
    if isinstance(value, str):
        return LOW_MED_HIGH_LEVELS.get(value.strip().lower())
    return None


class StrideCategory(str, Enum):
    """The six STRIDE threat categories."""

    SPOOFING = "spoofing"
    TAMPERING = "tampering"
    REPUDIATION = "repudiation"
    INFORMATION_DISCLOSURE = "information-disclosure"
    DENIAL_OF_SERVICE = "denial-of-service"
    ELEVATION_OF_PRIVILEGE = "elevation-of-privilege"

    @property
    def display_name(self) -> str:
        return _STRIDE_DISPLAY[self]

    @classmethod
    def parse(cls, value: Any) -> "StrideCategory":
        """Accept the kebab token, the display name or the CamelCase name."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = _token_key(value)
            for member in cls:
                if _token_key(member.value) == key:
                    return member
        raise ValueError(f"Unknown STRIDE category: {value!r}")

    @classmethod
    def matching_label(cls, label: str) -> Optional["StrideCategory"]:
        """Return the category a free-text impact label names exactly, if any."""
        normalized = " ".join(label.split()).lower()
        for member in cls:
            if member.display_name.lower() == normalized:
                return member
        return None


_STRIDE_DISPLAY = {
    StrideCategory.SPOOFING: "Spoofing",
    StrideCategory.TAMPERING: "Tampering",
    StrideCategory.REPUDIATION: "Repudiation",
    StrideCategory.INFORMATION_DISCLOSURE: "Information Disclosure",
    StrideCategory.DENIAL_OF_SERVICE: "Denial of Service",
    StrideCategory.ELEVATION_OF_PRIVILEGE: "Elevation of Privilege",
}


class BloomLevel(IntEnum):
    """Bloom's taxonomy cognition levels; the integer value is the knowledge score."""

    NOT_ASSESSED = 0
    REMEMBERING = 1
    UNDERSTANDING = 2
    APPLYING = 3
    ANALYZING = 4
    EVALUATING = 5
    CREATING = 6

    @property
    def verb(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, value: Any) -> "BloomLevel":
        """Accept a level, its score (0-6, int or digit string) or its verb."""
        if isinstance(value, cls):
            return value
        if isinstance(value, bool):
            raise ValueError(f"Unknown Bloom level: {value!r}")
        if isinstance(value, int):
            try:
                return cls(value)
            except ValueError:
                raise ValueError(f"Bloom level score must be 0-6, got {value}") from None
        if isinstance(value, str):
            text = value.strip()
            if text.isdigit():
                return cls.parse(int(text))
            key = _token_key(text).replace("analysing", "analyzing")
            for member in cls:
                if _token_key(member.name) == key:
                    return member
        raise ValueError(f"Unknown Bloom level: {value!r}")


class RiskScaleKind(str, Enum):
    LOW_MED_HIGH = "low-med-high"
    CVSS = "cvss"
    CUSTOM_NUMERIC = "custom-numeric"


DEFAULT_T_MAX = {RiskScaleKind.LOW_MED_HIGH: 3.0, RiskScaleKind.CVSS: 10.0}


class RiskSource(str, Enum):
    MANUAL = "manual"
    CVSS_VECTOR = "cvss-vector"


class CatalogModel(BaseModel):
    """Base for catalog document models: immutable, unknown keys rejected."""

    model_config = ConfigDict(frozen=True, extra="forbid")


class RiskScale(CatalogModel):
    kind: RiskScaleKind
    t_max: float

    @model_validator(mode="before")
    @classmethod
    def default_t_max(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("t_max") is None:
            try:
                kind = RiskScaleKind(data.get("kind"))
            except ValueError:
                return data
            if kind in DEFAULT_T_MAX:
                return {**data, "t_max": DEFAULT_T_MAX[kind]}
        return data


class TechnologyRisk(CatalogModel):
    """Technology risk score (T_s) and where it came from."""

    value: float
    source: RiskSource = RiskSource.MANUAL
    vector: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def resolve_value(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        value = data.get("value")
        if _risk_label(value) is not None:
            # Labels are resolved by ServiceCatalog, and only on a low-med-high scale.
            raise ValueError(f"risk label {value!r} is only valid on a low-med-high scale")
        if value is None and data.get("vector"):
            try:
                score = base_score(parse_vector(data["vector"]))
            except VectorError as exc:
                raise ValueError(str(exc)) from exc
            return {**data, "value": score.base, "source": RiskSource.CVSS_VECTOR.value}
        return data

    @model_validator(mode="after")
    def vector_matches_source(self) -> "TechnologyRisk":
        if self.source == RiskSource.CVSS_VECTOR and not self.vector:
            raise ValueError("a cvss-vector risk requires a vector string")
        return self


class AssetComponent(CatalogModel):
    id: str
    name: str
    description: str = ""


class EvidentialSource(CatalogModel):
    location: str
    description: str = ""
    collection_notes: Optional[str] = None


class KnowledgeArea(CatalogModel):
    id: str
    name: str
    related_evidence: List[str] = Field(default_factory=list)


class KnowledgeAssessment(CatalogModel):
    area: str
    level: BloomLevel
    assessed_on: date
    assessor: Optional[str] = None

    @field_validator("level", mode="before")
    @classmethod
    def parse_level(cls, value: Any) -> BloomLevel:
        return BloomLevel.parse(value)

    @field_serializer("level")
    def serialize_level(self, level: BloomLevel) -> str:
        return level.verb


class ThreatRecord(CatalogModel):
    """A STRIDE-categorized threat against one or more assets."""

    id: str
    name: str
    description: str = ""
    categories: List[StrideCategory]
    affected_assets: List[str]
    impact: str
    evidential_sources: List[EvidentialSource] = Field(default_factory=list)
    knowledge_area: str
    risk: Optional[TechnologyRisk] = None
    mitigation_notes: Optional[str] = None
    provenance: Optional[str] = None

    @field_validator("categories", mode="before")
    @classmethod
    def parse_categories(cls, value: Any) -> Any:
        if not isinstance(value, list):
            return value
        categories: List[StrideCategory] = []
        for item in value:
            category = StrideCategory.parse(item)
            if category not in categories:
                categories.append(category)
        return categories

    @property
    def is_scored(self) -> bool:
        return self.risk is not None


class ServiceCatalog(CatalogModel):
    """A service decomposed into assets, threats and knowledge areas."""

    schema_version: Literal["1"]
    service_name: str
    scale: RiskScale
    assets: List[AssetComponent] = Field(default_factory=list)
    threats: List[ThreatRecord] = Field(default_factory=list)
    knowledge_areas: List[KnowledgeArea] = Field(default_factory=list)
    assessments: List[KnowledgeAssessment] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def resolve_risk_labels(cls, data: Any) -> Any:
        """Map low/medium/high risk labels to 1/2/3 when the scale is low-med-high."""
        if not isinstance(data, dict) or not isinstance(data.get("threats"), list):
            return data
        scale = data.get("scale")
        kind = scale.get("kind") if isinstance(scale, dict) else getattr(scale, "kind", None)
        if kind != RiskScaleKind.LOW_MED_HIGH:
            return data

        threats = []
        for threat in data["threats"]:
            risk = threat.get("risk") if isinstance(threat, dict) else None
            level = _risk_label(risk.get("value")) if isinstance(risk, dict) else None
            if level is not None:
                threat = {**threat, "risk": {**risk, "value": level}}
            threats.append(threat)
        return {**data, "threats": threats}


class Violation(BaseModel):
    """A broken catalog invariant, reported as data."""

    model_config = ConfigDict(frozen=True)

    entity_id: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.entity_id}: {self.message}"


# Scoring and reporting ----------------------------------------------------------------


class PriorityEntry(BaseModel):
    """One ranked row of the knowledge-priority report."""

    model_config = ConfigDict(frozen=True)

    threat_id: str
    threat_name: str
    knowledge_area: str
    t_s: float
    k_s: int
    priority: float
    rank: int = Field(ge=1)


class AreaPriority(BaseModel):
    """Training need for one knowledge area: the worst priority among its threats."""

    model_config = ConfigDict(frozen=True)

    area_id: str
    area_name: str
    level: BloomLevel
    priority: float
    threat_ids: List[str]


class EvidencePlanItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    asset_id: str
    asset_name: str
    threat_id: str
    threat_name: str
    location: str
    description: str
    collection_notes: Optional[str] = None


class AssessmentReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    service_name: str
    generated_on: datetime
    scale: RiskScale
    entries: List[PriorityEntry]
    evidence_plan: List[EvidencePlanItem]
    unassessed_areas: List[str]
    training_needs: List[AreaPriority] = Field(default_factory=list)
    threats: List[ThreatRecord] = Field(default_factory=list)
    assets: List[AssetComponent] = Field(default_factory=list)
    knowledge_areas: List[KnowledgeArea] = Field(default_factory=list)


# Ingestion ------------------------------------------------------------------------------


class CveRecord(BaseModel):
    """A vulnerability entry read from an NVD JSON export."""

    model_config = ConfigDict(frozen=True)

    cve_id: str
    description: str = ""
    cvss_vector: Optional[str] = None
    cvss_base: Optional[float] = None
    published: date
    references: List[str] = Field(default_factory=list)

    @field_validator("cve_id", mode="after")
    @classmethod
    def check_cve_id(cls, value: str) -> str:
        if not CVE_ID_PATTERN.match(value):
            raise ValueError(f"not a CVE identifier: {value!r}")
        return value

    @property
    def is_scored(self) -> bool:
        return self.cvss_vector is not None or self.cvss_base is not None


class ThreatDraft(ThreatRecord):
    """A threat derived from a CVE record that an analyst still has to complete."""

    provenance: str

    @property
    def missing_fields(self) -> List[str]:
        missing = []
        if not self.affected_assets:
            missing.append("affected_assets")
        if not self.knowledge_area:
            missing.append("knowledge_area")
        if not self.evidential_sources:
            missing.append("evidential_sources")
        if self.risk is None:
            missing.append("risk")
        return missing

    @property
    def is_complete(self) -> bool:
        return not self.missing_fields

    def to_threat(self) -> ThreatRecord:
        return ThreatRecord.model_validate(self.model_dump())
