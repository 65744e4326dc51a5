"""
CVSS v3.1 base metric parsing and base-score computation.

Only the base metric group is supported. Scores follow the published v3.1 equations,
including the integer-based Roundup function, so results match the reference
calculator for every one of the 2,592 possible base vectors.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, Tuple, Type

from pydantic import BaseModel, ConfigDict

from .errors import VectorError

VERSION_PREFIX = "CVSS:3.1"


class AttackVector(str, Enum):
    NETWORK = "N"
    ADJACENT = "A"
    LOCAL = "L"
    PHYSICAL = "P"


class AttackComplexity(str, Enum):
    LOW = "L"
    HIGH = "H"


class PrivilegesRequired(str, Enum):
    NONE = "N"
    LOW = "L"
    HIGH = "H"


class UserInteraction(str, Enum):
    NONE = "N"
    REQUIRED = "R"


class Scope(str, Enum):
    UNCHANGED = "U"
    CHANGED = "C"


class ImpactLevel(str, Enum):
    NONE = "N"
    LOW = "L"
    HIGH = "H"


class Severity(str, Enum):
    NONE = "None"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


# Vector key -> (model field, value enumeration), in canonical order.
BASE_METRICS: Dict[str, Tuple[str, Type[Enum]]] = {
    "AV": ("av", AttackVector),
    "AC": ("ac", AttackComplexity),
    "PR": ("pr", PrivilegesRequired),
    "UI": ("ui", UserInteraction),
    "S": ("scope", Scope),
    "C": ("c", ImpactLevel),
    "I": ("i", ImpactLevel),
    "A": ("a", ImpactLevel),
}

TEMPORAL_METRICS = frozenset({"E", "RL", "RC"})
ENVIRONMENTAL_METRICS = frozenset(
    {"CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI", "MS", "MC", "MI", "MA"}
)

ATTACK_VECTOR_WEIGHTS = {
    AttackVector.NETWORK: 0.85,
    AttackVector.ADJACENT: 0.62,
    AttackVector.LOCAL: 0.55,
    AttackVector.PHYSICAL: 0.2,
}
ATTACK_COMPLEXITY_WEIGHTS = {AttackComplexity.LOW: 0.77, AttackComplexity.HIGH: 0.44}
PRIVILEGES_WEIGHTS = {
    Scope.UNCHANGED: {
        PrivilegesRequired.NONE: 0.85,
        PrivilegesRequired.LOW: 0.62,
        PrivilegesRequired.HIGH: 0.27,
    },
    Scope.CHANGED: {
        PrivilegesRequired.NONE: 0.85,
        PrivilegesRequired.LOW: 0.68,
        PrivilegesRequired.HIGH: 0.5,
    },
}
USER_INTERACTION_WEIGHTS = {UserInteraction.NONE: 0.85, UserInteraction.REQUIRED: 0.62}
IMPACT_WEIGHTS = {ImpactLevel.NONE: 0.0, ImpactLevel.LOW: 0.22, ImpactLevel.HIGH: 0.56}


class CvssVector(BaseModel):
    """The eight CVSS v3.1 base metrics."""

    model_config = ConfigDict(frozen=True)

    av: AttackVector
    ac: AttackComplexity
    pr: PrivilegesRequired
    ui: UserInteraction
    scope: Scope
    c: ImpactLevel
    i: ImpactLevel
    a: ImpactLevel

    def to_string(self) -> str:
        parts = [VERSION_PREFIX]
        for key, (field_name, _) in BASE_METRICS.items():
            parts.append(f"{key}:{getattr(self, field_name).value}")
        return "/".join(parts)


class CvssScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: float
    severity: Severity
    impact: float
    exploitability: float

    def __str__(self) -> str:
        return f"{self.base:.1f} {self.severity.value}"


def parse_vector(text: str, strict: bool = True) -> CvssVector:
    """
    Parse a CVSS v3.1 vector string.

    Metric order is irrelevant. In strict mode temporal and environmental metrics are
    rejected; otherwise they are ignored.

    Raises
    ------
    VectorError
        On a wrong version prefix, a missing, duplicate or unknown metric, or an
        unknown metric value.
    """
    if not isinstance(text, str) or not text.strip():
        raise VectorError("empty CVSS vector")
    prefix, *parts = text.strip().split("/")
    if prefix != VERSION_PREFIX:
        raise VectorError(f"unsupported version prefix {prefix!r}, expected {VERSION_PREFIX!r}")

    values: Dict[str, Enum] = {}
    for part in parts:
        key, sep, raw = part.partition(":")
        if not sep or not key or not raw:
            raise VectorError(f"malformed metric {part!r}")
        if key in BASE_METRICS:
            if key in values:
                raise VectorError(f"duplicate metric {key}")
            enum_type = BASE_METRICS[key][1]
            try:
                values[key] = enum_type(raw)
            except ValueError:
                allowed = "/".join(member.value for member in enum_type)
                raise VectorError(f"unknown value {raw!r} for {key} (allowed: {allowed})") from None
        elif key in TEMPORAL_METRICS or key in ENVIRONMENTAL_METRICS:
            if strict:
                raise VectorError(f"temporal/environmental metric {key} is not supported")
        else:
            raise VectorError(f"unknown metric {key!r}")

    missing = [key for key in BASE_METRICS if key not in values]
    if missing:
        raise VectorError(f"missing metric(s): {', '.join(missing)}")

    return CvssVector(**{BASE_METRICS[key][0]: value for key, value in values.items()})


def roundup(value: float) -> float:
    """Smallest one-decimal number >= value, computed on integers to avoid float drift."""
    int_input = round(value * 100_000)
    if int_input % 10_000 == 0:
        return int_input / 100_000.0
    return (math.floor(int_input / 10_000) + 1) / 10.0


def severity_for(base: float) -> Severity:
    if base == 0.0:
        return Severity.NONE
    if base < 4.0:
        return Severity.LOW
    if base < 7.0:
        return Severity.MEDIUM
    if base < 9.0:
        return Severity.HIGH
    return Severity.CRITICAL


def base_score(vector: CvssVector) -> CvssScore:
    iss = 1 - (
        (1 - IMPACT_WEIGHTS[vector.c])
        * (1 - IMPACT_WEIGHTS[vector.i])
        * (1 - IMPACT_WEIGHTS[vector.a])
    )
    if vector.scope == Scope.UNCHANGED:
        impact = 6.42 * iss
    else:
        impact = 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02) ** 15

    exploitability = (
        8.22
        * ATTACK_VECTOR_WEIGHTS[vector.av]
        * ATTACK_COMPLEXITY_WEIGHTS[vector.ac]
        * PRIVILEGES_WEIGHTS[vector.scope][vector.pr]
        * USER_INTERACTION_WEIGHTS[vector.ui]
    )

    if impact <= 0:
        base = 0.0
    elif vector.scope == Scope.UNCHANGED:
        base = roundup(min(impact + exploitability, 10))
    else:
        base = roundup(min(1.08 * (impact + exploitability), 10))

    return CvssScore(
        base=base,
        severity=severity_for(base),
        impact=round(max(impact, 0.0), 1),
        exploitability=round(exploitability, 1),
    )


def score_vector(text: str, strict: bool = True) -> CvssScore:
    """Parse and score in one step."""
    return base_score(parse_vector(text, strict=strict))
