"""
Knowledge-risk scoring.

The knowledge priority of a threat is ``T_s - (K_s / K_max) * T_max``: the technology
risk score minus the organization's Bloom-level knowledge of the matching
investigation area, rescaled onto the technology scale. High values mark severe
threats the organization is least able to investigate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Dict, List, Mapping, Optional

from .catalog import CatalogIndex
from .errors import DomainError
from .models import K_MAX, AreaPriority, BloomLevel, PriorityEntry, ServiceCatalog

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoringInput:
    t_s: float
    t_max: float
    k_s: float
    k_max: float = K_MAX


def knowledge_priority(inp: ScoringInput) -> float:
    """
    Compute the knowledge priority for one threat.

    The result lies in ``[t_s - t_max, t_s]``. Arithmetic is exact (rational) and the
    result is rounded to the nearest float once, so equal priorities compare equal.

    Raises
    ------
    DomainError
        If an input is not finite, a maximum is not positive or a score lies outside
        ``[0, max]``.
    """
    for name in ("t_s", "t_max", "k_s", "k_max"):
        if not math.isfinite(getattr(inp, name)):
            raise DomainError(f"{name} must be a finite number, got {getattr(inp, name)}")
    if inp.t_max <= 0:
        raise DomainError(f"t_max must be positive, got {inp.t_max:g}")
    if inp.k_max <= 0:
        raise DomainError(f"k_max must be positive, got {inp.k_max:g}")
    if not 0 <= inp.t_s <= inp.t_max:
        raise DomainError(f"t_s {inp.t_s:g} outside [0, {inp.t_max:g}]")
    if not 0 <= inp.k_s <= inp.k_max:
        raise DomainError(f"k_s {inp.k_s:g} outside [0, {inp.k_max:g}]")

    t_s, t_max = Fraction(inp.t_s), Fraction(inp.t_max)
    k_s, k_max = Fraction(inp.k_s), Fraction(inp.k_max)
    return float(t_s - (k_s / k_max) * t_max)


def bloom_score(level: BloomLevel) -> int:
    """Knowledge score of a Bloom level: Remembering 1 ... Creating 6, NotAssessed 0."""
    return int(level)


def display_priority(value: float) -> str:
    """Two decimals, half away from zero. Presentation only."""
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def effective_levels(
    catalog: ServiceCatalog, overrides: Optional[Mapping[str, BloomLevel]] = None
) -> Dict[str, BloomLevel]:
    """Knowledge-area id -> effective Bloom level; the latest assessment wins."""
    levels: Dict[str, BloomLevel] = {}
    latest = {}
    for assessment in catalog.assessments:
        previous = latest.get(assessment.area)
        if previous is None or assessment.assessed_on >= previous:
            latest[assessment.area] = assessment.assessed_on
            levels[assessment.area] = assessment.level
    if overrides:
        levels.update(overrides)
    return levels


def prioritize(
    catalog: ServiceCatalog, overrides: Optional[Mapping[str, BloomLevel]] = None
) -> List[PriorityEntry]:
    """
    Rank every scored threat of the catalog by knowledge priority.

    Threats whose knowledge area has no assessment use ``k_s = 0``. Ties are broken by
    higher technology risk, then by threat id. Unscored threats (incomplete drafts) are
    left out.
    """
    levels = effective_levels(catalog, overrides)
    t_max = catalog.scale.t_max

    scored = []
    for threat in catalog.threats:
        if threat.risk is None:
            LOG.warning(
                "Skipping unscored threat",
                extra={"extra_payload": {"threat_id": threat.id}},
            )
            continue
        k_s = bloom_score(levels.get(threat.knowledge_area, BloomLevel.NOT_ASSESSED))
        try:
            priority = knowledge_priority(
                ScoringInput(t_s=threat.risk.value, t_max=t_max, k_s=k_s, k_max=K_MAX)
            )
        except DomainError as exc:
            raise DomainError(str(exc), threat_id=threat.id) from exc
        scored.append((threat, k_s, priority))

    scored.sort(key=lambda item: (-item[2], -item[0].risk.value, item[0].id))
    return [
        PriorityEntry(
            threat_id=threat.id,
            threat_name=threat.name,
            knowledge_area=threat.knowledge_area,
            t_s=threat.risk.value,
            k_s=k_s,
            priority=priority,
            rank=rank,
        )
        for rank, (threat, k_s, priority) in enumerate(scored, start=1)
    ]


def what_if(catalog: ServiceCatalog, area: str, new_level: BloomLevel) -> List[PriorityEntry]:
    """Re-rank under a hypothetical assessment of one knowledge area."""
    CatalogIndex(catalog).require_area(area)
    LOG.info(
        "What-if assessment override",
        extra={"extra_payload": {"area": area, "level": new_level.verb}},
    )
    return prioritize(catalog, overrides={area: new_level})


def training_needs(
    catalog: ServiceCatalog,
    entries: List[PriorityEntry],
    overrides: Optional[Mapping[str, BloomLevel]] = None,
) -> List[AreaPriority]:
    """Group ranked entries by knowledge area; the area's priority is its worst threat's."""
    index = CatalogIndex(catalog)
    levels = effective_levels(catalog, overrides)
    grouped: Dict[str, List[PriorityEntry]] = {}
    for entry in entries:
        grouped.setdefault(entry.knowledge_area, []).append(entry)

    needs = [
        AreaPriority(
            area_id=area_id,
            area_name=index.area_name(area_id),
            level=levels.get(area_id, BloomLevel.NOT_ASSESSED),
            priority=max(entry.priority for entry in area_entries),
            threat_ids=[entry.threat_id for entry in area_entries],
        )
        for area_id, area_entries in grouped.items()
    ]
    needs.sort(key=lambda need: (-need.priority, need.area_id))
    return needs
