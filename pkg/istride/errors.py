"""
Exception hierarchy shared by the catalog, scoring, ingestion and CLI layers.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable, Optional

if TYPE_CHECKING:
    from .models import Violation


class IStrideError(RuntimeError):
    """Base exception for istride errors."""


class ParseError(IStrideError):
    """A document could not be read or does not match the expected shape."""

    def __init__(
        self,
        message: str,
        *,
        source: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.source = source
        self.line = line
        self.field = field
        context = []
        if source:
            context.append(source)
        if line is not None:
            context.append(f"line {line}")
        if field:
            context.append(f"field {field}")
        prefix = f"{': '.join(context)}: " if context else ""
        super().__init__(f"{prefix}{message}")


class VectorError(ParseError):
    """A CVSS vector string is malformed."""


class UsageError(IStrideError):
    """Invalid command-line arguments."""


class ValidationError(IStrideError):
    """A parsed catalog breaks one or more catalog invariants."""

    def __init__(self, violations: Iterable["Violation"]):
        self.violations = list(violations)
        details = "; ".join(f"{v.entity_id}: {v.message}" for v in self.violations)
        super().__init__(f"{len(self.violations)} catalog violation(s): {details}")


class DomainError(IStrideError):
    """A scoring input lies outside its valid range."""

    def __init__(self, message: str, *, threat_id: Optional[str] = None):
        self.threat_id = threat_id
        super().__init__(f"threat {threat_id}: {message}" if threat_id else message)


class UnknownAsset(IStrideError, LookupError):
    def __init__(self, asset_id: str):
        self.asset_id = asset_id
        super().__init__(f"Unknown asset: {asset_id}")


class UnknownArea(IStrideError, LookupError):
    def __init__(self, area_id: str):
        self.area_id = area_id
        super().__init__(f"Unknown knowledge area: {area_id}")
