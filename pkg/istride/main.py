"""
Command-line entry point: validate -> (ingest) -> assess -> report.

Exit codes: 0 success, 1 unreadable or unparseable input (or bad arguments),
2 semantic violation (catalog invariants, scoring domain, unknown ids).
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from pydantic import ValidationError as PydanticValidationError

from .catalog import CatalogIndex, load_catalog, save_catalog, validate
from .config import CliConfig, OutputFormat, Settings, load_settings
from .cvss import score_vector
from .errors import (
    DomainError,
    ParseError,
    UnknownArea,
    UnknownAsset,
    UsageError,
    ValidationError,
)
from .ingest import merge_drafts, parse_feed, to_draft
from .logging_setup import configure_logging
from .models import BloomLevel, StrideCategory
from .report import TableKind, build_report, render_json, render_table

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VIOLATION = 2


class ArgumentParser(argparse.ArgumentParser):
    """Report argument errors as UsageError so they map onto the exit-code contract."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def parse_args(argv: list[str]) -> argparse.Namespace:
    common = ArgumentParser(add_help=False)
    common.add_argument("--catalog", dest="catalog_flag", type=Path, help="Catalog JSON file.")
    common.add_argument(
        "--format",
        choices=[fmt.value for fmt in OutputFormat],
        default=OutputFormat.TABLE.value,
        help="Output format (default: table).",
    )
    common.add_argument(
        "--lenient",
        action="store_true",
        help="Warn about unknown catalog keys instead of rejecting the document.",
    )
    common.add_argument("--out", type=Path, help="Write output to this file instead of stdout.")
    common.add_argument("--log-level", help="Override ISTRIDE_LOG_LEVEL.")
    common.add_argument(
        "--what-if",
        metavar="AREA=LEVEL",
        help="Hypothetical Bloom level (verb or 0-6) for one knowledge area.",
    )

    parser = ArgumentParser(
        prog="istride",
        description="I-STRIDE threat catalogs, knowledge-priority scoring and reports.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    validate_cmd = subparsers.add_parser(
        "validate", parents=[common], help="Check a catalog against its invariants."
    )
    validate_cmd.add_argument("catalog", nargs="?", type=Path)

    assess_cmd = subparsers.add_parser(
        "assess", parents=[common], help="Rank threats by knowledge priority."
    )
    assess_cmd.add_argument("catalog", nargs="?", type=Path)
    assess_cmd.add_argument("--impact", help="Only threats with this impact label.")

    report_cmd = subparsers.add_parser(
        "report", parents=[common], help="Render threat, priority, evidence or training tables."
    )
    report_cmd.add_argument("catalog", nargs="?", type=Path)
    report_cmd.add_argument(
        "--kind",
        choices=[kind.value for kind in TableKind],
        default=TableKind.PRIORITIES.value,
    )

    ingest_cmd = subparsers.add_parser(
        "ingest", parents=[common], help="Merge CVE feed entries into a catalog as drafts."
    )
    ingest_cmd.add_argument("feed", type=Path, help="NVD JSON export (1.1 or 2.0, .gz accepted).")
    ingest_cmd.add_argument(
        "--category", required=True, help="STRIDE category assigned to every draft."
    )

    score_cmd = subparsers.add_parser("score-cvss", help="Score a CVSS v3.1 vector.")
    score_cmd.add_argument("vector")
    score_cmd.add_argument("--log-level", help="Override ISTRIDE_LOG_LEVEL.")

    return parser.parse_args(argv)


def build_config(args: argparse.Namespace) -> CliConfig:
    catalog_path = getattr(args, "catalog_flag", None) or getattr(args, "catalog", None)

    override = None
    what_if_arg = getattr(args, "what_if", None)
    if what_if_arg:
        area, sep, level = what_if_arg.partition("=")
        if not sep or not area.strip():
            raise UsageError(f"--what-if expects AREA=LEVEL, got {what_if_arg!r}")
        try:
            override = (area.strip(), BloomLevel.parse(level))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    category = None
    if getattr(args, "category", None):
        try:
            category = StrideCategory.parse(args.category)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    try:
        return CliConfig(
            command=args.command,
            catalog_path=catalog_path,
            output_format=getattr(args, "format", OutputFormat.TABLE.value),
            lenient=getattr(args, "lenient", False),
            category=category,
            override=override,
            impact=getattr(args, "impact", None),
            out=getattr(args, "out", None),
        )
    except PydanticValidationError as exc:
        raise UsageError(exc.errors()[0]["msg"]) from exc


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    LOG.info("Output written", extra={"extra_payload": {"path": str(out)}})


# Commands ----------------------------------------------------------------------------------


def cmd_validate(cfg: CliConfig) -> int:
    catalog = load_catalog(cfg.catalog_path, lenient=cfg.lenient, check=False)
    if cfg.override:
        CatalogIndex(catalog).require_area(cfg.override[0])
    violations = validate(catalog)
    if not violations:
        _emit("OK\n", cfg.out)
        return EXIT_OK
    _emit("".join(f"{violation}\n" for violation in violations), cfg.out)
    return EXIT_VIOLATION


def cmd_assess(cfg: CliConfig, settings: Settings, now: Optional[datetime] = None) -> int:
    catalog = load_catalog(cfg.catalog_path, lenient=cfg.lenient)
    overrides = dict([cfg.override]) if cfg.override else None
    report = build_report(
        catalog,
        generated_on=now or datetime.now(tz=timezone.utc),
        overrides=overrides,
        impact=cfg.impact,
    )
    if cfg.output_format == OutputFormat.JSON:
        text = render_json(report)
    else:
        text = render_table(report, TableKind.PRIORITIES, color=settings.color)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_report(
    cfg: CliConfig, kind: TableKind, settings: Settings, now: Optional[datetime] = None
) -> int:
    catalog = load_catalog(cfg.catalog_path, lenient=cfg.lenient)
    report = build_report(
        catalog,
        generated_on=now or datetime.now(tz=timezone.utc),
        overrides=dict([cfg.override]) if cfg.override else None,
    )
    if cfg.output_format == OutputFormat.JSON:
        text = render_json(report)
    else:
        text = render_table(report, kind, color=settings.color)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_ingest(cfg: CliConfig, feed_path: Path) -> int:
    if cfg.category is None:
        raise UsageError("ingest requires --category")
    if cfg.override:
        LOG.warning(
            "--what-if has no effect on ingest",
            extra={"extra_payload": {"area": cfg.override[0]}},
        )
    records = parse_feed(feed_path)
    drafts = [to_draft(record, cfg.category) for record in records]
    catalog = load_catalog(cfg.catalog_path, lenient=cfg.lenient, check=False)
    result = merge_drafts(catalog, drafts)

    if cfg.out is not None:
        save_catalog(result.catalog, cfg.out)
        LOG.info(
            "Merged catalog written",
            extra={"extra_payload": {"path": str(cfg.out), "merged": len(result.merged)}},
        )

    lines = [f"{len(result.merged)} drafts merged"]
    lines.extend(f"skipped {threat_id}: id already in catalog" for threat_id in result.skipped)
    unscored = [draft.id for draft in drafts if draft.risk is None and draft.id in result.merged]
    lines.extend(f"unscored {threat_id}: no CVSS data in feed" for threat_id in unscored)
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_score_cvss(vector: str) -> int:
    sys.stdout.write(f"{score_vector(vector)}\n")
    return EXIT_OK


def main(argv: list[str] | None = None, now: Optional[datetime] = None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        settings = load_settings()
        configure_logging(args.log_level or settings.log_level, command=args.command)
        cfg = build_config(args)

        if cfg.command == "validate":
            return cmd_validate(cfg)
        if cfg.command == "assess":
            return cmd_assess(cfg, settings, now=now)
        if cfg.command == "report":
            return cmd_report(cfg, TableKind(args.kind), settings, now=now)
        if cfg.command == "ingest":
            return cmd_ingest(cfg, args.feed)
        return cmd_score_cvss(args.vector)
    except ValidationError as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        return EXIT_VIOLATION
    except (DomainError, UnknownAsset, UnknownArea) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ParseError, UsageError, PydanticValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover - CLI entry
    raise SystemExit(main())
