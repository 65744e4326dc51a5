from __future__ import annotations

import io
import json
import logging

import pytest
from pydantic import ValidationError as PydanticValidationError

from istride.config import CliConfig, OutputFormat, Settings, load_settings
from istride.logging_setup import JsonLogFormatter, configure_logging


def test_settings_defaults():
    settings = Settings.model_validate({})
    assert settings.log_level == "WARNING"
    assert settings.color is False


@pytest.mark.parametrize("raw, expected", [("on", True), ("Yes", True), ("0", False), ("", False)])
def test_color_flag_parsing(raw, expected):
    assert Settings.model_validate({"ISTRIDE_COLOR": raw}).color is expected


def test_invalid_settings():
    with pytest.raises(PydanticValidationError):
        Settings.model_validate({"ISTRIDE_LOG_LEVEL": "loud"})
    with pytest.raises(PydanticValidationError):
        Settings.model_validate({"ISTRIDE_COLOR": "maybe"})


def test_explicit_env_file_must_exist(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_settings(tmp_path / "missing.env")


def test_cli_config_requires_catalog_except_for_scoring():
    assert CliConfig(command="score-cvss").catalog_path is None
    with pytest.raises(PydanticValidationError):
        CliConfig(command="assess")
    cfg = CliConfig(command="assess", catalog_path="c.json", output_format="json")
    assert cfg.output_format == OutputFormat.JSON


def test_json_log_formatter_merges_extra_payload():
    record = logging.LogRecord(
        name="istride.ingest",
        level=logging.WARNING,
        pathname=__file__,
        lineno=1,
        msg="Skipping malformed feed item",
        args=(),
        exc_info=None,
    )
    record.extra_payload = {"position": 3, "path": "feed.json"}
    payload = json.loads(JsonLogFormatter().format(record))
    assert payload["level"] == "WARNING"
    assert payload["logger"] == "istride.ingest"
    assert payload["message"] == "Skipping malformed feed item"
    assert payload["position"] == 3


def test_configured_logging_stamps_command(tmp_path):
    stream = io.StringIO()
    configure_logging("info", command="ingest", stream=stream)
    try:
        logging.getLogger("istride.ingest").info(
            "Feed parsed",
            extra={"extra_payload": {"path": tmp_path / "feed.json", "level": "shadowed"}},
        )
    finally:
        logging.getLogger().handlers.clear()
    payload = json.loads(stream.getvalue().splitlines()[0])
    assert payload["command"] == "ingest"
    assert payload["level"] == "INFO"
    assert payload["extra_level"] == "shadowed"
    assert payload["path"].endswith("feed.json")


def test_debug_records_are_dropped_at_warning_level():
    stream = io.StringIO()
    configure_logging("WARNING", stream=stream)
    try:
        logging.getLogger("istride.catalog").debug("Catalog loaded")
    finally:
        logging.getLogger().handlers.clear()
    assert stream.getvalue() == ""
