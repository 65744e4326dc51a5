from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable, Dict

import pytest

from istride.catalog import load_catalog
from istride.models import ServiceCatalog

from .helpers import FIXTURES


@pytest.fixture()
def eucalyptus_path() -> Path:
    return FIXTURES / "eucalyptus.catalog.json"


@pytest.fixture()
def openstack_path() -> Path:
    return FIXTURES / "openstack.catalog.json"


@pytest.fixture()
def feed_path() -> Path:
    return FIXTURES / "openstack.nvd.json"


@pytest.fixture()
def eucalyptus(eucalyptus_path: Path) -> ServiceCatalog:
    return load_catalog(eucalyptus_path)


@pytest.fixture()
def openstack(openstack_path: Path) -> ServiceCatalog:
    return load_catalog(openstack_path)


@pytest.fixture()
def write_catalog(tmp_path: Path) -> Callable[..., Path]:
    def _write(payload: Dict[str, Any], name: str = "catalog.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        return path

    return _write
