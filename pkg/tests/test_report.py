from __future__ import annotations

import json

import pytest

from istride.catalog import load_catalog
from istride.errors import UnknownArea
from istride.models import BloomLevel, ServiceCatalog
from istride.report import TABLE_WIDTH, TableKind, build_report, render_json, render_table

from .helpers import FIXTURES, GOLDEN, PINNED_TIME, catalog_payload, threat_payload


@pytest.mark.parametrize("service", ["eucalyptus", "openstack"])
def test_report_matches_golden_bytes(service):
    catalog = load_catalog(FIXTURES / f"{service}.catalog.json")
    rendered = render_json(build_report(catalog, PINNED_TIME))
    assert rendered == (GOLDEN / f"{service}.report.json").read_text(encoding="utf-8")


def test_json_rendering_is_byte_stable(eucalyptus):
    first = render_json(build_report(eucalyptus, PINNED_TIME))
    second = render_json(build_report(eucalyptus, PINNED_TIME))
    assert first == second
    assert first.endswith("}\n")


def test_json_key_order(openstack):
    payload = json.loads(render_json(build_report(openstack, PINNED_TIME)))
    assert list(payload) == [
        "schema_version",
        "service_name",
        "generated_on",
        "scale",
        "entries",
        "training_needs",
        "evidence_plan",
        "unassessed_areas",
        "threats",
    ]
    assert list(payload["entries"][0]) == [
        "rank",
        "threat_id",
        "threat_name",
        "knowledge_area",
        "t_s",
        "k_s",
        "priority",
        "display",
    ]


def test_openstack_display_values(openstack):
    payload = json.loads(render_json(build_report(openstack, PINNED_TIME)))
    assert [entry["display"] for entry in payload["entries"]] == ["2.50", "2.33", "1.00"]


def test_eucalyptus_report(eucalyptus):
    report = build_report(eucalyptus, PINNED_TIME)
    assert report.unassessed_areas == ["wsdl-security-and-investigation"]
    assert len(report.evidence_plan) == 10
    assert {item.asset_id for item in report.evidence_plan} == {
        "cloud-controller",
        "cluster-controller",
        "node-controller",
        "cloud-client",
    }
    payload = json.loads(render_json(report))
    by_id = {entry["threat_id"]: entry["display"] for entry in payload["entries"]}
    assert by_id["xml-denial-of-service"] == "0.50"
    assert by_id["replay-attack-flaws"] == "2.50"


def test_report_ids_are_consistent(eucalyptus):
    report = build_report(eucalyptus, PINNED_TIME)
    threat_ids = {threat.id for threat in report.threats}
    assert {entry.threat_id for entry in report.entries} == threat_ids
    assert {item.threat_id for item in report.evidence_plan} <= threat_ids
    assert {tid for need in report.training_needs for tid in need.threat_ids} == threat_ids


def test_single_override_is_a_what_if(openstack):
    report = build_report(
        openstack, PINNED_TIME, overrides={"swift-object-servers": BloomLevel.CREATING}
    )
    assert report.entries[-1].threat_id == "old-x-timestamp-requests"
    assert report.entries[-1].priority == -6.0


def test_overrides_fill_unassessed_areas(eucalyptus):
    report = build_report(
        eucalyptus,
        PINNED_TIME,
        overrides={
            "wsdl-security-and-investigation": BloomLevel.APPLYING,
            "soap-exploit-prevention-and-investigation": BloomLevel.CREATING,
        },
    )
    assert report.unassessed_areas == []
    assert report.entries[0].threat_id == "wsdl-parameter-tampering"
    assert report.entries[0].priority == 1.5


def test_unknown_override_area(openstack):
    with pytest.raises(UnknownArea):
        build_report(openstack, PINNED_TIME, overrides={"nova": BloomLevel.APPLYING})
    with pytest.raises(UnknownArea):
        build_report(
            openstack,
            PINNED_TIME,
            overrides={"nova": BloomLevel.APPLYING, "swift-proxy": BloomLevel.CREATING},
        )


def test_impact_filter(openstack):
    report = build_report(openstack, PINNED_TIME, impact="security bypass")
    assert [entry.threat_id for entry in report.entries] == [
        "arbitrary-xml-responses",
        "reauth-deleted-user-old-token",
    ]
    assert all(item.threat_id != "old-x-timestamp-requests" for item in report.evidence_plan)


def test_threats_table_shape(eucalyptus):
    table = render_table(build_report(eucalyptus, PINNED_TIME), TableKind.THREATS)
    lines = table.splitlines()
    expected = ["Threat", "Description", "Asset", "Threat Impact", "Potential Evidential Sources"]
    for header in expected:
        assert header in lines[0]
    assert "CVSS" not in lines[0]
    assert len(lines) == 2 + 4
    assert lines[2].startswith("XML Denial of Service")
    assert "XML Denial of Service" in table
    assert "Cloud Controller, Cluster Controller, Node Controller, Cloud Client" in table


def test_cvss_threats_table_has_score_and_knowledge(openstack):
    table = render_table(build_report(openstack, PINNED_TIME), "threats")
    header = table.splitlines()[0]
    assert "CVSS" in header
    assert "Knowledge" in header
    assert "7.5" in table
    assert "Account server" in table


def test_priorities_table(openstack):
    table = render_table(build_report(openstack, PINNED_TIME), TableKind.PRIORITIES)
    lines = table.splitlines()
    assert lines[0].startswith("Priority")
    assert lines[2].startswith("2.50")
    assert "Generate unparsable or arbitrary XML responses" in lines[2]
    assert lines[3].startswith("2.33")
    assert lines[4].startswith("1.00")


def test_evidence_and_training_tables(openstack):
    report = build_report(openstack, PINNED_TIME)
    evidence = render_table(report, TableKind.EVIDENCE)
    assert "Collection Notes" in evidence.splitlines()[0]
    assert "Tombstone files" in evidence

    training = render_table(report, TableKind.TRAINING).splitlines()
    assert training[0].split() == ["Knowledge", "Level", "Priority", "Threats"]
    assert training[2].startswith("Account server")
    assert "applying" in training[2]


def test_prose_columns_are_truncated():
    long_text = "Detailed investigation of the WSDL file " * 5
    catalog = ServiceCatalog.model_validate(
        catalog_payload(
            threats=[
                threat_payload(
                    evidential_sources=[{"location": "WSDL files", "description": long_text}]
                )
            ]
        )
    )
    table = render_table(build_report(catalog, PINNED_TIME), TableKind.PRIORITIES)
    assert long_text.strip() not in table
    assert "..." in table
    assert "WSDL Parameter Tampering" in table
    assert all(len(line) <= TABLE_WIDTH for line in table.splitlines())


def test_empty_catalog_renders_header_only():
    catalog = ServiceCatalog(schema_version="1", service_name="Empty", scale={"kind": "cvss"})
    report = build_report(catalog, PINNED_TIME)
    for kind in TableKind:
        lines = render_table(report, kind).splitlines()
        assert len(lines) == 2, kind
    payload = json.loads(render_json(report))
    assert payload["entries"] == []
    assert payload["unassessed_areas"] == []


def test_color_marks_headers(openstack):
    table = render_table(build_report(openstack, PINNED_TIME), TableKind.PRIORITIES, color=True)
    assert "\033[1mPriority\033[0m" in table
