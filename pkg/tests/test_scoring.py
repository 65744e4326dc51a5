from __future__ import annotations

from datetime import date

import pytest

from istride.errors import DomainError, UnknownArea
from istride.models import BloomLevel, KnowledgeAssessment, ServiceCatalog
from istride.scoring import (
    ScoringInput,
    bloom_score,
    display_priority,
    effective_levels,
    knowledge_priority,
    prioritize,
    training_needs,
    what_if,
)

from .helpers import catalog_payload, threat_payload


@pytest.mark.parametrize(
    "t_s, t_max, k_s, expected",
    [
        (10, 10, 6, "0.00"),
        (2, 10, 1, "0.33"),
        (3, 3, 5, "0.50"),
        (3, 3, 1, "2.50"),
        (4, 10, 1, "2.33"),
        (6, 10, 3, "1.00"),
        (7.5, 10, 3, "2.50"),
    ],
)
def test_printed_priorities(t_s, t_max, k_s, expected):
    priority = knowledge_priority(ScoringInput(t_s=t_s, t_max=t_max, k_s=k_s))
    assert display_priority(priority) == expected


def test_priority_is_exact_before_display():
    assert knowledge_priority(ScoringInput(t_s=3, t_max=3, k_s=5)) == 0.5
    assert knowledge_priority(ScoringInput(t_s=4, t_max=10, k_s=1)) == pytest.approx(7 / 3)


def test_unassessed_knowledge_leaves_full_risk():
    assert knowledge_priority(ScoringInput(t_s=7.5, t_max=10, k_s=0)) == 7.5


def test_full_knowledge_on_low_risk_goes_negative():
    assert knowledge_priority(ScoringInput(t_s=4, t_max=10, k_s=6)) == -6.0


@pytest.mark.parametrize(
    "inp, fragment",
    [
        (ScoringInput(t_s=1, t_max=0, k_s=1), "t_max"),
        (ScoringInput(t_s=1, t_max=-3, k_s=1), "t_max"),
        (ScoringInput(t_s=1, t_max=3, k_s=1, k_max=0), "k_max"),
        (ScoringInput(t_s=4, t_max=3, k_s=1), "t_s"),
        (ScoringInput(t_s=-1, t_max=3, k_s=1), "t_s"),
        (ScoringInput(t_s=1, t_max=3, k_s=7), "k_s"),
        (ScoringInput(t_s=1, t_max=3, k_s=-1), "k_s"),
        (ScoringInput(t_s=1, t_max=float("inf"), k_s=1), "t_max"),
        (ScoringInput(t_s=float("nan"), t_max=3, k_s=1), "t_s"),
        (ScoringInput(t_s=1, t_max=float("nan"), k_s=0), "t_max"),
    ],
)
def test_domain_errors(inp, fragment):
    with pytest.raises(DomainError) as excinfo:
        knowledge_priority(inp)
    assert fragment in str(excinfo.value)


def test_bloom_scores():
    assert bloom_score(BloomLevel.NOT_ASSESSED) == 0
    assert bloom_score(BloomLevel.REMEMBERING) == 1
    assert bloom_score(BloomLevel.APPLYING) == 3
    assert bloom_score(BloomLevel.CREATING) == 6


@pytest.mark.parametrize(
    "value, expected",
    [(0.125, "0.13"), (-0.125, "-0.13"), (2.5, "2.50"), (1 / 3, "0.33"), (-6.0, "-6.00")],
)
def test_display_rounds_half_away_from_zero(value, expected):
    assert display_priority(value) == expected


def test_eucalyptus_ranking(eucalyptus):
    entries = prioritize(eucalyptus)
    assert [entry.threat_id for entry in entries] == [
        "wsdl-parameter-tampering",
        "replay-attack-flaws",
        "schema-poisoning",
        "xml-denial-of-service",
    ]
    assert [display_priority(entry.priority) for entry in entries] == [
        "3.00",
        "2.50",
        "0.50",
        "0.50",
    ]
    assert [entry.rank for entry in entries] == [1, 2, 3, 4]
    assert entries[0].k_s == 0


def test_openstack_ranking(openstack):
    entries = prioritize(openstack)
    assert [entry.threat_id for entry in entries] == [
        "arbitrary-xml-responses",
        "old-x-timestamp-requests",
        "reauth-deleted-user-old-token",
    ]
    assert [display_priority(entry.priority) for entry in entries] == ["2.50", "2.33", "1.00"]


def test_prioritize_is_idempotent(openstack):
    assert prioritize(openstack) == prioritize(openstack)


def test_ties_prefer_higher_technology_risk():
    catalog = ServiceCatalog.model_validate(
        catalog_payload(
            threats=[
                threat_payload(id="a-low", risk={"value": 2}, knowledge_area="wsdl"),
                threat_payload(id="b-high", risk={"value": 3}, knowledge_area="soap"),
            ],
            knowledge_areas=[
                {"id": "wsdl", "name": "WSDL Security and Investigation"},
                {"id": "soap", "name": "SOAP exploit prevention and investigation"},
            ],
            assessments=[{"area": "soap", "level": "understanding", "assessed_on": "2014-01-15"}],
        )
    )
    entries = prioritize(catalog)
    assert [entry.priority for entry in entries] == [2.0, 2.0]
    assert [entry.threat_id for entry in entries] == ["b-high", "a-low"]


def test_what_if_moves_threat_to_the_bottom(openstack):
    entries = what_if(openstack, "swift-object-servers", BloomLevel.CREATING)
    assert entries[-1].threat_id == "old-x-timestamp-requests"
    assert entries[-1].priority == -6.0
    assert entries[-1].k_s == 6


def test_what_if_leaves_catalog_untouched(openstack):
    before = prioritize(openstack)
    what_if(openstack, "swift-object-servers", BloomLevel.CREATING)
    assert prioritize(openstack) == before


def test_what_if_unknown_area(openstack):
    with pytest.raises(UnknownArea):
        what_if(openstack, "nova-compute", BloomLevel.APPLYING)


def test_latest_assessment_wins(openstack):
    catalog = openstack.model_copy(
        update={
            "assessments": [
                *openstack.assessments,
                KnowledgeAssessment(
                    area="swift-proxy", level=BloomLevel.CREATING, assessed_on=date(2015, 6, 1)
                ),
            ]
        }
    )
    assert effective_levels(catalog)["swift-proxy"] == BloomLevel.CREATING
    assert effective_levels(openstack)["swift-proxy"] == BloomLevel.APPLYING


def test_out_of_range_risk_names_the_threat(openstack):
    threat = openstack.threats[0]
    broken = threat.model_copy(update={"risk": threat.risk.model_copy(update={"value": 12.0})})
    catalog = openstack.model_copy(update={"threats": [broken, *openstack.threats[1:]]})
    with pytest.raises(DomainError) as excinfo:
        prioritize(catalog)
    assert excinfo.value.threat_id == "old-x-timestamp-requests"


def test_unscored_threats_are_left_out(openstack):
    threat = openstack.threats[0].model_copy(update={"risk": None})
    catalog = openstack.model_copy(update={"threats": [threat, *openstack.threats[1:]]})
    assert [entry.threat_id for entry in prioritize(catalog)] == [
        "arbitrary-xml-responses",
        "reauth-deleted-user-old-token",
    ]


def test_training_needs_group_by_area(eucalyptus):
    needs = training_needs(eucalyptus, prioritize(eucalyptus))
    assert [need.area_id for need in needs] == [
        "wsdl-security-and-investigation",
        "soap-exploit-prevention-and-investigation",
        "xml-attack-vector-investigation",
    ]
    assert needs[0].level == BloomLevel.NOT_ASSESSED
    assert needs[2].level == BloomLevel.EVALUATING
    assert needs[2].threat_ids == ["schema-poisoning", "xml-denial-of-service"]
    assert needs[2].priority == 0.5
