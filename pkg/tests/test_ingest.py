import json
from collections import Counter

import pytest

from citywall import (
    CommunicationLink,
    ParseError,
    TraceRecord,
    ValidationError,
    aggregate_traces,
    ingest_structure,
    read_trace_records,
)


# ---------------------------------------------------------------- structure ingest

def test_petclinic_fixture_counts(petclinic_model, petclinic_raw):
    assert len(petclinic_model.applications) == 3

    # independent walk over the raw JSON, no model code involved
    def walk(node, prefix):
        path = f"{prefix}.{node['name']}"
        yield ("pkg", path)
        for c in node["classes"]:
            yield ("cls", f"{path}.{c['name']}")
        for s in node["subPackages"]:
            yield from walk(s, path)

    seen = []
    for app in petclinic_raw["applications"]:
        for root in app["packages"]:
            seen.extend(walk(root, app["name"]))
    classes = [p for kind, p in seen if kind == "cls"]
    packages = [p for kind, p in seen if kind == "pkg"]
    assert len(classes) == len(set(classes)) == 122
    assert len(packages) == len(set(packages)) == 24
    assert set(classes) == petclinic_model.class_fqns()


def test_ingest_rejects_malformed_json():
    with pytest.raises(ParseError):
        ingest_structure(b"{nope")
    with pytest.raises(ParseError):
        ingest_structure(json.dumps({"apps": []}))
    with pytest.raises(ParseError):
        ingest_structure(json.dumps({"applications": [{"language": "java"}]}))


def test_ingest_tolerates_absent_package_list():
    model = ingest_structure(json.dumps({"applications": [{"name": "empty"}]}))
    assert model.class_fqns() == set()


def test_ingest_rejects_duplicate_fqn_with_violations():
    doc = {"applications": [{"name": "app", "packages": [
        {"name": "core", "subPackages": [], "classes": [
            {"name": "Main", "methodCount": 1},
            {"name": "Main", "methodCount": 2},
        ]},
    ]}]}
    with pytest.raises(ValidationError) as info:
        ingest_structure(json.dumps(doc))
    assert any("app.core.Main" in v for v in info.value.violations)


# ---------------------------------------------------------------- trace records

def test_trace_record_derives_class_fqn():
    r = TraceRecord("t1", "s1", None, "app.core.Main.run", 0, 10)
    assert r.class_fqn == "app.core.Main"


def test_trace_record_rejects_bad_ranges():
    with pytest.raises(ValueError):
        TraceRecord("t", "s", None, "a.B.m", 10, 5)  # ends before it starts
    with pytest.raises(ValueError):
        TraceRecord("t", "s", None, "a.B.m", -1, 5)
    with pytest.raises(ValueError):
        TraceRecord("t", "s", None, "a.B.m", 0, 2 ** 64)


def test_dotless_fqn_is_unknown_not_fatal(petclinic_model):
    # telemetry is messy; a span that cannot name a class just gets dropped
    r = TraceRecord("t", "s", None, "noDotsAtAll", 0, 5)
    assert r.class_fqn is None
    result = aggregate_traces([r], petclinic_model)
    assert result.dropped_spans == 1


def test_read_trace_records_line_numbers_in_errors():
    good = json.dumps({"traceId": "t", "spanId": "s", "parentSpanId": None,
                       "methodFqn": "a.B.m", "startNanos": 0, "endNanos": 1})
    with pytest.raises(ParseError) as info:
        read_trace_records(good + "\n{broken\n")
    assert "2" in str(info.value)

    records = read_trace_records(good + "\n\n" + good.replace('"s"', '"s2"') + "\n")
    assert [r.span_id for r in records] == ["s", "s2"]


def test_read_trace_records_fixture(petclinic_records):
    assert len(petclinic_records) == 100
    roots = [r for r in petclinic_records if r.parent_span_id is None]
    assert roots  # fixture has trace roots


# ---------------------------------------------------------------- aggregation

def brute_force_links(records, model):
    """Quadratic reference: check every span against every other span."""
    known = model.class_fqns()
    kept = [r for r in records if r.class_fqn in known]
    pairs = Counter()
    selfs = Counter()
    dangling = 0
    for child in kept:
        if child.parent_span_id is None:
            continue
        parent = None
        for cand in kept:
            if cand.trace_id == child.trace_id and cand.span_id == child.parent_span_id:
                parent = cand
                break
        if parent is None:
            dangling += 1
        elif parent.class_fqn == child.class_fqn:
            selfs[child.class_fqn] += 1
        else:
            pairs[(parent.class_fqn, child.class_fqn)] += 1
    links = [CommunicationLink(s, t, n) for (s, t), n in sorted(pairs.items())]
    return links, len(records) - len(kept), dangling, dict(selfs)


def test_aggregation_matches_brute_force(petclinic_records, petclinic_model):
    result = aggregate_traces(petclinic_records, petclinic_model)
    links, dropped, dangling, selfs = brute_force_links(petclinic_records, petclinic_model)
    assert list(result.links) == links
    assert result.dropped_spans == dropped == 5
    assert result.dangling_parents == dangling == 0
    assert dict(result.self_calls) == selfs
    assert sum(selfs.values()) > 0  # fixture exercises the self-call path
    assert result.links == tuple(sorted(result.links, key=lambda l: (l.source_fqn, l.target_fqn)))


def test_aggregation_counts_dangling_parents(petclinic_model):
    known = sorted(petclinic_model.class_fqns())
    records = [
        TraceRecord("t", "child", "ghost", f"{known[0]}.m", 0, 1),
    ]
    result = aggregate_traces(records, petclinic_model)
    assert result.dangling_parents == 1
    assert result.links == ()


def test_aggregation_drops_unknown_classes_before_pairing(petclinic_model):
    known = sorted(petclinic_model.class_fqns())
    records = [
        TraceRecord("t", "root", None, f"{known[0]}.serve", 0, 9),
        TraceRecord("t", "mid", "root", "com.vendor.Agent.hook", 1, 8),
        TraceRecord("t", "leaf", "mid", f"{known[1]}.query", 2, 7),
    ]
    result = aggregate_traces(records, petclinic_model)
    # the unknown middleman is dropped, so the leaf's parent is gone too
    assert result.dropped_spans == 1
    assert result.dangling_parents == 1
    assert result.links == ()


def test_aggregation_same_trace_id_required(petclinic_model):
    known = sorted(petclinic_model.class_fqns())
    records = [
        TraceRecord("t1", "a", None, f"{known[0]}.m", 0, 1),
        TraceRecord("t2", "b", "a", f"{known[1]}.m", 0, 1),
    ]
    result = aggregate_traces(records, petclinic_model)
    assert result.links == ()
    assert result.dangling_parents == 1
