"""Initialize priorities across the workflow type classes.

The running-example fixture has no subprocess, resource, or device types, so
this synthetic log exercises the retrieval order: lifecycle first, then
complete aggregations for subprocesses (sparing the most coarse-grained one),
devices and resources, then control-flow aggregations leaves-up — and never a
complete aggregation of a business artifact.
"""

import json
import logging

import pytest

from granex.abstraction import default_repository
from granex.discovery import extract_traces
from granex.errors import ParseError
from granex.ocel import ABSTRACTION_SUFFIXES, build_log, parse_log
from granex.session import initialize


def _event(eid, act, second, *relations):
    merged = {}
    for rel in relations:
        merged.update(rel)
    return {
        "id": eid,
        "activity": act,
        "timestamp": f"2024-03-01T09:{second // 60:02d}:{second % 60:02d}",
        "relations": merged,
    }


@pytest.fixture
def mixed_log():
    main = {"workflow:main": ["m1"]}
    rows = [
        _event("e00", "intake", 0, main),
        _event("e01", "check stock", 10, main),
        _event("e02", "book slot", 20, main),
        _event("e03", "oven - start", 30, main, {"workflow:lc:oven": ["l1"]}),
        _event("e04", "oven - end", 40, main, {"workflow:lc:oven": ["l1"]}),
        _event("e05", "cut part", 50, main, {"workflow:sp:small": ["s1"]}),
        _event("e06", "sand part", 60, main, {"workflow:sp:small": ["s1"]}),
        _event("e07", "weld a", 70, main, {"workflow:sp:big": ["s2"]}),
        _event("e08", "weld b", 80, main, {"workflow:sp:big": ["s2"]}),
        _event("e09", "weld c", 90, main, {"workflow:sp:big": ["s2"]}),
        _event("e10", "weld d", 100, main, {"workflow:sp:big": ["s2"]}),
        _event("e11", "log usage", 110, main, {"workflow:dev:machine": ["d1"]}),
        _event("e12", "sign off", 120, main, {"workflow:res:worker": ["r1"]}),
        _event("e13", "pack", 130, main),
        _event("e14", "ship", 140, main),
    ]
    doc = {
        "objects": {
            "m1": {"type": "workflow:main"},
            "l1": {"type": "workflow:lc:oven"},
            "s1": {"type": "workflow:sp:small"},
            "s2": {"type": "workflow:sp:big"},
            "d1": {"type": "workflow:dev:machine"},
            "r1": {"type": "workflow:res:worker"},
        },
        "events": rows,
    }
    return parse_log(json.dumps(doc).encode())


def suffix_and_target(session, oid):
    atype = session.log.objects[oid]
    return atype.rsplit("$", 1)[1], atype[len("abstraction:"):].rsplit("$", 1)[0]


class TestRetrievalPriorities:
    def test_order_and_exemptions(self, mixed_log):
        session = initialize(mixed_log, threshold=0, seed=0)
        applied = [suffix_and_target(session, oid) for oid in session.log.history]
        # lifecycle cla first, then complete subprocess / device / resource
        assert applied[0] == ("cla", "workflow:lc:oven")
        assert applied[1] == ("csa", "workflow:sp:small")
        assert applied[2] == ("caa", "workflow:dev:machine")
        assert applied[3] == ("caa", "workflow:res:worker")
        # the most coarse-grained subprocess (most events) is never auto-aggregated,
        # and business artifacts are only ever aggregated by control-flow nodes
        assert "workflow:sp:big" not in {t for _, t in applied}
        assert ("caa", "workflow:main") not in applied
        # afterwards only control-flow aggregations remain
        assert {s for s, _ in applied[4:]} <= {"seq", "xor", "and", "loop"}
        assert session.warnings, "threshold 0 is unreachable, so a warning is due"
        assert set(session.current_model().object_types()) == {"workflow:main", "workflow:sp:big"}

    def test_spared_subprocess_stays_interactive(self, mixed_log):
        session = initialize(mixed_log, threshold=0, seed=0)
        keys = {n.kind for n in session.available()}
        assert "csa" in keys  # sp:big's root is offered for a human to pick
        spared = [n for n in session.available() if n.kind == "csa"]
        assert [n.otype for n in spared] == ["workflow:sp:big"]

    def test_threshold_between_classes_stops_early(self, mixed_log):
        full = initialize(mixed_log, threshold=10**9, seed=0)
        start = len(full.original_net.places) + len(full.original_net.transitions)
        after_cla = start - 3  # the oven lifecycle contributes three places
        session = initialize(mixed_log, threshold=after_cla, seed=0)
        assert [suffix_and_target(session, oid) for oid in session.log.history] == [
            ("cla", "workflow:lc:oven")
        ]


class TestSmallContracts:
    def test_repository_has_exactly_the_seven_entries(self):
        assert set(default_repository()) == set(ABSTRACTION_SUFFIXES)

    def test_mixed_timestamp_kinds_rejected(self):
        from datetime import datetime, timezone

        from granex.ocel import Event

        events = [
            Event(eid="e1", activity="a", timestamp=datetime(2024, 1, 1),
                  wfomap={"workflow:x": frozenset({"o1"})}),
            Event(eid="e2", activity="b", timestamp=datetime(2024, 1, 1, tzinfo=timezone.utc),
                  wfomap={"workflow:x": frozenset({"o1"})}),
        ]
        with pytest.raises(ParseError, match="comparable"):
            build_log(events, {"o1": "workflow:x"})

    def test_eventless_object_excluded_with_warning(self, mixed_log, caplog):
        doc = json.loads(open("src/granex/data/account_opening.json", "rb").read())
        doc["objects"]["idle1"] = {"type": "workflow:client"}
        log = parse_log(json.dumps(doc).encode())
        with caplog.at_level(logging.WARNING):
            traces = extract_traces(log, "workflow:client")
        assert len(traces) == 1
        assert any("idle1" in rec.message for rec in caplog.records)
