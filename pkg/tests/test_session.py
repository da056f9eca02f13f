import json

import pytest

from granex.errors import InadmissibleError, StaleRecordError
from granex.nets import size, to_graph_payload
from granex.ocel import parse_log, project_workflow, serialize_log
from granex.session import initialize

from conftest import golden_path

SEQ_RUN = frozenset(
    {
        "t:click open account",
        "t:insert account meta data",
        "t:check account conditions",
        "t:retrieve acceptance signature",
    }
)


def seq_node(session):
    return next(n for n in session.available() if n.transitions == SEQ_RUN)


class TestBuildTree:
    def test_fixture_tree_matches_golden(self, fixture_session):
        got = []
        for key in sorted(fixture_session.tree.nodes):
            node = fixture_session.tree.nodes[key]
            got.append(
                {
                    "otype": node.otype,
                    "kind": node.kind,
                    "transitions": sorted(node.transitions),
                    "depth": node.depth,
                    "parent": node.parent,
                    "children": sorted(node.children),
                }
            )
        golden = json.loads(golden_path("abstraction_tree.json").read_text())
        assert {"nodes": got} == golden

    def test_bank_subtree_nests_runs_under_the_whole_chain(self, fixture_session):
        bank = fixture_session.tree.per_type("workflow:bank")
        assert {n.kind for n in bank} == {"caa", "seq"}
        runs = [n for n in bank if n.kind == "seq" and len(n.transitions) < 13]
        whole = next(n for n in bank if n.kind == "seq" and len(n.transitions) == 13)
        root = next(n for n in bank if n.kind == "caa")
        assert any(n.transitions == SEQ_RUN for n in runs)
        assert all(n.parent == whole.key for n in runs)
        assert whole.parent == root.key and root.parent is None

    def test_lifecycle_contributes_only_its_cla_root(self, fixture_session):
        lc = fixture_session.tree.per_type("workflow:lc:finalize account opening")
        assert len(lc) == 1 and lc[0].kind == "cla" and lc[0].parent is None

    def test_client_gets_its_root_and_the_whole_chain_node(self, fixture_session):
        client = fixture_session.tree.per_type("workflow:client")
        assert {n.kind for n in client} == {"caa", "seq"}
        root = next(n for n in client if n.kind == "caa")
        assert root.parent is None

    def test_single_activity_type_has_root_only(self):
        doc = {
            "objects": {"b1": {"type": "workflow:bank"}, "c1": {"type": "workflow:client"}},
            "events": [
                {"id": "e1", "activity": "x", "timestamp": "2024-01-01T00:00:00",
                 "relations": {"workflow:bank": ["b1"], "workflow:client": ["c1"]}},
                {"id": "e2", "activity": "y", "timestamp": "2024-01-01T00:00:01",
                 "relations": {"workflow:bank": ["b1"]}},
            ],
        }
        session = initialize(parse_log(json.dumps(doc).encode()), threshold=10**9, seed=0)
        client_nodes = session.tree.per_type("workflow:client")
        assert [n.kind for n in client_nodes] == ["caa"]
        bank_kinds = sorted(n.kind for n in session.tree.per_type("workflow:bank"))
        assert bank_kinds == ["caa", "seq"]


class TestInitialize:
    def test_huge_threshold_applies_nothing(self, fixture_log):
        bare = project_workflow(fixture_log)
        session = initialize(bare, threshold=10**9, seed=0)
        assert session.log.history == ()
        assert to_graph_payload(session.current_model()) == to_graph_payload(session.original_net)

    def test_fixture_at_default_threshold_keeps_shipped_history(self, fixture_session):
        assert fixture_session.log.history == ("uih13", "kl273")
        assert size(fixture_session.current_model()) == (27, 26)
        assert fixture_session.warnings == []

    def test_threshold_thirty_starts_with_lifecycle_cla(self, fixture_log):
        bare = project_workflow(fixture_log)
        session = initialize(bare, threshold=30, seed=0)
        assert len(session.log.history) >= 1
        first = session.log.objects[session.log.history[0]]
        assert first == "abstraction:workflow:lc:finalize account opening$cla"
        assert size(session.current_model())[0] <= 30

    def test_threshold_zero_exhausts_and_warns(self, fixture_log):
        bare = project_workflow(fixture_log)
        session = initialize(bare, threshold=0, seed=0)
        assert session.warnings, "tree exhaustion above the threshold must warn"
        # business artifacts are never auto-aggregated away
        assert "workflow:bank" in session.current_model().object_types()
        suffixes = {session.log.objects[oid].rsplit("$", 1)[1] for oid in session.log.history}
        assert "caa" not in suffixes

    def test_deterministic_under_seed(self, fixture_log):
        bare = project_workflow(fixture_log)
        a = initialize(bare, threshold=30, seed=5)
        b = initialize(bare, threshold=30, seed=5)
        assert a.log.history == b.log.history
        assert serialize_log(a.log) == serialize_log(b.log)
        assert to_graph_payload(a.current_model()) == to_graph_payload(b.current_model())

    def test_pluggable_goal(self, fixture_log):
        bare = project_workflow(fixture_log)
        # alternative goal: stop once at most two object types remain visible
        session = initialize(bare, seed=0, goal=lambda net: len(net.object_types()) <= 2)
        assert len(session.current_model().object_types()) == 2
        kinds = {session.log.objects[oid].rsplit("$", 1)[1] for oid in session.log.history}
        assert kinds == {"cla"}  # the lifecycle aggregation alone got there

    def test_corrupt_history_refused(self, fixture_log):
        doc = json.loads(serialize_log(fixture_log))
        doc["events"].append(
            {
                "id": "zzzzz",
                "activity": "ask for customer needs",
                "timestamp": "2023-05-19T09:00:00",
                "relations": {
                    "workflow:bank": ["151a3"],
                    "abstraction:workflow:lc:finalize account opening$cla": ["kl273"],
                },
            }
        )
        with pytest.raises(InadmissibleError):
            initialize(parse_log(json.dumps(doc).encode()), threshold=37, seed=0)


class TestAvailableRedoable:
    def test_initial_lists(self, fixture_session):
        available = fixture_session.available()
        assert {n.kind for n in available} == {"seq"}
        assert {frozenset(n.transitions) for n in available} == {
            SEQ_RUN,
            frozenset({"t:check if customer is client", "t:check client's credit status"}),
        }
        redo = fixture_session.redoable()
        assert [(rec.oid, rules) for rec, rules in redo] == [
            ("uih13", ("coarsest-applied",)),
            ("kl273", ("coarsest-applied", "last-applied")),
        ]

    def test_available_and_redoable_are_disjoint(self, fixture_session):
        session = fixture_session
        for _ in range(3):
            avail_keys = {n.key for n in session.available()}
            redo_oids = {rec.oid for rec, _ in session.redoable()}
            applied_keys = set(session.applied())
            assert not avail_keys & applied_keys
            assert redo_oids <= set(session.log.history)
            if not session.available():
                break
            session.apply(session.available()[0])

    def test_parents_become_available_as_children_apply(self, fixture_session):
        session = fixture_session
        root_key = session.tree.roots["workflow:bank"]
        whole_key = next(
            n.key for n in session.tree.per_type("workflow:bank")
            if n.kind == "seq" and len(n.transitions) == 13
        )
        assert {root_key, whole_key} & {n.key for n in session.available()} == set()
        for node in list(session.available()):  # the two fine-grained runs
            session.apply(node)
        assert [n.key for n in session.available()] == [whole_key]
        session.apply(session.available()[0])
        assert [n.key for n in session.available()] == [root_key]
        session.apply(session.available()[0])
        assert session.available() == []

    def test_redo_moves_record_back_to_available(self, fixture_session):
        session = fixture_session
        node = seq_node(session)
        record = session.apply(node)
        assert record.oid in {rec.oid for rec, _ in session.redoable()}
        assert node.key not in {n.key for n in session.available()}
        session.redo(record.oid)
        assert node.key in {n.key for n in session.available()}
        assert record.oid not in {rec.oid for rec, _ in session.redoable()}


class TestApplyRedo:
    def test_apply_then_redo_is_identity(self, fixture_session):
        session = fixture_session
        log_before = session.log
        model_before = to_graph_payload(session.current_model())
        record = session.apply(seq_node(session))
        assert size(session.current_model())[0] < size(session.original_net)[0]
        session.redo(record.oid)
        assert session.log == log_before
        assert to_graph_payload(session.current_model()) == model_before

    def test_apply_all_available_monotonically_shrinks(self, fixture_session):
        session = fixture_session
        last = size(session.current_model())[0]
        while session.available():
            session.apply(session.available()[0])
            cur = size(session.current_model())[0]
            assert cur <= last
            last = cur
        assert session.available() == []

    def test_stale_apply_rejected(self, fixture_session):
        session = fixture_session
        node = seq_node(session)
        session.apply(node)
        with pytest.raises(StaleRecordError):
            session.apply(node)

    def test_non_redoable_rejected(self, fixture_session):
        with pytest.raises(StaleRecordError):
            fixture_session.redo("zzzzz")

    def test_apply_targets_exactly_the_mapped_events(self, fixture_session):
        session = fixture_session
        record = session.apply(seq_node(session))
        carrying = {
            e.eid for e in session.log.events if record.oid in e.aomap.get(record.atype, ())
        }
        assert carrying == {"260f5", "0a1e4", "6629a", "1c0bf"}


class TestExport:
    def test_round_trip_reproduces_the_model(self, fixture_session):
        session = fixture_session
        session.apply(seq_node(session))
        exported = session.export()
        rebuilt = initialize(parse_log(exported), threshold=37, seed=1)
        assert to_graph_payload(rebuilt.current_model()) == to_graph_payload(session.current_model())
        assert rebuilt.log == session.log

    def test_untouched_session_exports_the_input(self, fixture_session, fixture_log):
        assert fixture_session.export() == serialize_log(fixture_log)

    def test_apply_adds_one_history_entry_to_the_export(self, fixture_session):
        before = json.loads(fixture_session.export())
        fixture_session.apply(seq_node(fixture_session))
        after = json.loads(fixture_session.export())
        hist_before = next(o for o in before["objects"].values() if o["type"] == "history")
        hist_after = next(o for o in after["objects"].values() if o["type"] == "history")
        assert len(hist_after["applied"]) == len(hist_before["applied"]) + 1
        abstraction_types = lambda doc: {
            o["type"] for o in doc["objects"].values() if o["type"].startswith("abstraction:")
        }
        assert abstraction_types(after) - abstraction_types(before) == {"abstraction:workflow:bank$seq"}
