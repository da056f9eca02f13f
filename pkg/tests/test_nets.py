import json

import pytest

from granex.discovery import compile_tree, discover, mine_tree
from granex.errors import BoundExceededError, InvariantError, UnknownEntityError
from granex.nets import (
    AcceptingOCPN,
    Place,
    Transition,
    check_soundness,
    project_type,
    replay,
    size,
    to_dot,
    to_graph_payload,
)
from granex.ocel import parse_log, project_workflow

from oracles import net_language


def chain_net(labels, otype="workflow:x"):
    return compile_tree(mine_tree([tuple(labels)]), otype)


class TestProjectType:
    def test_fixture_bank_projection_keeps_all_labels(self, fixture_log):
        net = discover(fixture_log)
        bank = project_type(net, "workflow:bank")
        assert bank.object_types() == ["workflow:bank"]
        assert len(bank.labeled_transitions()) == 13
        assert sum(bank.m_init.values()) == 1 and sum(bank.m_final.values()) == 1

    def test_single_type_projection_is_identity(self):
        net = chain_net(["a", "b", "c"])
        projected = project_type(net, "workflow:x")
        assert projected.places == net.places
        assert projected.transitions == net.transitions
        assert projected.arcs == net.arcs

    def test_shared_transition_survives_both_projections(self, fixture_log):
        net = discover(fixture_log)
        bank = project_type(net, "workflow:bank")
        client = project_type(net, "workflow:client")
        both = set(bank.transitions) & set(client.transitions)
        assert both == {
            "t:ask for customer needs",
            "t:inform client",
            "t:check type of account to be created",
        }

    def test_unknown_type(self, fixture_log):
        with pytest.raises(UnknownEntityError):
            project_type(discover(fixture_log), "workflow:ghost")


class TestReplay:
    def test_fixture_fits(self, fixture_log):
        net = discover(fixture_log)
        result = replay(project_workflow(fixture_log), net)
        assert result.fits
        assert result.diagnostics == []
        assert result.et["260f5"] == "t:click open account"
        assert len(result.et) == 13
        assert result.covered == set(net.labeled_transitions())

    def test_empty_log_empty_net(self):
        empty_net = AcceptingOCPN(
            places={}, transitions={}, arcs=set(), variable_arcs=set(), m_init={}, m_final={}
        )
        empty_log = parse_log(b'{"objects": {}, "events": []}')
        result = replay(empty_log, empty_net)
        assert result.fits and result.covered == set()

    def test_unknown_activity_is_diagnosed(self, fixture_log):
        net = discover(fixture_log)
        doc = json.loads(open("src/granex/data/account_opening.json", "rb").read())
        doc["events"].append(
            {
                "id": "zzzzz",
                "activity": "sneak in",
                "timestamp": "2023-05-19T12:00:00",
                "relations": {"workflow:bank": ["151a3"]},
            }
        )
        mutated = project_workflow(parse_log(json.dumps(doc).encode()))
        result = replay(mutated, net)
        assert not result.fits
        assert any(entity == "zzzzz" for entity, _ in result.diagnostics)

    def test_requires_projection(self, fixture_log):
        with pytest.raises(InvariantError):
            replay(fixture_log, discover(fixture_log))

    def test_deterministic(self, fixture_log):
        net = discover(fixture_log)
        wf = project_workflow(fixture_log)
        assert replay(wf, net).et == replay(wf, net).et


class TestSoundness:
    def test_sequence_is_sound(self):
        assert check_soundness(chain_net(["a", "b", "c"]))

    def test_dead_transition_detected(self):
        net = chain_net(["a", "b"])
        dead = "t:never"
        net.transitions[dead] = Transition(tid=dead, label="never")
        net.places["p:extra"] = Place(pid="p:extra", otype="workflow:x")
        net.arcs.add(("p:extra", dead))
        net.arcs.add((dead, "p:workflow:x:snk"))
        assert not check_soundness(net)

    def test_no_option_to_complete_detected(self):
        net = chain_net(["a", "b"])
        # trap: firing "t:escape" strands the token
        net.places["p:trap"] = Place(pid="p:trap", otype="workflow:x")
        net.transitions["t:escape"] = Transition(tid="t:escape", label="escape")
        net.arcs.add((next(iter(net.m_init)), "t:escape"))
        net.arcs.add(("t:escape", "p:trap"))
        assert not check_soundness(net)

    def test_fixture_projections_are_sound(self, fixture_log):
        net = discover(fixture_log)
        for otype in net.object_types():
            assert check_soundness(project_type(net, otype)), otype

    def test_bound_is_reported(self):
        tree = mine_tree([tuple("abcdef"), tuple("fedcba")])
        net = compile_tree(tree, "workflow:x")
        with pytest.raises(BoundExceededError):
            check_soundness(net, bound=3)

    def test_multi_type_net_rejected(self, fixture_log):
        with pytest.raises(InvariantError):
            check_soundness(discover(fixture_log))


class TestSizeAndExport:
    def test_empty_net(self):
        net = AcceptingOCPN(places={}, transitions={}, arcs=set(), variable_arcs=set(), m_init={}, m_final={})
        assert size(net) == (0, 0)

    def test_fixture_size(self, fixture_log):
        assert size(discover(fixture_log)) == (36, 40)

    def test_dot_lists_every_node(self, fixture_log):
        net = discover(fixture_log)
        dot = to_dot(net)
        for pid in net.places:
            assert f'"{pid}"' in dot
        for tid in net.transitions:
            assert f'"{tid}"' in dot
        assert dot.startswith("digraph")

    def test_dot_marks_variable_arcs(self):
        doc = {
            "objects": {"b1": {"type": "workflow:bank"}, "b2": {"type": "workflow:bank"}},
            "events": [
                {"id": "e1", "activity": "a", "timestamp": "2024-01-01T00:00:00",
                 "relations": {"workflow:bank": ["b1", "b2"]}},
            ],
        }
        net = discover(parse_log(json.dumps(doc).encode()))
        assert "black:invis:black" in to_dot(net)

    def test_payload_metrics_match_size(self, fixture_log):
        net = discover(fixture_log)
        payload = to_graph_payload(net)
        elements, arcs = size(net)
        assert payload["metrics"] == {"elements": elements, "arcs": arcs, "object_types": 3}
        assert len(payload["nodes"]) == elements
        assert len(payload["edges"]) == arcs

    def test_compiled_net_language_sanity(self):
        net = chain_net(["a", "b"])
        assert net_language(net, max_len=3) == {("a", "b")}
