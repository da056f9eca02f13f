"""Object-centric Petri nets: projection, token replay, soundness, export.

A net keeps, per workflow type, the process tree it was compiled from and a
map of tree-node regions (entry/exit place, interior elements). Abstractions
need those to locate SESE fragments after earlier rewrites.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

from .errors import BoundExceededError, InvariantError, UnknownEntityError
from .ocel import EventLog, display_name

REPLAY_TAU_STATES = 50_000


@dataclass(frozen=True, eq=True)
class Place:
    pid: str
    otype: str


@dataclass(frozen=True, eq=True)
class Transition:
    """A net transition; ``label is None`` means silent (tau).

    ``refs`` holds workflow types that were completely aggregated away but keep
    a label reference on this transition. Aggregate transitions additionally
    remember the original labeled transition ids and labels they replaced.
    """

    tid: str
    label: str | None = None
    refs: frozenset[str] = frozenset()
    members: tuple[str, ...] = ()
    member_labels: tuple[str, ...] = ()

    @property
    def silent(self) -> bool:
        return self.label is None


@dataclass(frozen=True)
class Region:
    """Compile-time SESE region of one process-tree node (ids in the compiled net)."""

    op: str
    entry: str
    exit: str
    places: tuple[str, ...]        # interior places, including descendants'
    taus: tuple[str, ...]          # interior silent transitions
    labeled: tuple[str, ...]       # labeled transition ids in tree order
    child_paths: tuple[str, ...]   # node paths of direct children


@dataclass
class AcceptingOCPN:
    places: dict[str, Place]
    transitions: dict[str, Transition]
    arcs: set[tuple[str, str]]
    variable_arcs: set[tuple[str, str]]
    m_init: dict[str, int]
    m_final: dict[str, int]
    type_trees: dict[str, "object"] = field(default_factory=dict)
    type_regions: dict[str, dict[str, Region]] = field(default_factory=dict)

    def object_types(self) -> list[str]:
        return sorted({p.otype for p in self.places.values()})

    def labeled_transitions(self) -> dict[str, Transition]:
        return {tid: t for tid, t in self.transitions.items() if not t.silent}

    def pre(self, node: str) -> set[str]:
        return {src for src, dst in self.arcs if dst == node}

    def post(self, node: str) -> set[str]:
        return {dst for src, dst in self.arcs if src == node}

    def transition_by_label(self, label: str) -> Transition | None:
        for t in self.transitions.values():
            if t.label == label:
                return t
        return None

    def validate(self) -> None:
        for src, dst in self.arcs:
            if not ((src in self.places and dst in self.transitions) or (src in self.transitions and dst in self.places)):
                raise InvariantError(f"arc ({src!r}, {dst!r}) does not join a place and a transition")
        if not self.variable_arcs <= self.arcs:
            raise InvariantError("variable arcs are not a subset of arcs")
        for marking in (self.m_init, self.m_final):
            for pid in marking:
                if pid not in self.places:
                    raise InvariantError(f"marking mentions unknown place {pid!r}")


@dataclass
class ReplayResult:
    fits: bool
    et: dict[str, str]
    covered: set[str]
    diagnostics: list[tuple[str, str]]


def size(net: AcceptingOCPN) -> tuple[int, int]:
    """(model elements, arcs); elements = |places| + |transitions|."""
    return (len(net.places) + len(net.transitions), len(net.arcs))


def project_type(net: AcceptingOCPN, otype: str) -> AcceptingOCPN:
    """Restrict to one type's places, the transitions adjacent to them, induced arcs."""
    places = {pid: p for pid, p in net.places.items() if p.otype == otype}
    if not places:
        raise UnknownEntityError(f"no places typed {otype!r}")
    keep_t = set()
    for src, dst in net.arcs:
        if src in places and dst in net.transitions:
            keep_t.add(dst)
        elif dst in places and src in net.transitions:
            keep_t.add(src)
    transitions = {tid: net.transitions[tid] for tid in keep_t}
    arcs = {
        (src, dst)
        for src, dst in net.arcs
        if (src in places and dst in transitions) or (src in transitions and dst in places)
    }
    return AcceptingOCPN(
        places=places,
        transitions=transitions,
        arcs=arcs,
        variable_arcs=net.variable_arcs & arcs,
        m_init={p: n for p, n in net.m_init.items() if p in places},
        m_final={p: n for p, n in net.m_final.items() if p in places},
        type_trees={otype: net.type_trees[otype]} if otype in net.type_trees else {},
        type_regions={otype: net.type_regions[otype]} if otype in net.type_regions else {},
    )


def _index(net: AcceptingOCPN) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    pre: dict[str, list[str]] = {tid: [] for tid in net.transitions}
    post: dict[str, list[str]] = {tid: [] for tid in net.transitions}
    for src, dst in net.arcs:
        if dst in net.transitions:
            pre[dst].append(src)
        else:
            post[src].append(dst)
    return pre, post


def _fire(marking: dict[str, int], pre: list[str], post: list[str]) -> dict[str, int] | None:
    for p in pre:
        if marking.get(p, 0) < 1:
            return None
    out = dict(marking)
    for p in pre:
        out[p] -= 1
        if out[p] == 0:
            del out[p]
    for p in post:
        out[p] = out.get(p, 0) + 1
    return out


class _TauMaps:
    """Per-subnet silent-firing machinery for replay.

    Silent transitions split into "free" ones, whose every input place has no
    other consumer and is unmarked in the final marking, and "choice" ones.
    Free silents commute with every other firing, so the closure saturates
    them eagerly in tid order and only branches on choice silents; this keeps
    wide parallel regions from exploding the search.
    """

    def __init__(self, net: AcceptingOCPN, pre: dict[str, list[str]], post: dict[str, list[str]]):
        self.pre = pre
        self.post = post
        consumers: dict[str, list[str]] = {}
        for tid in net.transitions:
            for p in pre[tid]:
                consumers.setdefault(p, []).append(tid)
        self.free: list[str] = []
        self.choice: list[str] = []
        for tid, t in sorted(net.transitions.items()):
            if not t.silent:
                continue
            dedicated = all(consumers.get(p, []) == [tid] and p not in net.m_final for p in pre[tid])
            (self.free if dedicated and pre[tid] else self.choice).append(tid)


def _tau_closure(
    marking: dict[str, int],
    target_pre: list[str],
    maps: _TauMaps,
    final: dict[str, int] | None = None,
) -> dict[str, int] | None:
    """Search over silent firings until the target is enabled.

    Enables ``target_pre`` when given, else looks for ``final`` exactly.
    Deterministic: free silents saturate in tid order, choice silents branch
    breadth-first; bounded by a visited-marking budget.
    """

    def reached(m: dict[str, int]) -> bool:
        if final is not None:
            return m == final
        return all(m.get(p, 0) >= 1 for p in target_pre)

    pre, post = maps.pre, maps.post

    def saturate(m: dict[str, int]) -> dict[str, int] | None:
        # returns the reached marking, or None with m mutated to the fixpoint
        guard = 0
        while True:
            if reached(m):
                return m
            fired = False
            for tid in maps.free:
                nxt = _fire(m, pre[tid], post[tid])
                if nxt is not None:
                    m.clear()
                    m.update(nxt)
                    fired = True
                    break
            guard += 1
            if not fired or guard > 100_000:
                return None

    start = dict(marking)
    hit = saturate(start)
    if hit is not None:
        return hit

    def explore(depth_first: bool) -> tuple[dict[str, int] | None, bool]:
        # breadth-first commits as few choice silents as possible, which keeps
        # later events playable; depth-first resolves independent choices one
        # by one and is the only tractable way to drain wide parallel regions.
        frontier = deque([start])
        seen = {tuple(sorted(start.items()))}
        exhausted = False
        while frontier:
            m = frontier.pop() if depth_first else frontier.popleft()
            for tid in maps.choice:
                nxt = _fire(m, pre[tid], post[tid])
                if nxt is None:
                    continue
                hit = saturate(nxt)
                if hit is not None:
                    return hit, False
                key = tuple(sorted(nxt.items()))
                if key in seen:
                    continue
                if len(seen) >= REPLAY_TAU_STATES:
                    exhausted = True
                    continue
                seen.add(key)
                frontier.append(nxt)
        return None, exhausted

    if final is not None:
        found, _ = explore(depth_first=True)
        return found
    found, exhausted = explore(depth_first=False)
    if found is None and exhausted:
        found, _ = explore(depth_first=True)
    return found


def replay(log: EventLog, net: AcceptingOCPN) -> ReplayResult:
    """Token replay of a workflow-projected log, object by object.

    Every object of a type replays its event sequence on that type's projected
    subnet from the subnet's initial to final marking; silent transitions are
    resolved by bounded lookahead. Misfits become diagnostics, never raises.
    """
    for e in log.events:
        if e.aomap:
            raise InvariantError(f"replay requires a workflow-projected log (event {e.eid!r} is augmented)")

    et: dict[str, str] = {}
    covered: set[str] = set()
    diagnostics: list[tuple[str, str]] = []

    by_type: dict[str, dict[str, list]] = {}
    for e in log.events:
        for otype, oids in e.wfomap.items():
            for oid in oids:
                by_type.setdefault(otype, {}).setdefault(oid, []).append(e)

    for otype in sorted(by_type):
        try:
            sub = project_type(net, otype)
        except UnknownEntityError:
            for oid in by_type[otype]:
                diagnostics.append((oid, f"no places typed {otype!r} in the net"))
            continue
        pre, post = _index(sub)
        maps = _TauMaps(sub, pre, post)
        by_label = {}
        for tid, t in sub.transitions.items():
            if not t.silent:
                by_label.setdefault(t.label, []).append(tid)
        for oid in sorted(by_type[otype]):
            marking = dict(sub.m_init)
            ok = True
            for e in by_type[otype][oid]:
                candidates = by_label.get(e.activity, [])
                if not candidates:
                    diagnostics.append((e.eid, f"no transition labeled {e.activity!r} in the {otype!r} subnet"))
                    ok = False
                    break
                fired = None
                for tid in sorted(candidates):
                    reached = _tau_closure(marking, pre[tid], maps)
                    if reached is not None:
                        marking = _fire(reached, pre[tid], post[tid])
                        fired = tid
                        break
                if fired is None:
                    diagnostics.append((e.eid, f"transition {candidates[0]!r} never enabled for object {oid!r}"))
                    ok = False
                    break
                prior = et.get(e.eid)
                if prior is not None and prior != fired:
                    diagnostics.append((e.eid, f"ambiguous mapping: {prior!r} vs {fired!r}"))
                    ok = False
                    break
                et[e.eid] = fired
                covered.add(fired)
            if ok:
                final = _tau_closure(marking, [], maps, final=dict(sub.m_final))
                if final is None:
                    diagnostics.append((oid, f"object of type {otype!r} does not reach the final marking"))

    fits = not diagnostics and len(et) == len(log.events)
    if not diagnostics and len(et) != len(log.events):
        for e in log.events:
            if e.eid not in et:
                diagnostics.append((e.eid, "event mapped to no transition"))
    return ReplayResult(fits=fits, et=et, covered=covered, diagnostics=diagnostics)


def check_soundness(net: AcceptingOCPN, bound: int = 10**6) -> bool:
    """Classical soundness of a single-type workflow net by explicit search.

    Option to complete, proper completion, no dead transitions. Raises
    BoundExceededError when the state space exceeds ``bound`` markings.
    """
    if len(net.object_types()) > 1:
        raise InvariantError("soundness check expects a single-type net")
    pre, post = _index(net)
    init = tuple(sorted(net.m_init.items()))
    final = tuple(sorted(net.m_final.items()))
    final_map = dict(net.m_final)

    seen: dict[tuple, list[tuple]] = {init: []}
    fired: set[str] = set()
    queue = deque([init])
    while queue:
        key = queue.popleft()
        marking = dict(key)
        for tid in net.transitions:
            nxt = _fire(marking, pre[tid], post[tid])
            if nxt is None:
                continue
            fired.add(tid)
            nkey = tuple(sorted(nxt.items()))
            if nkey not in seen:
                if len(seen) >= bound:
                    raise BoundExceededError(f"state space exceeds {bound} markings")
                seen[nkey] = []
                queue.append(nkey)
            seen[nkey].append(key)  # reverse edge

    if fired != set(net.transitions):
        return False  # dead transition
    # proper completion: no reachable marking strictly covers the final one
    for key in seen:
        m = dict(key)
        if all(m.get(p, 0) >= n for p, n in final_map.items()) and key != final:
            return False
    if final not in seen:
        return False
    # option to complete: every reachable marking reaches the final marking
    back = {final}
    queue = deque([final])
    while queue:
        key = queue.popleft()
        for prev in seen[key]:
            if prev not in back:
                back.add(prev)
                queue.append(prev)
    return len(back) == len(seen)


def to_dot(net: AcceptingOCPN) -> str:
    """Graphviz rendering: typed places, boxed transitions, filled taus."""
    palette = ["lightblue", "palegreen", "lightsalmon", "plum", "khaki", "lightcyan", "mistyrose", "wheat"]
    colors = {t: palette[i % len(palette)] for i, t in enumerate(net.object_types())}
    lines = ["digraph model {", "  rankdir=LR;", "  node [fontsize=10];"]
    for pid in sorted(net.places):
        p = net.places[pid]
        marks = []
        if pid in net.m_init:
            marks.append("●")
        if pid in net.m_final:
            marks.append("◎")
        label = "".join(marks)
        lines.append(
            f'  "{pid}" [shape=circle, label="{label}", xlabel="{p.otype}", style=filled, fillcolor={colors[p.otype]}];'
        )
    for tid in sorted(net.transitions):
        t = net.transitions[tid]
        if t.silent:
            lines.append(f'  "{tid}" [shape=box, label="", style=filled, fillcolor=black, width=0.15, height=0.4];')
        else:
            label = _escape(t.label)
            for ref in sorted(t.refs):
                label += f"\\n↔ {_escape(display_name(ref))}"
            lines.append(f'  "{tid}" [shape=box, label="{label}"];')
    for src, dst in sorted(net.arcs):
        style = ' [color="black:invis:black"]' if (src, dst) in net.variable_arcs else ""
        lines.append(f'  "{src}" -> "{dst}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def to_graph_payload(net: AcceptingOCPN) -> dict:
    """JSON graph for the web client: nodes, edges with variable flag, metrics."""
    nodes = []
    for pid in sorted(net.places):
        p = net.places[pid]
        nodes.append(
            {
                "id": pid,
                "kind": "place",
                "label": "",
                "otype": p.otype,
                "initial": pid in net.m_init,
                "final": pid in net.m_final,
            }
        )
    for tid in sorted(net.transitions):
        t = net.transitions[tid]
        nodes.append(
            {
                "id": tid,
                "kind": "silent" if t.silent else "transition",
                "label": t.label or "",
                "refs": sorted(display_name(r) for r in t.refs),
                "members": list(t.member_labels),
            }
        )
    edges = [
        {"src": src, "dst": dst, "variable": (src, dst) in net.variable_arcs}
        for src, dst in sorted(net.arcs)
    ]
    elements, arc_count = size(net)
    return {
        "nodes": nodes,
        "edges": edges,
        "metrics": {
            "elements": elements,
            "arcs": arc_count,
            "object_types": len(net.object_types()),
        },
    }


def clone(net: AcceptingOCPN) -> AcceptingOCPN:
    return AcceptingOCPN(
        places=dict(net.places),
        transitions=dict(net.transitions),
        arcs=set(net.arcs),
        variable_arcs=set(net.variable_arcs),
        m_init=dict(net.m_init),
        m_final=dict(net.m_final),
        type_trees=dict(net.type_trees),
        type_regions={k: dict(v) for k, v in net.type_regions.items()},
    )
