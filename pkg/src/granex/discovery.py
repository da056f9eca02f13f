"""Per-type process discovery and the merge into one object-centric net.

Mining is the basic inductive scheme without noise filtering: recursive cut
detection on the directly-follows graph in the order exclusive-choice,
sequence, parallel, loop; the fall-through is a flower loop over the alphabet.
Every input trace is therefore in the mined tree's language.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import InvariantError, UnfitError
from .nets import AcceptingOCPN, Region, Transition, Place, replay
from .ocel import EventLog, project_workflow

log_ = logging.getLogger(__name__)

Trace = tuple[str, ...]


@dataclass(frozen=True, eq=True)
class ProcessTree:
    """Node ops: 'act' (label set), 'tau', and 'seq'/'xor'/'and'/'loop'."""

    op: str
    label: str | None = None
    children: tuple["ProcessTree", ...] = ()
    node_id: str = ""

    def leaves(self) -> list["ProcessTree"]:
        if self.op in ("act", "tau"):
            return [self]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def labels(self) -> list[str]:
        return [leaf.label for leaf in self.leaves() if leaf.op == "act"]


def _act(label: str) -> ProcessTree:
    return ProcessTree(op="act", label=label)


def _tau() -> ProcessTree:
    return ProcessTree(op="tau")


def _node(op: str, children: list[ProcessTree]) -> ProcessTree:
    if op == "loop" and len(children) < 2:
        raise InvariantError("loop nodes need a do part and at least one redo part")
    if not children:
        raise InvariantError(f"{op} node needs at least one child")
    return ProcessTree(op=op, children=tuple(children))


def _with_ids(tree: ProcessTree, path: str = "0") -> ProcessTree:
    children = tuple(_with_ids(c, f"{path}.{i}") for i, c in enumerate(tree.children))
    return ProcessTree(op=tree.op, label=tree.label, children=children, node_id=path)


def extract_traces(log: EventLog, otype: str) -> list[Trace]:
    """One activity sequence per object of the type, in log order."""
    if otype not in set(log.objects.values()):
        raise InvariantError(f"object type {otype!r} not present in the log")
    per_object: dict[str, list[str]] = {oid: [] for oid, t in log.objects.items() if t == otype}
    for e in log.events:
        for oid in e.wfomap.get(otype, ()):
            per_object[oid].append(e.activity)
    traces = []
    for oid in sorted(per_object):
        if not per_object[oid]:
            log_.warning("object %s of type %s has no events; excluded from discovery", oid, otype)
            continue
        traces.append(tuple(per_object[oid]))
    return traces


# --- inductive mining -------------------------------------------------------

def _dfg(traces: list[Trace]) -> tuple[set[tuple[str, str]], set[str], set[str], list[str]]:
    edges = set()
    starts = set()
    ends = set()
    alphabet = sorted({a for t in traces for a in t})
    for t in traces:
        starts.add(t[0])
        ends.add(t[-1])
        for a, b in zip(t, t[1:]):
            edges.add((a, b))
    return edges, starts, ends, alphabet


def _components(nodes: list[str], edges: set[tuple[str, str]]) -> list[set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen: set[str] = set()
    comps = []
    for n in nodes:
        if n in seen:
            continue
        comp = {n}
        stack = [n]
        seen.add(n)
        while stack:
            cur = stack.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    comp.add(nxt)
                    stack.append(nxt)
        comps.append(comp)
    return comps


def _sccs(nodes: list[str], edges: set[tuple[str, str]]) -> list[set[str]]:
    # iterative Kosaraju
    fwd: dict[str, list[str]] = {n: [] for n in nodes}
    rev: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        if a in fwd and b in fwd:
            fwd[a].append(b)
            rev[b].append(a)
    order: list[str] = []
    seen: set[str] = set()
    for n in nodes:
        if n in seen:
            continue
        stack = [(n, iter(fwd[n]))]
        seen.add(n)
        while stack:
            cur, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(fwd[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(cur)
                stack.pop()
    seen = set()
    comps = []
    for n in reversed(order):
        if n in seen:
            continue
        comp = set()
        stack = [n]
        seen.add(n)
        while stack:
            cur = stack.pop()
            comp.add(cur)
            for nxt in rev[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(comp)
    return comps


def _sequence_cut(alphabet: list[str], edges: set[tuple[str, str]]) -> list[set[str]] | None:
    groups = _sccs(alphabet, edges)
    idx = {a: i for i, g in enumerate(groups) for a in g}
    n = len(groups)
    reach = [set() for _ in range(n)]
    for a, b in edges:
        if idx[a] != idx[b]:
            reach[idx[a]].add(idx[b])
    # transitive closure
    changed = True
    while changed:
        changed = False
        for i in range(n):
            extra = set()
            for j in reach[i]:
                extra |= reach[j]
            if not extra <= reach[i]:
                reach[i] |= extra
                changed = True

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def _group_reaches(ri: int, rj: int) -> bool:
        for g in range(n):
            if find(g) != ri:
                continue
            for h in reach[g]:
                if find(h) == rj:
                    return True
        return False

    # merge pairwise-unreachable groups until stable
    changed = True
    while changed:
        changed = False
        roots = sorted({find(i) for i in range(n)})
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                a, b = find(roots[i]), find(roots[j])
                if a == b:
                    continue
                if not _group_reaches(a, b) and not _group_reaches(b, a):
                    parent[b] = a
                    changed = True

    roots = sorted({find(i) for i in range(n)})
    if len(roots) < 2:
        return None
    # total order: root A before B iff A reaches B
    ordered = sorted(roots, key=lambda r: -sum(1 for s in roots if s != r and _group_reaches(r, s)))
    # sanity: consecutive roots must be ordered one way
    for i in range(len(ordered) - 1):
        if not _group_reaches(ordered[i], ordered[i + 1]):
            return None
    out = []
    for r in ordered:
        part = {a for a in alphabet if find(idx[a]) == r}
        out.append(part)
    return out


def _xor_cut(alphabet: list[str], edges: set[tuple[str, str]]) -> list[set[str]] | None:
    comps = _components(alphabet, edges)
    if len(comps) < 2:
        return None
    return sorted(comps, key=lambda c: sorted(c)[0])


def _parallel_cut(
    alphabet: list[str], edges: set[tuple[str, str]], starts: set[str], ends: set[str]
) -> list[set[str]] | None:
    if len(alphabet) < 2:
        return None
    # connect activities that are NOT mutually directly-following
    anti = set()
    for i, a in enumerate(alphabet):
        for b in alphabet[i + 1:]:
            if not ((a, b) in edges and (b, a) in edges):
                anti.add((a, b))
    comps = _components(alphabet, anti)
    if len(comps) < 2:
        return None
    comps = sorted(comps, key=lambda c: sorted(c)[0])
    valid = [c for c in comps if c & starts and c & ends]
    invalid = [c for c in comps if not (c & starts and c & ends)]
    if not valid or (len(valid) < 2 and invalid == []):
        return None
    for c in invalid:
        valid[0] |= c
    if len(valid) < 2:
        return None
    return valid


def _loop_cut(
    alphabet: list[str], edges: set[tuple[str, str]], starts: set[str], ends: set[str]
) -> list[set[str]] | None:
    boundary = starts | ends
    rest = [a for a in alphabet if a not in boundary]
    if not rest:
        return None
    comps = _components(rest, {(a, b) for a, b in edges if a in rest and b in rest})
    body = set(boundary)
    redos = []
    for comp in sorted(comps, key=lambda c: sorted(c)[0]):
        ok = True
        for a, b in edges:
            if b in comp and a not in comp and a not in ends:
                ok = False
            if a in comp and b not in comp and b not in starts:
                ok = False
        has_entry = any(a in ends and b in comp for a, b in edges)
        has_exit = any(a in comp and b in starts for a, b in edges)
        if ok and has_entry and has_exit:
            redos.append(comp)
        else:
            body |= comp
    if not redos:
        return None
    # redo must never be entered from a pure start or exited into a pure end
    for a, b in edges:
        for comp in redos:
            if a in comp and b in body and b not in starts:
                return None
            if b in comp and a in body and a not in ends:
                return None
    return [body] + redos


def _split_xor(traces: list[Trace], parts: list[set[str]]) -> list[list[Trace]]:
    out: list[list[Trace]] = [[] for _ in parts]
    for t in traces:
        for i, part in enumerate(parts):
            if t[0] in part:
                out[i].append(t)
                break
    return out


def _split_seq(traces: list[Trace], parts: list[set[str]]) -> list[list[Trace]]:
    out: list[list[Trace]] = [[] for _ in parts]
    for t in traces:
        pos = 0
        for i, part in enumerate(parts):
            seg = []
            while pos < len(t) and t[pos] in part:
                seg.append(t[pos])
                pos += 1
            out[i].append(tuple(seg))
    return out


def _split_parallel(traces: list[Trace], parts: list[set[str]]) -> list[list[Trace]]:
    return [[tuple(a for a in t if a in part) for t in traces] for part in parts]


def _split_loop(traces: list[Trace], parts: list[set[str]]) -> list[list[Trace]]:
    body = parts[0]
    out: list[list[Trace]] = [[] for _ in parts]
    membership = {}
    for i, part in enumerate(parts):
        for a in part:
            membership[a] = i
    for t in traces:
        runs: list[tuple[int, list[str]]] = []
        for a in t:
            part = membership[a]
            if runs and runs[-1][0] == part:
                runs[-1][1].append(a)
            else:
                runs.append((part, [a]))
        for j, (part, seg) in enumerate(runs):
            out[part].append(tuple(seg))
            if part != 0 and (j + 1 >= len(runs) or runs[j + 1][0] != 0):
                out[0].append(())  # implicit empty body execution
        if runs and runs[0][0] != 0:
            out[0].append(())
    return out


def _im(traces: list[Trace]) -> ProcessTree:
    nonempty = [t for t in traces if t]
    if not nonempty:
        return _tau()
    if len(nonempty) < len(traces):
        return _node("xor", [_tau(), _im(nonempty)])
    traces = nonempty
    edges, starts, ends, alphabet = _dfg(traces)
    if len(alphabet) == 1 and all(len(t) == 1 for t in traces):
        return _act(alphabet[0])

    parts = _xor_cut(alphabet, edges)
    if parts:
        return _node("xor", [_im(sub) for sub in _split_xor(traces, parts)])
    parts = _sequence_cut(alphabet, edges)
    if parts:
        return _node("seq", [_im(sub) for sub in _split_seq(traces, parts)])
    parts = _parallel_cut(alphabet, edges, starts, ends)
    if parts:
        return _node("and", [_im(sub) for sub in _split_parallel(traces, parts)])
    parts = _loop_cut(alphabet, edges, starts, ends)
    if parts:
        return _node("loop", [_im(sub) for sub in _split_loop(traces, parts)])
    # flower fall-through
    return _node("loop", [_tau()] + [_act(a) for a in alphabet])


def mine_tree(traces: list[Trace]) -> ProcessTree:
    """Basic inductive mining; every input trace fits the resulting tree."""
    if not traces:
        raise InvariantError("mining requires at least one trace")
    return _with_ids(_im(list(traces)))


# --- compilation ------------------------------------------------------------

class _NetBuilder:
    def __init__(self, otype: str):
        self.otype = otype
        self.places: dict[str, Place] = {}
        self.transitions: dict[str, Transition] = {}
        self.arcs: set[tuple[str, str]] = set()
        self.regions: dict[str, Region] = {}
        self._place_n = 0
        self._tau_n = 0

    def place(self, name: str | None = None) -> str:
        pid = name or f"p:{self.otype}:{self._place_n}"
        if name is None:
            self._place_n += 1
        self.places[pid] = Place(pid=pid, otype=self.otype)
        return pid

    def tau(self) -> str:
        tid = f"tau:{self.otype}:{self._tau_n}"
        self._tau_n += 1
        self.transitions[tid] = Transition(tid=tid, label=None)
        return tid

    def labeled(self, label: str) -> str:
        tid = f"t:{label}"
        self.transitions[tid] = Transition(tid=tid, label=label)
        return tid

    def arc(self, src: str, dst: str) -> None:
        self.arcs.add((src, dst))


def _compile(node: ProcessTree, b: _NetBuilder, p_in: str, p_out: str) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Wire ``node`` between two places; returns (interior places, taus, labeled tids)."""
    if node.op == "act":
        tid = b.labeled(node.label)
        b.arc(p_in, tid)
        b.arc(tid, p_out)
        region = ((), (), (tid,))
    elif node.op == "tau":
        tid = b.tau()
        b.arc(p_in, tid)
        b.arc(tid, p_out)
        region = ((), (tid,), ())
    elif node.op == "seq":
        mids = [b.place() for _ in node.children[:-1]]
        bounds = [p_in] + mids + [p_out]
        places: list[str] = list(mids)
        taus: list[str] = []
        labeled: list[str] = []
        for i, child in enumerate(node.children):
            ps, ts, ls = _compile(child, b, bounds[i], bounds[i + 1])
            places.extend(ps)
            taus.extend(ts)
            labeled.extend(ls)
        region = (tuple(places), tuple(taus), tuple(labeled))
    elif node.op == "xor":
        places, taus, labeled = [], [], []
        for child in node.children:
            ps, ts, ls = _compile(child, b, p_in, p_out)
            places.extend(ps)
            taus.extend(ts)
            labeled.extend(ls)
        region = (tuple(places), tuple(taus), tuple(labeled))
    elif node.op == "and":
        split = b.tau()
        join = b.tau()
        b.arc(p_in, split)
        b.arc(join, p_out)
        places, taus, labeled = [], [split, join], []
        for child in node.children:
            cin = b.place()
            cout = b.place()
            b.arc(split, cin)
            b.arc(cout, join)
            places.extend([cin, cout])
            ps, ts, ls = _compile(child, b, cin, cout)
            places.extend(ps)
            taus.extend(ts)
            labeled.extend(ls)
        region = (tuple(places), tuple(taus), tuple(labeled))
    elif node.op == "loop":
        enter = b.tau()
        exit_ = b.tau()
        q_in = b.place()
        q_out = b.place()
        b.arc(p_in, enter)
        b.arc(enter, q_in)
        b.arc(q_out, exit_)
        b.arc(exit_, p_out)
        places, taus, labeled = [q_in, q_out], [enter, exit_], []
        ps, ts, ls = _compile(node.children[0], b, q_in, q_out)
        places.extend(ps)
        taus.extend(ts)
        labeled.extend(ls)
        for child in node.children[1:]:
            ps, ts, ls = _compile(child, b, q_out, q_in)
            places.extend(ps)
            taus.extend(ts)
            labeled.extend(ls)
        region = (tuple(places), tuple(taus), tuple(labeled))
    else:
        raise InvariantError(f"unknown tree op {node.op!r}")

    b.regions[node.node_id] = Region(
        op=node.op,
        entry=p_in,
        exit=p_out,
        places=region[0],
        taus=region[1],
        labeled=region[2],
        child_paths=tuple(c.node_id for c in node.children),
    )
    return region


def compile_tree(tree: ProcessTree, otype: str) -> AcceptingOCPN:
    """Standard compositional tree-to-net translation with stable ids.

    Sequences share places; silent routing transitions only appear at
    parallel and loop boundaries, so ids are deterministic per (otype, tree).
    """
    b = _NetBuilder(otype)
    src = b.place(f"p:{otype}:src")
    snk = b.place(f"p:{otype}:snk")
    _compile(tree, b, src, snk)
    net = AcceptingOCPN(
        places=b.places,
        transitions=b.transitions,
        arcs=b.arcs,
        variable_arcs=set(),
        m_init={src: 1},
        m_final={snk: 1},
        type_trees={otype: tree},
        type_regions={otype: b.regions},
    )
    net.validate()
    return net


@dataclass
class TypedModel:
    otype: str
    tree: ProcessTree
    net: AcceptingOCPN


def typed_models(log: EventLog) -> list[TypedModel]:
    """Mine and compile one workflow net per workflow type present in the log."""
    wf = project_workflow(log)
    models = []
    for otype in wf.workflow_types():
        traces = extract_traces(wf, otype)
        if not traces:
            log_.warning("object type %s has no traces; skipped", otype)
            continue
        tree = mine_tree(traces)
        models.append(TypedModel(otype=otype, tree=tree, net=compile_tree(tree, otype)))
    return models


def merge_models(models: list[TypedModel], log: EventLog) -> AcceptingOCPN:
    """Fuse typed nets on equal activity labels into interaction transitions."""
    places: dict[str, Place] = {}
    transitions: dict[str, Transition] = {}
    arcs: set[tuple[str, str]] = set()
    type_trees = {}
    type_regions = {}
    m_init: dict[str, int] = {}
    m_final: dict[str, int] = {}
    for m in models:
        places.update(m.net.places)
        transitions.update(m.net.transitions)  # labeled tids coincide across types
        arcs |= m.net.arcs
        m_init.update(m.net.m_init)
        m_final.update(m.net.m_final)
        type_trees[m.otype] = m.tree
        type_regions[m.otype] = dict(m.net.type_regions[m.otype])

    variable: set[tuple[str, str]] = set()
    multi: set[tuple[str, str]] = set()  # (otype, activity) with >=2 objects in one event
    for e in log.events:
        for otype, oids in e.wfomap.items():
            if len(oids) >= 2:
                multi.add((otype, e.activity))
    for otype, activity in multi:
        tid = f"t:{activity}"
        if tid not in transitions:
            continue
        for src, dst in arcs:
            if dst == tid and src in places and places[src].otype == otype:
                variable.add((src, dst))
            if src == tid and dst in places and places[dst].otype == otype:
                variable.add((src, dst))

    net = AcceptingOCPN(
        places=places,
        transitions=transitions,
        arcs=arcs,
        variable_arcs=variable,
        m_init=m_init,
        m_final=m_final,
        type_trees=type_trees,
        type_regions=type_regions,
    )
    net.validate()
    return net


def discover(log: EventLog) -> AcceptingOCPN:
    """Full pipeline: project, mine per type, merge, then verify the merge.

    The projected log must replay perfectly on the merged net and cover every
    labeled transition; otherwise an UnfitError with diagnostics is raised.
    """
    if not log.events:
        raise InvariantError("discovery requires a non-empty log")
    wf = project_workflow(log)
    models = typed_models(wf)
    if not models:
        raise InvariantError("no workflow object type has any trace")
    net = merge_models(models, wf)
    result = replay(wf, net)
    if not result.fits:
        raise UnfitError("discovered net does not perfectly fit the log", result.diagnostics)
    uncovered = sorted(set(net.labeled_transitions()) - result.covered)
    if uncovered:
        raise UnfitError(
            "labeled transitions never fired during replay",
            [(tid, "not covered") for tid in uncovered],
        )
    return net
