"""The aggregation repository, SESE detection, admissibility, and model overlay.

Seven aggregations are supported: the complete aggregations ``cla`` (activity
lifecycle), ``csa`` (subprocess) and ``caa`` (business artifact, resource,
device), plus the control-flow aggregations ``seq``, ``xor``, ``and`` and
``loop`` over single-entry/single-exit fragments.

Every applied aggregation is transition-reconstructable: its abstraction type
plus the set of aggregated transitions suffice to reapply it, which is what
``overlay`` does while walking the log's abstraction history.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import InadmissibleError, InvariantError, UnfitError
from .nets import AcceptingOCPN, Region, Transition, clone, project_type, replay
from .ocel import (
    COMPLETE_SUFFIXES,
    FLOW_SUFFIXES,
    EventLog,
    TypeClass,
    abstraction_suffix,
    abstraction_target,
    classify,
    project_workflow,
)

GLYPHS = {"seq": "→", "xor": "×", "and": "∧", "loop": "↺"}

# which complete aggregation fits which workflow class
COMPLETE_FOR_CLASS = {
    TypeClass.LIFECYCLE: "cla",
    TypeClass.SUBPROCESS: "csa",
    TypeClass.BUSINESS: "caa",
    TypeClass.RESOURCE: "caa",
    TypeClass.DEVICE: "caa",
}


@dataclass(frozen=True, eq=True)
class AbstractionRecord:
    """One reconstructable aggregation: type, target workflow type, transitions.

    ``transitions`` are ids in the net the record is applied to; ``oid`` is the
    abstraction object id once the record has been applied (None before).
    """

    atype: str
    target_otype: str
    transitions: frozenset[str]
    oid: str | None = None

    @property
    def suffix(self) -> str:
        return abstraction_suffix(self.atype)


Applier = Callable[[AcceptingOCPN, AbstractionRecord], AcceptingOCPN]


def default_repository() -> dict[str, Applier]:
    """The seven-entry repository keyed by abstraction suffix."""
    repo: dict[str, Applier] = {}
    for suffix in COMPLETE_SUFFIXES:
        repo[suffix] = _apply_complete
    for suffix in FLOW_SUFFIXES:
        repo[suffix] = _apply_flow
    return repo


# --- structure info (shared by is_sese, fragments, tree building) -----------

def _expand_members(net: AcceptingOCPN, tids: frozenset[str]) -> frozenset[str] | None:
    """Map current transition ids to the original labeled ids they stand for."""
    out: set[str] = set()
    for tid in tids:
        t = net.transitions.get(tid)
        if t is None:
            return None
        if t.members:
            out.update(t.members)
        else:
            out.add(tid)
    return frozenset(out)


def _tree_info(tree) -> dict[str, Region]:
    """Region map (without place data) straight from a process tree."""
    info: dict[str, Region] = {}

    def walk(node) -> tuple[str, ...]:
        labeled: list[str] = []
        if node.op == "act":
            labeled.append(f"t:{node.label}")
        for child in node.children:
            labeled.extend(walk(child))
        info[node.node_id] = Region(
            op=node.op,
            entry="",
            exit="",
            places=(),
            taus=(),
            labeled=tuple(labeled),
            child_paths=tuple(c.node_id for c in node.children),
        )
        return tuple(labeled)

    walk(tree)
    return info


@dataclass(frozen=True)
class Fragment:
    """A located SESE occurrence: the node path plus how it was matched."""

    otype: str
    path: str
    kind: str
    detail: tuple  # ("node",) | ("run", i, j) | ("subset", included child paths)
    ordered: tuple[str, ...]  # original labeled tids in tree order


def _locate(regions: dict[str, Region], originals: frozenset[str], kind: str, otype: str) -> Fragment | None:
    if len(originals) < 2:
        return None
    for path in sorted(regions):
        region = regions[path]
        if region.op not in ("seq", "xor", "and", "loop"):
            continue
        if region.op == kind and set(region.labeled) == originals:
            return Fragment(otype=otype, path=path, kind=kind, detail=("node",), ordered=region.labeled)
        if kind == "seq" and region.op == "seq":
            children = [regions[c] for c in region.child_paths]
            hits = [i for i, c in enumerate(children) if set(c.labeled) & originals]
            if not hits:
                continue
            i, j = min(hits), max(hits)
            covered: list[str] = []
            for c in children[i:j + 1]:
                covered.extend(c.labeled)
            if set(covered) == originals and (i, j) != (0, len(children) - 1):
                return Fragment(otype=otype, path=path, kind=kind, detail=("run", i, j), ordered=tuple(covered))
        if kind == "xor" and region.op == "xor":
            included = []
            ordered: list[str] = []
            bad = False
            for cpath in region.child_paths:
                labeled = set(regions[cpath].labeled)
                if labeled and labeled <= originals:
                    included.append(cpath)
                    ordered.extend(regions[cpath].labeled)
                elif labeled & originals:
                    bad = True
                    break
            if not bad and len(included) >= 2 and set(ordered) == originals:
                return Fragment(otype=otype, path=path, kind=kind, detail=("subset", tuple(included)), ordered=tuple(ordered))
    return None


def _single_type_of(net: AcceptingOCPN, tids: frozenset[str]) -> str | None:
    """The unique object type adjacent to all given transitions, if any."""
    types: set[str] = set()
    for src, dst in net.arcs:
        if dst in tids and src in net.places:
            types.add(net.places[src].otype)
        elif src in tids and dst in net.places:
            types.add(net.places[dst].otype)
    if len(types) == 1:
        return next(iter(types))
    return None


def is_sese(net_or_tree, transitions: frozenset[str] | set[str], kind: str) -> bool:
    """True iff the transitions form a SESE control-flow structure of the kind.

    Matches a whole Seq/Xor/And/Loop node of the type's process tree, a
    contiguous run of a Seq node's children, or a subset of an Xor node's
    branches. Singleton sets are degenerate and rejected.
    """
    kind = kind.lower()
    if kind not in FLOW_SUFFIXES:
        raise InvariantError(f"unknown SESE kind {kind!r}")
    tids = frozenset(transitions)
    if isinstance(net_or_tree, AcceptingOCPN):
        net = net_or_tree
        originals = _expand_members(net, tids)
        if originals is None:
            return False
        otype = _single_type_of(net, tids)
        if otype is None or otype not in net.type_regions:
            return False
        return _locate(net.type_regions[otype], originals, kind, otype) is not None
    return _locate(_tree_info(net_or_tree), tids, kind, "") is not None


def interaction_transitions(net: AcceptingOCPN) -> set[str]:
    """Transitions adjacent to places of two or more object types."""
    types: dict[str, set[str]] = {}
    for src, dst in net.arcs:
        if src in net.places and dst in net.transitions:
            types.setdefault(dst, set()).add(net.places[src].otype)
        elif dst in net.places and src in net.transitions:
            types.setdefault(src, set()).add(net.places[dst].otype)
    return {tid for tid, ts in types.items() if len(ts) >= 2}


def flow_candidates(net: AcceptingOCPN) -> list[Fragment]:
    """Aggregation candidates per type, in two granularities.

    Every Seq/Xor/And/Loop tree node with at least two labeled transitions is
    a candidate, even when its members still interact with other types: such a
    node only becomes admissible once those types have been completely
    aggregated away, which is exactly the retrieval order of initialize.
    Under Seq nodes, maximal contiguous runs of children whose transitions are
    interaction-free from the start are added as finer-grained candidates.
    """
    interactions = interaction_transitions(net)
    out: list[Fragment] = []
    for otype in net.object_types():
        if classify(otype) is TypeClass.LIFECYCLE:
            continue  # one activity's lifecycle is only ever aggregated completely
        regions = net.type_regions.get(otype)
        if not regions:
            continue

        def visit(path: str) -> None:
            region = regions[path]
            if region.op in ("seq", "xor", "and", "loop") and len(region.labeled) >= 2:
                out.append(Fragment(otype=otype, path=path, kind=region.op, detail=("node",), ordered=region.labeled))
            if region.op == "seq":
                children = [regions[c] for c in region.child_paths]
                clean = [not (set(c.labeled) & interactions) for c in children]
                runs: list[tuple[int, int]] = []
                start = None
                for i, ok in enumerate(clean):
                    if ok and start is None:
                        start = i
                    if (not ok or i == len(children) - 1) and start is not None:
                        end = i if ok else i - 1
                        runs.append((start, end))
                        start = None
                for i, j in runs:
                    while i <= j and not children[i].labeled:
                        i += 1
                    while j >= i and not children[j].labeled:
                        j -= 1
                    if i >= j:
                        continue  # single children are covered by their own nodes
                    if (i, j) == (0, len(children) - 1):
                        continue  # the full node is already a candidate
                    covered: list[str] = []
                    for c in children[i:j + 1]:
                        covered.extend(c.labeled)
                    if len(covered) < 2:
                        continue
                    out.append(Fragment(otype=otype, path=path, kind="seq", detail=("run", i, j), ordered=tuple(covered)))
            for child in region.child_paths:
                visit(child)

        visit("0")
    # drop duplicates (nested single-child repeats, runs equal to a node)
    seen: set[tuple[str, frozenset[str]]] = set()
    unique = []
    for frag in out:
        key = (frag.otype, frag.kind, frozenset(frag.ordered))
        if key in seen:
            continue
        seen.add(key)
        unique.append(frag)
    return unique


def fragment_depth(frag: Fragment) -> int:
    depth = frag.path.count(".") + 1
    if frag.detail[0] != "node":
        depth += 1
    return depth


# --- admissibility ----------------------------------------------------------

def admissible(net: AcceptingOCPN, record: AbstractionRecord) -> bool:
    """Structural admissibility of a record on this net.

    Complete aggregations must cover exactly the labeled transitions of the
    target type's projection; control-flow aggregations must be a SESE
    structure of their kind made of non-interaction transitions. Order and
    soundness preservation follow from the replacement shape; the test suite
    asserts both on small nets.
    """
    suffix = record.suffix
    if classify(record.target_otype) not in COMPLETE_FOR_CLASS:
        return False
    if record.target_otype not in {p.otype for p in net.places.values()}:
        return False
    if not record.transitions or not record.transitions <= set(net.transitions):
        return False

    if suffix in COMPLETE_SUFFIXES:
        if COMPLETE_FOR_CLASS[classify(record.target_otype)] != suffix:
            return False
        projection = project_type(net, record.target_otype)
        return record.transitions == set(projection.labeled_transitions())

    if len(record.transitions) < 2:
        return False  # aggregating one transition is a rename, not an aggregation
    if any(net.transitions[tid].silent for tid in record.transitions):
        return False
    if _single_type_of(net, record.transitions) != record.target_otype:
        return False
    return is_sese(net, record.transitions, suffix)


# --- the appliers -----------------------------------------------------------

def _apply_complete(net: AcceptingOCPN, record: AbstractionRecord) -> AcceptingOCPN:
    target = record.target_otype
    dead_places = {pid for pid, p in net.places.items() if p.otype == target}
    adjacency: dict[str, set[str]] = {tid: set() for tid in net.transitions}
    for src, dst in net.arcs:
        if dst in adjacency and src in net.places:
            adjacency[dst].add(src)
        elif src in adjacency and dst in net.places:
            adjacency[src].add(dst)
    dead_transitions = {tid for tid, adj in adjacency.items() if adj and adj <= dead_places}
    touched = {tid for tid, adj in adjacency.items() if adj & dead_places and tid not in dead_transitions}

    transitions = {}
    for tid, t in net.transitions.items():
        if tid in dead_transitions:
            continue
        if tid in touched:
            t = Transition(
                tid=t.tid,
                label=t.label,
                refs=t.refs | {target},
                members=t.members,
                member_labels=t.member_labels,
            )
        transitions[tid] = t
    arcs = {
        (src, dst)
        for src, dst in net.arcs
        if src not in dead_places and dst not in dead_places and src not in dead_transitions and dst not in dead_transitions
    }
    return AcceptingOCPN(
        places={pid: p for pid, p in net.places.items() if pid not in dead_places},
        transitions=transitions,
        arcs=arcs,
        variable_arcs=net.variable_arcs & arcs,
        m_init={p: n for p, n in net.m_init.items() if p not in dead_places},
        m_final={p: n for p, n in net.m_final.items() if p not in dead_places},
        type_trees={k: v for k, v in net.type_trees.items() if k != target},
        type_regions={k: v for k, v in net.type_regions.items() if k != target},
    )


def _fragment_elements(net: AcceptingOCPN, frag: Fragment) -> tuple[set[str], set[str], str, str]:
    """Interior places and silent transitions of a located fragment, plus entry/exit."""
    regions = net.type_regions[frag.otype]
    region = regions[frag.path]
    if frag.detail[0] == "node":
        places = set(region.places)
        taus = set(region.taus)
        entry, exit_ = region.entry, region.exit
    elif frag.detail[0] == "run":
        _, i, j = frag.detail
        children = [regions[c] for c in region.child_paths]
        places = set()
        taus = set()
        for k in range(i, j + 1):
            places |= set(children[k].places)
            taus |= set(children[k].taus)
            if k < j:
                places.add(children[k].exit)  # shared boundary between run members
        entry, exit_ = children[i].entry, children[j].exit
    else:
        _, included = frag.detail
        places = set()
        taus = set()
        for cpath in included:
            places |= set(regions[cpath].places)
            taus |= set(regions[cpath].taus)
        entry, exit_ = region.entry, region.exit
    return places, taus, entry, exit_


def _composite_label(kind: str, member_labels: list[str]) -> str:
    glyph = GLYPHS[kind]
    if len(member_labels) == 2:
        return f"{glyph}(?{member_labels[0]}, ?{member_labels[1]})"
    return f"{glyph}(?{member_labels[0]}, ..., ?{member_labels[-1]})"


def _apply_flow(net: AcceptingOCPN, record: AbstractionRecord) -> AcceptingOCPN:
    originals = _expand_members(net, record.transitions)
    frag = _locate(net.type_regions[record.target_otype], originals, record.suffix, record.target_otype)
    if frag is None:
        raise InadmissibleError(f"no {record.suffix} SESE over {sorted(record.transitions)}")
    int_places, int_taus, entry, exit_ = _fragment_elements(net, frag)

    dead_places = {p for p in int_places if p in net.places}
    dead_transitions = set(record.transitions)
    dead_transitions |= {t for t in int_taus if t in net.transitions}

    member_labels = [tid[len("t:"):] for tid in frag.ordered]
    refs = frozenset()
    for tid in record.transitions:
        refs |= net.transitions[tid].refs
    agg_tid = f"agg:{record.oid}" if record.oid else f"agg:{record.suffix}:{min(record.transitions)}"
    aggregate = Transition(
        tid=agg_tid,
        label=_composite_label(record.suffix, member_labels),
        refs=refs,
        members=frag.ordered,
        member_labels=tuple(member_labels),
    )

    transitions = {tid: t for tid, t in net.transitions.items() if tid not in dead_transitions}
    transitions[agg_tid] = aggregate
    arcs = {
        (src, dst)
        for src, dst in net.arcs
        if src not in dead_places and dst not in dead_places and src not in dead_transitions and dst not in dead_transitions
    }
    arcs.add((entry, agg_tid))
    arcs.add((agg_tid, exit_))
    return AcceptingOCPN(
        places={pid: p for pid, p in net.places.items() if pid not in dead_places},
        transitions=transitions,
        arcs=arcs,
        variable_arcs=net.variable_arcs & arcs,
        m_init=dict(net.m_init),
        m_final=dict(net.m_final),
        type_trees=dict(net.type_trees),
        type_regions=net.type_regions,
    )


def apply_abstraction(net: AcceptingOCPN, record: AbstractionRecord, repo: dict[str, Applier]) -> AcceptingOCPN:
    """Apply one admissible aggregation; returns a new net, never mutates."""
    if record.suffix not in repo:
        raise InadmissibleError(f"no repository entry for suffix {record.suffix!r}")
    if not admissible(net, record):
        raise InadmissibleError(
            f"record {record.atype!r} over {sorted(record.transitions)} is not admissible"
        )
    return repo[record.suffix](clone(net), record)


# --- overlay ----------------------------------------------------------------

def overlay(log: EventLog, net: AcceptingOCPN, repo: dict[str, Applier]) -> AcceptingOCPN:
    """Reconstruct the abstracted model by replaying the abstraction history."""
    current, _, _ = overlay_trace(log, net, repo)
    return current


def overlay_trace(
    log: EventLog, net: AcceptingOCPN, repo: dict[str, Applier]
) -> tuple[AcceptingOCPN, dict[str, str], dict[str, str]]:
    """Overlay plus the original-to-current transition map and the event map.

    The event-to-transition map always targets the original net; records whose
    transitions were consumed by earlier aggregations are retargeted at the
    surviving aggregate through the running map.
    """
    wf = project_workflow(log)
    result = replay(wf, net)
    if not result.fits:
        raise UnfitError("log does not perfectly fit the net", result.diagnostics)
    uncovered = sorted(set(net.labeled_transitions()) - result.covered)
    if uncovered:
        raise UnfitError(
            "labeled transitions never fired during replay",
            [(tid, "not covered") for tid in uncovered],
        )
    current, tmap = walk_history(log, net, repo, result.et)
    return current, tmap, result.et


def reconstruct_record(log: EventLog, oid: str, et: dict[str, str], tmap: dict[str, str]) -> AbstractionRecord:
    """Rebuild the record for one applied abstraction object from the log."""
    atype = log.objects.get(oid)
    if atype is None:
        raise InvariantError(f"history references unknown object {oid!r}")
    related = [e for e in log.events if oid in e.aomap.get(atype, ())]
    if not related:
        raise InadmissibleError(f"abstraction object {oid!r} relates to no event")
    t_orig = {et[e.eid] for e in related}
    try:
        t_cur = frozenset(tmap[t] for t in t_orig)
    except KeyError as exc:
        raise InadmissibleError(f"abstraction object {oid!r} targets a vanished transition: {exc}") from exc
    return AbstractionRecord(atype=atype, target_otype=abstraction_target(atype), transitions=t_cur, oid=oid)


def walk_history(
    log: EventLog,
    net: AcceptingOCPN,
    repo: dict[str, Applier],
    et: dict[str, str],
    history: tuple[str, ...] | None = None,
    start: AcceptingOCPN | None = None,
    tmap: dict[str, str] | None = None,
) -> tuple[AcceptingOCPN, dict[str, str]]:
    """Apply the history's reconstructed records in order, keeping the id map.

    ``et`` must be the replay map of the workflow projection on the original
    net; ``start``/``tmap`` allow resuming from an already-overlaid state.
    """
    current = start if start is not None else clone(net)
    tmap = dict(tmap) if tmap is not None else {tid: tid for tid in net.labeled_transitions()}
    for oid in history if history is not None else log.history:
        record = reconstruct_record(log, oid, et, tmap)
        current = apply_abstraction(current, record, repo)
        if record.suffix in FLOW_SUFFIXES:
            agg_tid = f"agg:{oid}"
            for k, v in tmap.items():
                if v in record.transitions:
                    tmap[k] = agg_tid
        else:
            gone = [k for k, v in tmap.items() if v not in current.transitions]
            for k in gone:
                del tmap[k]
    return current, tmap
