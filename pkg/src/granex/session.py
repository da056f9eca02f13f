"""The interactive engine: abstraction tree, initialize, apply, redo, export.

A session owns the originally discovered net and the evolving augmented log.
The log's abstraction history is the single source of truth: the current model
is always the overlay of the history onto the original net, so rebuilding a
session from an exported log reproduces the model exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from random import Random
from typing import Callable

from .abstraction import (
    COMPLETE_FOR_CLASS,
    AbstractionRecord,
    Applier,
    admissible,
    default_repository,
    flow_candidates,
    fragment_depth,
    walk_history,
)
from .discovery import TypedModel, merge_models, typed_models
from .errors import GranexError, InvariantError, StaleRecordError, UnfitError
from .nets import AcceptingOCPN, project_type, replay, size
from .ocel import (
    EventLog,
    TypeClass,
    classify,
    generate_id,
    make_abstraction_type,
    project_workflow,
    serialize_log,
    st_abs,
    st_abs_inverse,
)

log_ = logging.getLogger(__name__)

DEFAULT_SIZE_THRESHOLD = 37

CLASS_NAMES = {
    "cla": "Complete lifecycle aggregation",
    "csa": "Complete subprocess aggregation",
    "caa": "Complete artifact aggregation",
    "seq": "Sequence control-flow structure",
    "xor": "XOR control-flow structure",
    "and": "AND control-flow structure",
    "loop": "LOOP control-flow structure",
}


@dataclass(frozen=True)
class TreeNode:
    """One admissible aggregation of the per-type hierarchy."""

    key: str
    otype: str
    kind: str                     # abstraction suffix
    transitions: frozenset[str]   # labeled transition ids of the original net
    ordered: tuple[str, ...]      # tree order, drives composite labels
    depth: int
    parent: str | None
    children: tuple[str, ...]

    def record(self, oid: str | None = None) -> AbstractionRecord:
        return AbstractionRecord(
            atype=make_abstraction_type(self.otype, self.kind),
            target_otype=self.otype,
            transitions=self.transitions,
            oid=oid,
        )

    def member_labels(self) -> list[str]:
        return [tid[len("t:"):] for tid in self.ordered]


@dataclass
class AbstractionTree:
    nodes: dict[str, TreeNode]
    roots: dict[str, str]  # otype -> root node key

    def per_type(self, otype: str) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.otype == otype]


def _node_key(otype: str, kind: str, transitions: frozenset[str]) -> str:
    return f"{otype}|{kind}|" + "+".join(sorted(transitions))


def build_tree(net: AcceptingOCPN, models: list[TypedModel]) -> AbstractionTree:
    """Per type: a complete-aggregation root over the control-flow candidates,
    nested by transition-set containment."""
    nodes: dict[str, TreeNode] = {}
    roots: dict[str, str] = {}
    frags_by_type: dict[str, list] = {}
    for frag in flow_candidates(net):
        frags_by_type.setdefault(frag.otype, []).append(frag)

    for model in models:
        otype = model.otype
        suffix = COMPLETE_FOR_CLASS[classify(otype)]
        projection = project_type(net, otype)
        root_tids = frozenset(projection.labeled_transitions())
        root_key = _node_key(otype, suffix, root_tids)
        frags = sorted(
            frags_by_type.get(otype, []),
            key=lambda f: (len(f.ordered), sorted(f.ordered)),
        )
        entries = []  # (key, frag, transitions)
        for frag in frags:
            tids = frozenset(frag.ordered)
            entries.append((_node_key(otype, frag.kind, tids), frag, tids))

        children_map: dict[str, list[str]] = {root_key: []}
        parents: dict[str, str] = {}
        for key, frag, tids in entries:
            parent = root_key
            best: frozenset[str] | None = None
            for okey, ofrag, otids in entries:
                if okey == key:
                    continue
                if tids < otids and (best is None or otids < best):
                    parent = okey
                    best = otids
            parents[key] = parent
            children_map.setdefault(key, [])
            children_map.setdefault(parent, []).append(key)

        for key, frag, tids in entries:
            nodes[key] = TreeNode(
                key=key,
                otype=otype,
                kind=frag.kind,
                transitions=tids,
                ordered=frag.ordered,
                depth=fragment_depth(frag),
                parent=parents[key],
                children=tuple(sorted(children_map[key])),
            )
        ordered_root = tuple(
            tid for tid in _ordered_labeled(model) if tid in root_tids
        )
        nodes[root_key] = TreeNode(
            key=root_key,
            otype=otype,
            kind=suffix,
            transitions=root_tids,
            ordered=ordered_root,
            depth=0,
            parent=None,
            children=tuple(sorted(children_map[root_key])),
        )
        roots[otype] = root_key
    return AbstractionTree(nodes=nodes, roots=roots)


def _ordered_labeled(model: TypedModel) -> tuple[str, ...]:
    return tuple(f"t:{label}" for label in model.tree.labels())


Goal = Callable[[AcceptingOCPN], bool]


@dataclass
class Session:
    """One analyst's exploration over a fixed original net and evolving log.

    ``goal`` decides when initialize may stop aggregating; the shipped default
    is the size threshold, but any predicate over the current model works.
    """

    original_net: AcceptingOCPN
    log: EventLog
    tree: AbstractionTree
    repo: dict[str, Applier]
    models: list[TypedModel]
    et: dict[str, str]
    size_threshold: int = DEFAULT_SIZE_THRESHOLD
    goal: Goal | None = None
    rng: Random = field(default_factory=Random)
    warnings: list[str] = field(default_factory=list)
    _rr: int = 0
    _cache_history: tuple[str, ...] | None = None
    _cache_net: AcceptingOCPN | None = None
    _cache_tmap: dict[str, str] | None = None

    def _goal_reached(self, model: AcceptingOCPN) -> bool:
        if self.goal is not None:
            return self.goal(model)
        return size(model)[0] <= self.size_threshold

    # --- state derived from the log -----------------------------------------

    def applied(self) -> dict[str, str]:
        """node key -> abstraction object id, for history entries matching tree nodes."""
        out: dict[str, str] = {}
        for oid in self.log.history:
            node = self._match(oid)
            if node is not None:
                out[node.key] = oid
        return out

    def _match(self, oid: str) -> TreeNode | None:
        atype = self.log.objects[oid]
        suffix = atype.rsplit("$", 1)[1]
        target = atype[len("abstraction:"):].rsplit("$", 1)[0]
        tids = frozenset(
            self.et[e.eid] for e in self.log.events if oid in e.aomap.get(atype, ())
        )
        return self.tree.nodes.get(_node_key(target, suffix, tids))

    def current_model(self) -> AcceptingOCPN:
        if self._cache_history == self.log.history and self._cache_net is not None:
            return self._cache_net
        prior = self._cache_history
        if (
            prior is not None
            and self._cache_net is not None
            and len(self.log.history) == len(prior) + 1
            and self.log.history[:-1] == prior
        ):
            net, tmap = walk_history(
                self.log,
                self.original_net,
                self.repo,
                self.et,
                history=self.log.history[-1:],
                start=self._cache_net,
                tmap=self._cache_tmap,
            )
        else:
            net, tmap = walk_history(self.log, self.original_net, self.repo, self.et)
        self._cache_history = self.log.history
        self._cache_net = net
        self._cache_tmap = tmap
        return net

    # --- interaction ---------------------------------------------------------

    def _current_record(self, node: TreeNode) -> AbstractionRecord | None:
        """The node's record with transition ids of the current model."""
        self.current_model()
        tmap = self._cache_tmap or {}
        try:
            current = frozenset(tmap[t] for t in node.transitions)
        except KeyError:
            return None
        return AbstractionRecord(
            atype=make_abstraction_type(node.otype, node.kind),
            target_otype=node.otype,
            transitions=current,
            oid=None,
        )

    def available(self) -> list[TreeNode]:
        """Next coarser steps, looking upward from the applied nodes.

        A node is available when it is unapplied, admissible on the current
        model, sits below no applied ancestor, and no unapplied child is
        itself admissible right now. Nodes whose members still interact with
        another type stay out (and do not gate their parent) until that type
        has been completely aggregated away.
        """
        applied = self.applied()
        model = self.current_model()
        verdicts: dict[str, bool] = {}

        def node_admissible(node: TreeNode) -> bool:
            if node.key not in verdicts:
                record = self._current_record(node)
                verdicts[node.key] = record is not None and admissible(model, record)
            return verdicts[node.key]

        out = []
        for node in self.tree.nodes.values():
            if node.key in applied:
                continue
            if self._applied_ancestor(node, applied):
                continue
            if not node_admissible(node):
                continue
            blocked = any(
                child not in applied and node_admissible(self.tree.nodes[child])
                for child in node.children
            )
            if blocked:
                continue
            out.append(node)
        return sorted(out, key=lambda n: (n.otype, -n.depth, sorted(n.transitions)))

    def _applied_ancestor(self, node: TreeNode, applied: dict[str, str]) -> bool:
        cur = node.parent
        while cur is not None:
            if cur in applied:
                return True
            cur = self.tree.nodes[cur].parent
        return False

    def redoable(self) -> list[tuple[AbstractionRecord, tuple[str, ...]]]:
        """Applied aggregations that may be reversed, with the rule(s) naming
        why: the per-type most coarse-grained applied nodes and the last one.

        An entry whose removal would strand a later history entry (its record
        no longer reconstructs) is withheld, so every reachable state keeps a
        working overlay.
        """
        applied = self.applied()
        rules: dict[str, set[str]] = {}
        for key, oid in applied.items():
            node = self.tree.nodes[key]
            if not self._applied_ancestor(node, applied):
                rules.setdefault(oid, set()).add("coarsest-applied")
        if self.log.history:
            rules.setdefault(self.log.history[-1], set()).add("last-applied")
        out = []
        for oid in self.log.history:
            if oid not in rules:
                continue
            if not self._redo_keeps_overlay(oid):
                continue
            node = self._match(oid)
            if node is not None:
                record = node.record(oid)
            else:
                atype = self.log.objects[oid]
                tids = frozenset(
                    self.et[e.eid] for e in self.log.events if oid in e.aomap.get(atype, ())
                )
                record = AbstractionRecord(
                    atype=atype,
                    target_otype=atype[len("abstraction:"):].rsplit("$", 1)[0],
                    transitions=tids,
                    oid=oid,
                )
            out.append((record, tuple(sorted(rules[oid]))))
        return out

    def _redo_keeps_overlay(self, oid: str) -> bool:
        if oid == self.log.history[-1]:
            return True  # removing the last entry cannot strand anything
        candidate = st_abs_inverse(self.log, oid)
        try:
            walk_history(candidate, self.original_net, self.repo, self.et)
        except GranexError:
            return False
        return True

    def find_available(self, suffix: str, target: str, transitions: frozenset[str]) -> TreeNode:
        key = _node_key(target, suffix, transitions)
        for node in self.available():
            if node.key == key:
                return node
        raise StaleRecordError(f"no available aggregation {suffix!r} on {target!r} over {sorted(transitions)}")

    def apply(self, node: TreeNode) -> AbstractionRecord:
        """Augment the log for one available aggregation; the model follows."""
        if node.key not in {n.key for n in self.available()}:
            raise StaleRecordError(f"aggregation {node.key!r} is not available")
        oid = generate_id(self.rng, set(self.log.objects))
        targets = {eid for eid, tid in self.et.items() if tid in node.transitions}
        self.log = st_abs(self.log, targets, make_abstraction_type(node.otype, node.kind), oid)
        return node.record(oid)

    def _apply_unchecked(self, node: TreeNode) -> AbstractionRecord:
        oid = generate_id(self.rng, set(self.log.objects))
        targets = {eid for eid, tid in self.et.items() if tid in node.transitions}
        self.log = st_abs(self.log, targets, make_abstraction_type(node.otype, node.kind), oid)
        return node.record(oid)

    def redo(self, oid: str) -> None:
        """Reverse one redoable aggregation by removing its abstraction object."""
        if oid not in {rec.oid for rec, _ in self.redoable()}:
            raise StaleRecordError(f"abstraction object {oid!r} is not redoable")
        self.log = st_abs_inverse(self.log, oid)

    def export(self) -> bytes:
        return serialize_log(self.log)

    # --- initialize ----------------------------------------------------------

    def _events_per_type(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.log.events:
            for otype, oids in e.wfomap.items():
                if oids:
                    counts[otype] = counts.get(otype, 0) + 1
        return counts

    def retrieve_next(self) -> TreeNode | None:
        """Priority: lifecycle cla, then complete subprocess (minus the most
        coarse-grained)/device/resource, then control-flow nodes from the
        leaves upward, switching object types after each retrieval."""
        applied = self.applied()

        def root_nodes(cls: TypeClass) -> list[TreeNode]:
            out = []
            for otype, key in sorted(self.tree.roots.items()):
                if classify(otype) is cls and key not in applied:
                    out.append(self.tree.nodes[key])
            return out

        for node in root_nodes(TypeClass.LIFECYCLE):
            return node
        counts = self._events_per_type()
        sub_roots = root_nodes(TypeClass.SUBPROCESS)
        if sub_roots:
            coarsest = max(
                (o for o in self.tree.roots if classify(o) is TypeClass.SUBPROCESS),
                key=lambda o: (counts.get(o, 0), o),
            )
            for node in sub_roots:
                if node.otype != coarsest:
                    return node
        for cls in (TypeClass.DEVICE, TypeClass.RESOURCE):
            for node in root_nodes(cls):
                return node

        frontier_types = sorted({n.otype for n in self.tree.nodes.values() if n.parent is not None})
        if not frontier_types:
            return None
        available = {n.key: n for n in self.available() if n.parent is not None}
        for step in range(len(frontier_types)):
            otype = frontier_types[(self._rr + step) % len(frontier_types)]
            candidates = [n for n in available.values() if n.otype == otype]
            if candidates:
                candidates.sort(key=lambda n: (-n.depth, sorted(n.transitions)))
                self._rr = (self._rr + step + 1) % len(frontier_types)
                return candidates[0]
        return None

    def run_initialize(self) -> None:
        while not self._goal_reached(self.current_model()):
            node = self.retrieve_next()
            if node is None:
                self.warnings.append(
                    f"aggregation candidates exhausted at {size(self.current_model())[0]} elements "
                    f"with the goal unreached (size threshold {self.size_threshold})"
                )
                log_.warning(self.warnings[-1])
                break
            self._apply_unchecked(node)


def initialize(
    log: EventLog,
    threshold: int = DEFAULT_SIZE_THRESHOLD,
    seed: int | None = None,
    goal: Goal | None = None,
) -> Session:
    """Discover, verify fitness and coverage, build the tree, then aggregate
    until the goal holds (by default: model size at or under the threshold)
    or the tree runs out."""
    if not log.events:
        raise InvariantError("cannot initialize a session on an empty log")
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
    tree = build_tree(net, models)
    session = Session(
        original_net=net,
        log=log,
        tree=tree,
        repo=default_repository(),
        models=models,
        et=result.et,
        size_threshold=threshold,
        goal=goal,
        rng=Random(seed),
    )
    session.current_model()  # existing history must overlay cleanly
    session.run_initialize()
    return session
