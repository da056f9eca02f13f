"""Object-centric event logs with abstraction-object augmentation.

The log profile is a single JSON document:

* ``"objects"``: map object id -> ``{"type": <type name>}``. Exactly one object
  may have type ``"history"``; it additionally carries ``"applied"``, the
  ordered list of abstraction object ids ever applied.
* ``"events"``: ordered list of ``{"id", "activity", "timestamp", "relations"}``
  where relations maps a type name to the list of related object ids.

Object types are classified purely by name:

* ``workflow:<name>`` business artifact, with sub-namespaces ``workflow:lc:``
  (activity lifecycle), ``workflow:sp:`` (subprocess), ``workflow:res:``
  (resource) and ``workflow:dev:`` (device);
* ``abstraction:<workflow type>$<suffix>`` with suffix one of ``cla``, ``csa``,
  ``caa``, ``seq``, ``xor``, ``and``, ``loop``;
* the single ``history`` type.

Logs are immutable: the augmentation transition ``st_abs`` and its inverse
return new ``EventLog`` values sharing unchanged events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from random import Random
from typing import Iterable

from .errors import InvariantError, ParseError, UnknownEntityError

OCEL_JSON = "ocel-json"

ABSTRACTION_SUFFIXES = ("cla", "csa", "caa", "seq", "xor", "and", "loop")
COMPLETE_SUFFIXES = ("cla", "csa", "caa")
FLOW_SUFFIXES = ("seq", "xor", "and", "loop")

HISTORY_TYPE = "history"
_ID_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


class TypeClass(Enum):
    BUSINESS = "business"
    LIFECYCLE = "lifecycle"
    SUBPROCESS = "subprocess"
    RESOURCE = "resource"
    DEVICE = "device"
    ABSTRACTION = "abstraction"
    HISTORY = "history"


WORKFLOW_CLASSES = frozenset(
    {TypeClass.BUSINESS, TypeClass.LIFECYCLE, TypeClass.SUBPROCESS, TypeClass.RESOURCE, TypeClass.DEVICE}
)


def classify(type_name: str) -> TypeClass:
    """Derive the class of an object type from its namespaced name."""
    if type_name == HISTORY_TYPE:
        return TypeClass.HISTORY
    if type_name.startswith("abstraction:"):
        suffix = abstraction_suffix(type_name)
        if suffix not in ABSTRACTION_SUFFIXES:
            raise InvariantError(f"unknown abstraction suffix {suffix!r} in type {type_name!r}")
        target = abstraction_target(type_name)
        if classify(target) not in WORKFLOW_CLASSES:
            raise InvariantError(f"abstraction type {type_name!r} does not target a workflow type")
        return TypeClass.ABSTRACTION
    if type_name.startswith("workflow:lc:"):
        return TypeClass.LIFECYCLE
    if type_name.startswith("workflow:sp:"):
        return TypeClass.SUBPROCESS
    if type_name.startswith("workflow:res:"):
        return TypeClass.RESOURCE
    if type_name.startswith("workflow:dev:"):
        return TypeClass.DEVICE
    if type_name.startswith("workflow:"):
        return TypeClass.BUSINESS
    raise InvariantError(f"object type {type_name!r} has no recognized namespace")


def is_workflow_type(type_name: str) -> bool:
    try:
        return classify(type_name) in WORKFLOW_CLASSES
    except InvariantError:
        return False


def abstraction_suffix(type_name: str) -> str:
    if "$" not in type_name:
        raise InvariantError(f"abstraction type {type_name!r} lacks a $suffix")
    return type_name.rsplit("$", 1)[1]


def abstraction_target(type_name: str) -> str:
    """The workflow type an abstraction type points at."""
    body = type_name[len("abstraction:"):]
    return body.rsplit("$", 1)[0]


def make_abstraction_type(target_type: str, suffix: str) -> str:
    if suffix not in ABSTRACTION_SUFFIXES:
        raise InvariantError(f"unknown abstraction suffix {suffix!r}")
    if classify(target_type) not in WORKFLOW_CLASSES:
        raise InvariantError(f"abstraction target {target_type!r} is not a workflow type")
    return f"abstraction:{target_type}${suffix}"


def display_name(workflow_type: str) -> str:
    """Human label for a workflow type ('workflow:lc:x' -> 'x')."""
    for prefix in ("workflow:lc:", "workflow:sp:", "workflow:res:", "workflow:dev:", "workflow:"):
        if workflow_type.startswith(prefix):
            return workflow_type[len(prefix):]
    return workflow_type


@dataclass(frozen=True, eq=True)
class Event:
    """One recorded event relating workflow objects and, once augmented, abstraction objects."""

    eid: str
    activity: str
    timestamp: datetime
    wfomap: dict[str, frozenset[str]]
    aomap: dict[str, frozenset[str]] = field(default_factory=dict)

    def related(self) -> frozenset[str]:
        out: set[str] = set()
        for oids in self.wfomap.values():
            out |= oids
        for oids in self.aomap.values():
            out |= oids
        return frozenset(out)


def _order_key(event: Event) -> tuple[datetime, str]:
    return (event.timestamp, event.eid)


@dataclass(frozen=True, eq=True)
class EventLog:
    """Totally ordered events plus the object registry and abstraction history.

    ``events`` is kept sorted by (timestamp, eid); ``objects`` maps every
    object id to its type name; ``history`` is the ordered tuple of applied
    abstraction object ids (the analysis journey).
    """

    events: tuple[Event, ...]
    objects: dict[str, str]
    history: tuple[str, ...] = ()

    @property
    def augmented(self) -> bool:
        return bool(self.history)

    def workflow_types(self) -> list[str]:
        return sorted({t for t in self.objects.values() if is_workflow_type(t)})

    def event_ids(self) -> set[str]:
        return {e.eid for e in self.events}

    def get_event(self, eid: str) -> Event:
        for e in self.events:
            if e.eid == eid:
                return e
        raise UnknownEntityError(f"unknown event id {eid!r}")


def build_log(events: Iterable[Event], objects: dict[str, str], history: Iterable[str] = ()) -> EventLog:
    """Sort, validate and freeze a log; raises InvariantError naming the offender."""
    try:
        ordered = tuple(sorted(events, key=_order_key))
    except TypeError as exc:
        raise ParseError(f"timestamps are not mutually comparable: {exc}") from exc
    log = EventLog(events=ordered, objects=dict(objects), history=tuple(history))
    _validate(log)
    return log


def _validate(log: EventLog) -> None:
    for oid, type_name in log.objects.items():
        classify(type_name)

    seen_eids: set[str] = set()
    used_abs_oids: set[str] = set()
    for event in log.events:
        if event.eid in seen_eids:
            raise InvariantError(f"duplicate event id {event.eid!r}")
        seen_eids.add(event.eid)
        if not any(event.wfomap.values()):
            raise InvariantError(f"event {event.eid!r} relates to no workflow object")
        for type_name, oids in event.wfomap.items():
            if classify(type_name) not in WORKFLOW_CLASSES:
                raise InvariantError(f"event {event.eid!r} lists {type_name!r} among workflow relations")
            _check_oids(log, event.eid, type_name, oids)
        for type_name, oids in event.aomap.items():
            if classify(type_name) is not TypeClass.ABSTRACTION:
                raise InvariantError(f"event {event.eid!r} lists {type_name!r} among abstraction relations")
            _check_oids(log, event.eid, type_name, oids)
            used_abs_oids |= oids

    if len(set(log.history)) != len(log.history):
        raise InvariantError("abstraction history contains a duplicate id")
    for oid in log.history:
        if oid not in log.objects:
            raise InvariantError(f"history references unknown object {oid!r}")
        if classify(log.objects[oid]) is not TypeClass.ABSTRACTION:
            raise InvariantError(f"history entry {oid!r} is not an abstraction object")
    if used_abs_oids != set(log.history):
        stray = sorted(used_abs_oids.symmetric_difference(log.history))
        raise InvariantError(f"history and abstraction relations disagree on {stray}")


def _check_oids(log: EventLog, eid: str, type_name: str, oids: frozenset[str]) -> None:
    for oid in oids:
        declared = log.objects.get(oid)
        if declared is None:
            raise InvariantError(f"event {eid!r} references unknown object {oid!r}")
        if declared != type_name:
            raise InvariantError(f"object {oid!r} typed {declared!r} but related as {type_name!r}")


def parse_log(source: bytes | str, format: str = OCEL_JSON) -> EventLog:
    """Parse a log document; a missing history object yields an empty history."""
    if format != OCEL_JSON:
        raise ParseError(f"unsupported log format {format!r}")
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")

    raw_objects = doc.get("objects", {})
    if not isinstance(raw_objects, dict):
        raise ParseError("'objects' must be a map of id to object entry")
    objects: dict[str, str] = {}
    history: tuple[str, ...] = ()
    history_seen = False
    for oid, entry in raw_objects.items():
        if isinstance(entry, str):
            entry = {"type": entry}
        if not isinstance(entry, dict) or "type" not in entry:
            raise ParseError(f"object {oid!r} lacks a type")
        type_name = entry["type"]
        if classify(type_name) is TypeClass.HISTORY:
            if history_seen:
                raise InvariantError(f"second history object {oid!r}")
            history_seen = True
            applied = entry.get("applied", [])
            if not isinstance(applied, list):
                raise ParseError(f"history object {oid!r}: 'applied' must be a list")
            history = tuple(applied)
            continue
        objects[oid] = type_name

    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list):
        raise ParseError("'events' must be a list")
    events = []
    for i, raw in enumerate(raw_events):
        for key in ("id", "activity", "timestamp"):
            if key not in raw:
                raise ParseError(f"event #{i} lacks {key!r}")
        try:
            ts = datetime.fromisoformat(raw["timestamp"])
        except ValueError as exc:
            raise ParseError(f"event {raw['id']!r}: bad timestamp {raw['timestamp']!r}") from exc
        wfomap: dict[str, frozenset[str]] = {}
        aomap: dict[str, frozenset[str]] = {}
        for type_name, oids in raw.get("relations", {}).items():
            cls = classify(type_name)
            bucket = wfomap if cls in WORKFLOW_CLASSES else aomap
            if cls is TypeClass.HISTORY:
                raise InvariantError(f"event {raw['id']!r} relates to the history object")
            if oids:
                bucket[type_name] = frozenset(oids)
        events.append(Event(eid=raw["id"], activity=raw["activity"], timestamp=ts, wfomap=wfomap, aomap=aomap))

    return build_log(events, objects, history)


def serialize_log(log: EventLog, format: str = OCEL_JSON) -> bytes:
    """Inverse of parse_log: deterministic bytes, parse(serialize(log)) == log."""
    if format != OCEL_JSON:
        raise ParseError(f"unsupported log format {format!r}")
    objects: dict[str, dict] = {oid: {"type": t} for oid, t in log.objects.items()}
    objects["absHistory"] = {"type": HISTORY_TYPE, "applied": list(log.history)}
    events = []
    for e in log.events:
        relations = {t: sorted(oids) for t, oids in e.wfomap.items() if oids}
        relations.update({t: sorted(oids) for t, oids in e.aomap.items() if oids})
        events.append(
            {
                "id": e.eid,
                "activity": e.activity,
                "timestamp": e.timestamp.isoformat(),
                "relations": relations,
            }
        )
    doc = {"objects": objects, "events": events}
    return (json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")


def project_workflow(log: EventLog) -> EventLog:
    """The log without abstraction relations and history; discovery input."""
    events = [
        Event(eid=e.eid, activity=e.activity, timestamp=e.timestamp, wfomap=dict(e.wfomap), aomap={})
        for e in log.events
    ]
    objects = {oid: t for oid, t in log.objects.items() if is_workflow_type(t)}
    return build_log(events, objects, ())


def st_abs(log: EventLog, targets: set[str], abstraction_type: str, new_oid: str) -> EventLog:
    """Augment the log: relate every targeted event to a fresh abstraction object.

    The new object id is appended to the history; everything else is unchanged.
    """
    if classify(abstraction_type) is not TypeClass.ABSTRACTION:
        raise InvariantError(f"{abstraction_type!r} is not an abstraction type")
    if new_oid in log.objects:
        raise InvariantError(f"object id {new_oid!r} is not fresh")
    if not targets:
        raise InvariantError("st_abs requires a non-empty target set")
    known = log.event_ids()
    for eid in targets:
        if eid not in known:
            raise UnknownEntityError(f"unknown event id {eid!r}")

    events = []
    for e in log.events:
        if e.eid in targets:
            aomap = dict(e.aomap)
            aomap[abstraction_type] = aomap.get(abstraction_type, frozenset()) | {new_oid}
            events.append(Event(eid=e.eid, activity=e.activity, timestamp=e.timestamp, wfomap=dict(e.wfomap), aomap=aomap))
        else:
            events.append(e)
    objects = dict(log.objects)
    objects[new_oid] = abstraction_type
    return build_log(events, objects, log.history + (new_oid,))


def st_abs_inverse(log: EventLog, oid: str) -> EventLog:
    """Remove one applied abstraction object and its history reference."""
    if oid not in log.history:
        raise UnknownEntityError(f"abstraction object {oid!r} is not in the applied history")
    events = []
    for e in log.events:
        if any(oid in oids for oids in e.aomap.values()):
            aomap = {}
            for t, oids in e.aomap.items():
                remaining = oids - {oid}
                if remaining:
                    aomap[t] = remaining
            events.append(Event(eid=e.eid, activity=e.activity, timestamp=e.timestamp, wfomap=dict(e.wfomap), aomap=aomap))
        else:
            events.append(e)
    objects = {k: v for k, v in log.objects.items() if k != oid}
    history = tuple(x for x in log.history if x != oid)
    return build_log(events, objects, history)


def generate_id(rng: Random, taken: set[str] | None = None, length: int = 5) -> str:
    """Fresh 5-char base-36 id; deterministic under a seeded generator."""
    taken = taken or set()
    while True:
        candidate = "".join(rng.choice(_ID_ALPHABET) for _ in range(length))
        if candidate not in taken:
            return candidate
