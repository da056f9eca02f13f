"""The log-model link, by hand.

Starting from the raw (unaugmented) log, this script re-applies the two
shipped aggregations through the event-log transition st_abs, overlays the
original net with the augmented log, and shows that the same model falls out
of abstracting the net directly: augmenting the log and abstracting the model
commute.
"""

from importlib import resources

from granex import discover, parse_log, project_workflow, size, st_abs, st_abs_inverse
from granex.abstraction import AbstractionRecord, apply_abstraction, default_repository, overlay, overlay_trace
from granex.nets import to_graph_payload

raw = resources.files("granex.data").joinpath("account_opening.json").read_bytes()
shipped = parse_log(raw)
bare = project_workflow(shipped)   # the log as extracted, no abstractions
net = discover(bare)
repo = default_repository()
_, _, et = overlay_trace(bare, net, repo)   # event id -> transition id

print(f"original model: {size(net)} (elements, arcs)")

# aggregate the client artifact completely: every event the client relates to
caa_type = "abstraction:workflow:client$caa"
client_transitions = {"t:ask for customer needs", "t:inform client", "t:check type of account to be created"}
targets = {eid for eid, tid in et.items() if tid in client_transitions}
log1 = st_abs(bare, targets, caa_type, "uih13")
print(f"\nst_abs added {caa_type} as uih13 to events {sorted(targets)}")

# and the finalize-account-opening lifecycle
cla_type = "abstraction:workflow:lc:finalize account opening$cla"
lc_transitions = {tid for tid in net.transitions if tid.startswith("t:finalize")}
log2 = st_abs(log1, {e for e, t in et.items() if t in lc_transitions}, cla_type, "kl273")
print(f"st_abs added {cla_type} as kl273; history = {list(log2.history)}")
assert log2 == shipped, "we just rebuilt the bundled augmented log"

overlaid = overlay(log2, net, repo)
print(f"\noverlay of the augmented log on the original net: {size(overlaid)}")
badges = sorted(t.label for t in overlaid.transitions.values() if "workflow:client" in t.refs)
print("transitions keeping a client reference:", badges)

# the same model, obtained by abstracting the net directly
direct = apply_abstraction(
    net,
    AbstractionRecord(caa_type, "workflow:client", frozenset(client_transitions), "uih13"),
    repo,
)
direct = apply_abstraction(
    direct,
    AbstractionRecord(cla_type, "workflow:lc:finalize account opening", frozenset(lc_transitions), "kl273"),
    repo,
)
assert to_graph_payload(direct) == to_graph_payload(overlaid)
print("log augmentation + overlay == direct model abstraction  ✓")

# and st_abs is invertible, so the journey can always be rewound
rewound = st_abs_inverse(st_abs_inverse(log2, "kl273"), "uih13")
assert rewound == bare
print("removing both abstraction objects restores the extracted log  ✓")
