"""An interactive exploration session, scripted.

Shows the session loop a human drives through the web client: initialize,
inspect the available and redoable aggregations, apply the sequence
aggregation of the four fine-grained account-opening steps, redo it, and
export the journey.
"""

from importlib import resources

from granex import parse_log, size
from granex.session import CLASS_NAMES, initialize

raw = resources.files("granex.data").joinpath("account_opening.json").read_bytes()
session = initialize(parse_log(raw), threshold=37, seed=0)

print(f"model after initialize: {size(session.current_model())} (threshold {session.size_threshold})")
print(f"already applied (from the log's history): {list(session.log.history)}")

print("\navailable aggregations:")
for node in session.available():
    members = ", ".join(node.member_labels())
    print(f"  [{node.kind}] {CLASS_NAMES[node.kind]} on {node.otype}: {members}")

print("\nredoable aggregations:")
for record, rules in session.redoable():
    print(f"  {record.oid} ({record.suffix} on {record.target_otype}; {', '.join(rules)})")

seq = next(n for n in session.available() if n.kind == "seq" and len(n.transitions) == 4)
record = session.apply(seq)
model = session.current_model()
agg = model.transitions[f"agg:{record.oid}"]
print(f"\napplied {record.oid}: {agg.label}")
print(f"model is now {size(model)}")

session.redo(record.oid)
print(f"after redo: {size(session.current_model())} — the four steps are back")

exported = session.export()
rebuilt = initialize(parse_log(exported), threshold=37, seed=1)
assert size(rebuilt.current_model()) == size(session.current_model())
print(f"\nexported {len(exported)} bytes; re-importing reproduces the model exactly  ✓")
