"""Regenerate the golden snapshots in tests/goldens from the bundled fixture.

Run after intentional changes to discovery/abstraction output, then review the
diff by hand before committing.
"""

import json
from importlib import resources
from pathlib import Path

from granex.abstraction import default_repository, overlay
from granex.nets import to_graph_payload
from granex.ocel import parse_log, st_abs
from granex.session import initialize

GOLDEN_DIR = Path(__file__).parent.parent / "tests" / "goldens"


def dump(name: str, payload: dict) -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    path = GOLDEN_DIR / name
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main() -> None:
    raw = resources.files("granex.data").joinpath("account_opening.json").read_bytes()
    log = parse_log(raw)
    session = initialize(log, threshold=37, seed=0)
    repo = default_repository()

    dump("original_net.json", to_graph_payload(session.original_net))
    dump("upper_model.json", to_graph_payload(session.current_model()))

    tree_dump = []
    for key in sorted(session.tree.nodes):
        node = session.tree.nodes[key]
        tree_dump.append(
            {
                "otype": node.otype,
                "kind": node.kind,
                "transitions": sorted(node.transitions),
                "depth": node.depth,
                "parent": node.parent,
                "children": sorted(node.children),
            }
        )
    dump("abstraction_tree.json", {"nodes": tree_dump})

    seq_node = next(n for n in session.available() if n.kind == "seq" and len(n.transitions) == 4)
    seq_log = st_abs(
        session.log,
        {eid for eid, tid in session.et.items() if tid in seq_node.transitions},
        "abstraction:workflow:bank$seq",
        "seq01",
    )
    lower = overlay(seq_log, session.original_net, repo)
    dump("lower_model.json", to_graph_payload(lower))


if __name__ == "__main__":
    main()
