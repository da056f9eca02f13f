"""Command-line entry points: discover, init, apply-script, export, serve, demo.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 unfit discovery, 4 inadmissible
script step, so pipelines can branch on the failure class.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .abstraction import default_repository, overlay
from .discovery import discover
from .errors import (
    GranexError,
    InadmissibleError,
    InvariantError,
    ParseError,
    StaleRecordError,
    UnfitError,
)
from .nets import size, to_dot, to_graph_payload
from .ocel import parse_log
from .session import DEFAULT_SIZE_THRESHOLD, initialize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_UNFIT = 3
EXIT_INADMISSIBLE = 4


def _read_log(path: str):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such log file: {path}")
    return parse_log(p.read_bytes())


def _write_net(net, out: str | None, fmt: str) -> None:
    if fmt == "dot":
        payload = to_dot(net)
    else:
        payload = json.dumps(to_graph_payload(net), ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(payload)
    else:
        Path(out).write_text(payload, encoding="utf-8")


def cmd_discover(args) -> int:
    log = _read_log(args.log)
    net = discover(log)
    _write_net(net, args.out, args.format)
    elements, arcs = size(net)
    print(f"discovered model: {elements} elements, {arcs} arcs, "
          f"{len(net.object_types())} object types", file=sys.stderr)
    return EXIT_OK


def cmd_init(args) -> int:
    log = _read_log(args.log)
    session = initialize(log, threshold=args.threshold, seed=args.seed)
    for warning in session.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    _write_net(session.current_model(), args.out_model, args.format)
    if args.out_log:
        Path(args.out_log).write_bytes(session.export())
    elements, arcs = size(session.current_model())
    print(f"initialized model: {elements} elements, {arcs} arcs, "
          f"{len(session.current_model().object_types())} object types, "
          f"history length {len(session.log.history)}", file=sys.stderr)
    return EXIT_OK


def cmd_apply_script(args) -> int:
    log = _read_log(args.log)
    session = initialize(log, threshold=args.threshold, seed=args.seed)
    script = json.loads(Path(args.script).read_text(encoding="utf-8"))
    if not isinstance(script, list):
        raise ParseError("script must be a JSON array of steps")
    for i, step in enumerate(script):
        op = step.get("op")
        if op == "apply":
            node = session.find_available(
                step.get("suffix", ""), step.get("target", ""), frozenset(step.get("transitions", []))
            )
            record = session.apply(node)
            print(f"step {i}: applied {record.atype} as {record.oid}", file=sys.stderr)
        elif op == "redo":
            session.redo(step.get("oid", ""))
            print(f"step {i}: redid {step.get('oid')}", file=sys.stderr)
        else:
            raise ParseError(f"step {i}: unknown op {op!r}")
    if args.out_log:
        Path(args.out_log).write_bytes(session.export())
    if args.out_model:
        _write_net(session.current_model(), args.out_model, args.format)
    return EXIT_OK


def cmd_export(args) -> int:
    log = _read_log(args.log)
    net = discover(log)
    current = overlay(log, net, default_repository())
    _write_net(current, args.out, args.format)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(
        default_threshold=args.threshold,
        seed=args.seed,
        static_dir=args.ui,
        snapshot_dir=args.snapshot_dir,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return EXIT_OK


def cmd_demo(args) -> int:
    """Rebuild the bundled account-opening example end to end."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = resources.files("granex.data").joinpath("account_opening.json").read_bytes()
    log = parse_log(raw)
    print(f"parsed log: {len(log.events)} events, history {list(log.history)}")

    net = discover(log)
    _write_net(net, str(out_dir / "original.dot"), "dot")
    print(f"original model: {size(net)[0]} elements, {size(net)[1]} arcs")

    session = initialize(log, threshold=args.threshold, seed=args.seed)
    _write_net(session.current_model(), str(out_dir / "initialized.dot"), "dot")
    print(f"after initialize: {size(session.current_model())[0]} elements "
          f"({len(session.log.history)} applied aggregations)")

    seqs = [n for n in session.available() if n.kind == "seq" and len(n.transitions) == 4]
    if seqs:
        record = session.apply(seqs[0])
        _write_net(session.current_model(), str(out_dir / "sequence_applied.dot"), "dot")
        agg = [t for t in session.current_model().transitions.values() if t.tid == f"agg:{record.oid}"]
        print(f"applied sequence aggregation {record.oid}: {agg[0].label}")
        session.redo(record.oid)
        print(f"redo {record.oid}: back to {size(session.current_model())[0]} elements")
    (out_dir / "journey.json").write_bytes(session.export())
    print(f"exported augmented log to {out_dir / 'journey.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="discover a model and write it out")
    p.add_argument("log")
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("init", help="discover then aggregate to the size threshold")
    p.add_argument("log")
    p.add_argument("--threshold", type=int, default=DEFAULT_SIZE_THRESHOLD)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-model", default=None)
    p.add_argument("--out-log", default=None)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("apply-script", help="run a JSON script of apply/redo steps")
    p.add_argument("log")
    p.add_argument("script")
    p.add_argument("--threshold", type=int, default=DEFAULT_SIZE_THRESHOLD)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-log", default=None)
    p.add_argument("--out-model", default=None)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.set_defaults(func=cmd_apply_script)

    p = sub.add_parser("export", help="overlay an augmented log and write the current model")
    p.add_argument("log")
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default=os.environ.get("GRANEX_BIND", "127.0.0.1:8000"))
    p.add_argument("--threshold", type=int, default=int(os.environ.get("GRANEX_THRESHOLD", DEFAULT_SIZE_THRESHOLD)))
    p.add_argument("--seed", type=int, default=int(os.environ["GRANEX_SEED"]) if "GRANEX_SEED" in os.environ else None)
    p.add_argument("--ui", default=os.environ.get("GRANEX_UI"), help="directory with the built web client")
    p.add_argument("--snapshot-dir", default=os.environ.get("GRANEX_SNAPSHOT_DIR"),
                   help="write each session's exported log here on shutdown")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="rebuild the bundled account-opening example")
    p.add_argument("--out", default="demo-output")
    p.add_argument("--threshold", type=int, default=DEFAULT_SIZE_THRESHOLD)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnfitError as exc:
        print(f"unfit: {exc}", file=sys.stderr)
        for entity, reason in exc.diagnostics:
            print(f"  {entity}: {reason}", file=sys.stderr)
        return EXIT_UNFIT
    except (InadmissibleError, StaleRecordError) as exc:
        print(f"inadmissible: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (InvariantError, GranexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
