"""Record real service exchanges for the web client's tests.

Drives the HTTP facade exactly like the client does (upload the bundled log,
apply the four-step sequence aggregation, redo it, export, re-upload the
export) and writes the ordered request/response pairs to
frontend/tests/fixtures/exchange.json.
"""

import json
from importlib import resources
from pathlib import Path

from fastapi.testclient import TestClient

from granex.service import create_app

OUT = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "exchange.json"


def main() -> None:
    client = TestClient(create_app(default_threshold=37, seed=0))
    raw = resources.files("granex.data").joinpath("account_opening.json").read_bytes()
    exchanges = []

    def record(method: str, path: str, *, content=None, body=None):
        if content is not None:
            resp = client.request(method, path, content=content)
        elif body is not None:
            resp = client.request(method, path, json=body)
        else:
            resp = client.request(method, path)
        try:
            payload = resp.json()
        except ValueError:
            payload = resp.text
        exchanges.append(
            {
                "request": {"method": method, "path": path, "body": body},
                "response": {"status": resp.status_code, "body": payload},
            }
        )
        return payload

    created = record("POST", "/sessions", content=raw)
    sid = created["session"]["sid"]
    seq_ref = next(
        r for r in created["available"] if r["suffix"] == "seq" and len(r["transitions"]) == 4
    )
    applied = record(
        "POST",
        f"/sessions/{sid}/apply",
        body={"suffix": seq_ref["suffix"], "target": seq_ref["target"], "transitions": seq_ref["transitions"]},
    )
    oid = applied["history"][-1]["oid"]
    record("POST", f"/sessions/{sid}/redo", body={"oid": oid})
    record("POST", f"/sessions/{sid}/redo", body={"oid": oid})  # second click: stale, 422
    record("GET", f"/sessions/{sid}/abstractions")  # the client refetches after a stale notice
    record("GET", f"/sessions/{sid}/export")
    exported = exchanges[-1]["response"]["body"]
    record("POST", "/sessions", content=json.dumps(exported).encode())

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(exchanges, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(exchanges)} exchanges)")


if __name__ == "__main__":
    main()
