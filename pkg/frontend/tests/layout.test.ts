import { expect, test } from "vitest";

import { layeredLayout, LayoutCache, ranks } from "../src/layout.js";
import { renderSvg, viewBox } from "../src/render.js";
import type { ModelPayload, SessionStateBody } from "../src/types.js";
import { loadExchanges } from "./helpers.js";

const exchanges = loadExchanges();
const upper = (exchanges[0].response.body as SessionStateBody).model;
const lower = (exchanges[1].response.body as SessionStateBody).model;

test("an empty model renders an empty canvas without errors", () => {
  const empty: ModelPayload = { nodes: [], edges: [], metrics: { elements: 0, arcs: 0, object_types: 0 } };
  const positions = layeredLayout(empty, new Map());
  expect(positions.size).toBe(0);
  expect(renderSvg(empty, positions)).not.toContain("<g");
  expect(viewBox(positions)).toBe("0 0 400 200");
});

test("ranks grow along the flow", () => {
  const r = ranks(upper);
  expect(r.get("p:workflow:bank:src")).toBe(0);
  expect(r.get("t:ask for customer needs")).toBe(1);
  const snk = r.get("p:workflow:bank:snk")!;
  for (const node of upper.nodes) {
    expect(r.get(node.id)!).toBeLessThanOrEqual(snk);
  }
});

test("every node gets a distinct position", () => {
  const positions = layeredLayout(upper, new Map());
  expect(positions.size).toBe(upper.nodes.length);
  const slots = new Set([...positions.values()].map((p) => `${p.x}/${p.y}`));
  expect(slots.size).toBe(upper.nodes.length);
});

test("layout is deterministic for a warm cache", () => {
  const cache: LayoutCache = new Map();
  const sorted = (m: Map<string, unknown>) => [...m.entries()].sort(([a], [b]) => a.localeCompare(b));
  const first = layeredLayout(upper, cache);
  const second = layeredLayout(upper, cache);
  expect(sorted(second)).toEqual(sorted(first));
});

test("surviving nodes keep their exact positions across apply and redo", () => {
  const cache: LayoutCache = new Map();
  const before = layeredLayout(upper, cache);
  const applied = layeredLayout(lower, cache);
  for (const node of lower.nodes) {
    if (before.has(node.id)) {
      expect(applied.get(node.id)).toEqual(before.get(node.id));
    }
  }
  const aggregate = lower.nodes.find((n) => n.id.startsWith("agg:"))!;
  expect(applied.has(aggregate.id)).toBe(true);
  const restored = layeredLayout(upper, cache);
  for (const node of upper.nodes) {
    if (applied.has(node.id)) {
      expect(restored.get(node.id)).toEqual(applied.get(node.id));
    }
  }
});

test("variable arcs are double-stroked and badges rendered", () => {
  const payload: ModelPayload = {
    nodes: [
      { id: "p1", kind: "place", label: "", otype: "workflow:x", initial: true, final: false },
      { id: "t1", kind: "transition", label: "do a thing", refs: ["client"], members: [] },
      { id: "p2", kind: "place", label: "", otype: "workflow:x", initial: false, final: true },
      { id: "tau1", kind: "silent", label: "", refs: [], members: [] },
    ],
    edges: [
      { src: "p1", dst: "t1", variable: true },
      { src: "t1", dst: "p2", variable: false },
    ],
    metrics: { elements: 4, arcs: 2, object_types: 1 },
  };
  const svg = renderSvg(payload, layeredLayout(payload, new Map()));
  expect(svg).toContain("↔ client");
  expect(svg).toContain('stroke-width="4"'); // outer stroke of the doubled arc
  expect(svg).toContain('stroke="#fff"'); // its light core
  expect(svg).toContain('class="silent"');
});
