// Shared test plumbing: a fetch stub that serves the recorded server
// exchanges in order, verifying the client sends what the real client sent.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { expect } from "vitest";

const here = dirname(fileURLToPath(import.meta.url));

export interface Exchange {
  request: { method: string; path: string; body: unknown };
  response: { status: number; body: unknown };
}

export function loadExchanges(): Exchange[] {
  return JSON.parse(readFileSync(join(here, "fixtures", "exchange.json"), "utf-8")) as Exchange[];
}

export function installRecordedFetch(exchanges: Exchange[]): { requests: number } {
  const queue = [...exchanges];
  const seen = { requests: 0 };
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input.toString();
    const method = (init?.method ?? "GET").toUpperCase();
    const next = queue.shift();
    expect(next, `unexpected request ${method} ${url}`).toBeDefined();
    expect(method).toBe(next!.request.method);
    expect(url.split("?")[0]).toBe(next!.request.path);
    if (next!.request.body !== null && init?.body !== undefined) {
      expect(JSON.parse(init.body as string)).toEqual(next!.request.body);
    }
    seen.requests += 1;
    const payload = next!.response.body;
    const text = typeof payload === "string" ? payload : JSON.stringify(payload);
    return new Response(text, {
      status: next!.response.status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
  return seen;
}

// canonical, order-independent form of a model payload; equal canon strings
// witness graph isomorphism (node ids are stable across apply/redo)
export function canonicalModel(model: unknown): string {
  const m = model as { nodes: { id: string }[]; edges: { src: string; dst: string }[]; metrics: unknown };
  const nodes = [...m.nodes].sort((a, b) => a.id.localeCompare(b.id));
  const edges = [...m.edges].sort((a, b) => `${a.src}->${a.dst}`.localeCompare(`${b.src}->${b.dst}`));
  return JSON.stringify({ nodes, edges, metrics: m.metrics });
}
