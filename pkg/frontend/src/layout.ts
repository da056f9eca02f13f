// Layered left-to-right layout with a position cache. Nodes that survive an
// apply/redo keep their exact coordinates so the analyst can see what changed;
// only new nodes are placed, near the mean of their already-placed neighbours.

import type { ModelPayload } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export type LayoutCache = Map<string, Point>;

const DX = 170;
const DY = 70;

export function ranks(payload: ModelPayload): Map<string, number> {
  const incoming = new Map<string, number>();
  const out = new Map<string, string[]>();
  for (const node of payload.nodes) {
    incoming.set(node.id, 0);
    out.set(node.id, []);
  }
  for (const edge of payload.edges) {
    incoming.set(edge.dst, (incoming.get(edge.dst) ?? 0) + 1);
    out.get(edge.src)?.push(edge.dst);
  }
  const rank = new Map<string, number>();
  const queue: string[] = [];
  for (const node of payload.nodes) {
    if ((incoming.get(node.id) ?? 0) === 0 || (node.kind === "place" && node.initial)) {
      rank.set(node.id, 0);
      queue.push(node.id);
    }
  }
  // longest-path layering; the visited bound tolerates loop arcs
  let guard = payload.nodes.length * payload.edges.length + payload.nodes.length;
  while (queue.length > 0 && guard-- > 0) {
    const cur = queue.shift()!;
    const base = rank.get(cur) ?? 0;
    for (const nxt of out.get(cur) ?? []) {
      const proposed = base + 1;
      if ((rank.get(nxt) ?? -1) < proposed && proposed < payload.nodes.length) {
        rank.set(nxt, proposed);
        queue.push(nxt);
      }
    }
  }
  for (const node of payload.nodes) {
    if (!rank.has(node.id)) rank.set(node.id, 0);
  }
  return rank;
}

export function layeredLayout(payload: ModelPayload, cache: LayoutCache): Map<string, Point> {
  const positions = new Map<string, Point>();
  const rank = ranks(payload);
  const survivors = payload.nodes.filter((n) => cache.has(n.id));
  const fresh = payload.nodes.filter((n) => !cache.has(n.id));

  for (const node of survivors) {
    positions.set(node.id, cache.get(node.id)!);
  }

  const neighbours = new Map<string, string[]>();
  for (const edge of payload.edges) {
    if (!neighbours.has(edge.src)) neighbours.set(edge.src, []);
    if (!neighbours.has(edge.dst)) neighbours.set(edge.dst, []);
    neighbours.get(edge.src)!.push(edge.dst);
    neighbours.get(edge.dst)!.push(edge.src);
  }

  const usedY = new Map<number, Set<number>>();
  const reserve = (x: number, y: number): number => {
    const column = usedY.get(x) ?? new Set<number>();
    usedY.set(x, column);
    let candidate = y;
    let step = 0;
    while (column.has(candidate)) {
      step += 1;
      candidate = y + (step % 2 === 0 ? -1 : 1) * Math.ceil(step / 2) * DY;
    }
    column.add(candidate);
    return candidate;
  };
  for (const point of positions.values()) {
    reserve(point.x, point.y);
  }

  const sortedFresh = [...fresh].sort((a, b) => {
    const byRank = (rank.get(a.id) ?? 0) - (rank.get(b.id) ?? 0);
    return byRank !== 0 ? byRank : a.id.localeCompare(b.id);
  });
  for (const node of sortedFresh) {
    const x = (rank.get(node.id) ?? 0) * DX;
    const placed = (neighbours.get(node.id) ?? [])
      .map((n) => positions.get(n))
      .filter((p): p is Point => p !== undefined);
    const wanted =
      placed.length > 0 ? placed.reduce((acc, p) => acc + p.y, 0) / placed.length : 0;
    const y = reserve(x, Math.round(wanted / DY) * DY);
    positions.set(node.id, { x, y });
  }

  cache.clear();
  for (const [id, point] of positions) {
    cache.set(id, point);
  }
  return positions;
}
