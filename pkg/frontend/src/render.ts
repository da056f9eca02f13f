// Pure SVG markup for a model payload: typed places as coloured circles,
// transitions as boxes (silent ones filled), "↔ artifact" badges, and
// double-stroked variable arcs. Pure string output keeps this testable
// without a DOM; main.ts injects it and adds pan/zoom on top.

import type { Point } from "./layout.js";
import type { ModelPayload } from "./types.js";

const PALETTE = ["#9ecae9", "#a1d99b", "#fdae6b", "#bcbddc", "#e7ba52", "#9edae5", "#f7b6d2", "#dbdb8d"];

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function typeColor(otype: string, order: string[]): string {
  const index = order.indexOf(otype);
  return PALETTE[(index >= 0 ? index : 0) % PALETTE.length];
}

function trim(label: string, max = 26): string {
  return label.length <= max ? label : label.slice(0, max - 1) + "…";
}

export function renderSvg(payload: ModelPayload, positions: Map<string, Point>): string {
  const types = [...new Set(payload.nodes.filter((n) => n.kind === "place").map((n) => (n as { otype: string }).otype))].sort();
  const parts: string[] = [];
  parts.push(
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555"/></marker></defs>'
  );

  for (const edge of payload.edges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (!a || !b) continue;
    const base = `x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"`;
    if (edge.variable) {
      // double stroke: wide dark line with a light core
      parts.push(`<line ${base} stroke="#555" stroke-width="4" marker-end="url(#arrow)"/>`);
      parts.push(`<line ${base} stroke="#fff" stroke-width="1.6"/>`);
    } else {
      parts.push(`<line ${base} stroke="#555" stroke-width="1.4" marker-end="url(#arrow)"/>`);
    }
  }

  for (const node of payload.nodes) {
    const p = positions.get(node.id);
    if (!p) continue;
    if (node.kind === "place") {
      const fill = typeColor(node.otype, types);
      const marking = node.initial ? "●" : node.final ? "◎" : "";
      parts.push(
        `<g class="place" data-id="${esc(node.id)}">` +
          `<circle cx="${p.x}" cy="${p.y}" r="14" fill="${fill}" stroke="#333"/>` +
          (marking ? `<text x="${p.x}" y="${p.y + 4}" text-anchor="middle" font-size="11">${marking}</text>` : "") +
          `<title>${esc(node.id)} : ${esc(node.otype)}</title></g>`
      );
    } else if (node.kind === "silent") {
      parts.push(
        `<g class="silent" data-id="${esc(node.id)}">` +
          `<rect x="${p.x - 5}" y="${p.y - 14}" width="10" height="28" fill="#222"/>` +
          `<title>${esc(node.id)}</title></g>`
      );
    } else {
      const badges = node.refs.map(
        (ref, i) =>
          `<text x="${p.x}" y="${p.y + 24 + i * 13}" text-anchor="middle" font-size="10" fill="#7a4a00">↔ ${esc(ref)}</text>`
      );
      parts.push(
        `<g class="transition" data-id="${esc(node.id)}">` +
          `<rect x="${p.x - 62}" y="${p.y - 14}" width="124" height="28" fill="#fff" stroke="#333"/>` +
          `<text x="${p.x}" y="${p.y + 4}" text-anchor="middle" font-size="10">${esc(trim(node.label))}</text>` +
          badges.join("") +
          `<title>${esc(node.label)}${node.members.length ? "\nmembers: " + esc(node.members.join(", ")) : ""}</title></g>`
      );
    }
  }
  return parts.join("\n");
}

export function viewBox(positions: Map<string, Point>): string {
  if (positions.size === 0) return "0 0 400 200";
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const p of positions.values()) {
    minX = Math.min(minX, p.x);
    minY = Math.min(minY, p.y);
    maxX = Math.max(maxX, p.x);
    maxY = Math.max(maxY, p.y);
  }
  return `${minX - 90} ${minY - 50} ${maxX - minX + 180} ${maxY - minY + 120}`;
}
