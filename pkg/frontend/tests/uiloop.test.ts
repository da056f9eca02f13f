// The analyst's loop against recorded real-server exchanges: upload, click
// the sequence aggregation, click redo. Two mutations round-trip the model,
// the metrics banner always mirrors the payload, and the exported journey
// re-imports to an identical model.

import { beforeEach, expect, test } from "vitest";

import { applyRecord, createSession, exportLog, getAbstractions, redoRecord, StaleChoiceError } from "../src/api.js";
import { layeredLayout, LayoutCache } from "../src/layout.js";
import { renderSvg } from "../src/render.js";
import { fromServer, initialState, metricsBanner, withLists, withNotice } from "../src/state.js";
import type { SessionStateBody } from "../src/types.js";
import { canonicalModel, installRecordedFetch, loadExchanges } from "./helpers.js";

const exchanges = loadExchanges();
const fixtureDocument = "{}"; // body content is not replayed; the recording carries the responses

let counter: { requests: number };

beforeEach(() => {
  counter = installRecordedFetch(exchanges);
});

test("upload, apply sequence, redo: two mutations, graph isomorphic to start", async () => {
  let state = initialState();
  const cache: LayoutCache = new Map();

  const created = await createSession(fixtureDocument);
  state = fromServer(state, created, false);
  expect(state.sid).toBeTruthy();
  expect(metricsBanner(state)).toBe("27 elements · 26 arcs · 1 object type");
  expect(metricsBanner(state)).toContain(String(state.model!.metrics.elements));
  const initialCanon = canonicalModel(state.model);
  const initialSvg = renderSvg(state.model!, layeredLayout(state.model!, cache));
  expect(initialSvg).toContain("click open account");

  // click the Sequence entry
  const seqRef = state.available.find((r) => r.suffix === "seq" && r.transitions.length === 4)!;
  expect(seqRef.label).toContain("Sequence control-flow structure");
  state = fromServer(state, await applyRecord(state.sid!, seqRef), true);
  expect(state.mutations).toBe(1);
  expect(metricsBanner(state)).toBe("21 elements · 20 arcs · 1 object type");
  const appliedSvg = renderSvg(state.model!, layeredLayout(state.model!, cache));
  expect(appliedSvg).toContain("→(?click open account, ");
  expect(canonicalModel(state.model)).not.toBe(initialCanon);

  // click redo on the entry the apply produced
  const oid = state.history[state.history.length - 1].oid!;
  state = fromServer(state, await redoRecord(state.sid!, oid), true);
  expect(state.mutations).toBe(2);
  expect(canonicalModel(state.model)).toBe(initialCanon); // isomorphic to the initial graph
  expect(metricsBanner(state)).toBe("27 elements · 26 arcs · 1 object type");

  // a second click on the now-gone entry is a stale choice: notice + refetch
  let stale: unknown = null;
  try {
    await redoRecord(state.sid!, oid);
  } catch (error) {
    stale = error;
  }
  expect(stale).toBeInstanceOf(StaleChoiceError);
  state = withNotice(state, `that choice is stale: ${(stale as Error).message}`);
  state = withLists(state, await getAbstractions(state.sid!));
  expect(state.notice).toContain("stale");
  expect(state.redoable.map((r) => r.oid)).not.toContain(oid);
  expect(canonicalModel(state.model)).toBe(initialCanon); // view state untouched

  // the exported journey re-imports to an identical model
  const exported = await exportLog(state.sid!);
  const reimported: SessionStateBody = await createSession(exported);
  expect(canonicalModel(reimported.model)).toBe(canonicalModel(state.model));
  expect(counter.requests).toBe(exchanges.length);
});
