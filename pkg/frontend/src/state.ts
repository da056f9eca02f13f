// View state and its transitions. The only way state changes is by replacing
// it with a server response (no optimistic updates): every entry here mirrors
// the latest 2xx body, and the metrics banner is always the payload's metrics.

import type { ModelPayload, RecordRef, SessionStateBody } from "./types.js";

export interface ViewState {
  sid: string | null;
  threshold: number | null;
  model: ModelPayload | null;
  available: RecordRef[];
  redoable: RecordRef[];
  history: RecordRef[];
  warnings: string[];
  notice: string | null;
  pending: boolean;
  mutations: number; // server mutations performed in this session
}

export function initialState(): ViewState {
  return {
    sid: null,
    threshold: null,
    model: null,
    available: [],
    redoable: [],
    history: [],
    warnings: [],
    notice: null,
    pending: false,
    mutations: 0,
  };
}

export function fromServer(state: ViewState, body: SessionStateBody, mutated: boolean): ViewState {
  return {
    ...state,
    sid: body.session.sid,
    threshold: body.session.threshold,
    model: body.model,
    available: body.available,
    redoable: body.redoable,
    history: body.history,
    warnings: body.warnings ?? state.warnings,
    notice: null,
    pending: false,
    mutations: state.mutations + (mutated ? 1 : 0),
  };
}

export function withLists(state: ViewState, lists: { available: RecordRef[]; redoable: RecordRef[]; history: RecordRef[] }): ViewState {
  return { ...state, ...lists, pending: false };
}

export function withNotice(state: ViewState, notice: string): ViewState {
  return { ...state, notice, pending: false };
}

export function withPending(state: ViewState): ViewState {
  return { ...state, pending: true };
}

export function metricsBanner(state: ViewState): string {
  if (!state.model) return "no model";
  const m = state.model.metrics;
  return `${m.elements} elements · ${m.arcs} arcs · ${m.object_types} object type${m.object_types === 1 ? "" : "s"}`;
}
