// Thin typed client over the session endpoints. Every mutation returns the
// full refreshed state body, so callers never need a follow-up fetch.

import type { AbstractionLists, ModelPayload, RecordRef, SessionStateBody } from "./types.js";

export class StaleChoiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<never> {
  let detail = resp.statusText;
  try {
    const body = (await resp.json()) as { detail?: string; error?: string };
    detail = body.detail ?? body.error ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (resp.status === 409 || resp.status === 422) {
    throw new StaleChoiceError(detail, resp.status);
  }
  throw new ApiError(detail, resp.status);
}

export async function createSession(document: string, threshold?: number): Promise<SessionStateBody> {
  const url = threshold === undefined ? "/sessions" : `/sessions?threshold=${threshold}`;
  const resp = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: document,
  });
  if (!resp.ok) await parseError(resp);
  return (await resp.json()) as SessionStateBody;
}

export async function getModel(sid: string): Promise<ModelPayload> {
  const resp = await fetch(`/sessions/${sid}/model`);
  if (!resp.ok) await parseError(resp);
  return (await resp.json()) as ModelPayload;
}

export async function getAbstractions(sid: string): Promise<AbstractionLists> {
  const resp = await fetch(`/sessions/${sid}/abstractions`);
  if (!resp.ok) await parseError(resp);
  return (await resp.json()) as AbstractionLists;
}

export async function applyRecord(sid: string, ref: RecordRef): Promise<SessionStateBody> {
  const resp = await fetch(`/sessions/${sid}/apply`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ suffix: ref.suffix, target: ref.target, transitions: ref.transitions }),
  });
  if (!resp.ok) await parseError(resp);
  return (await resp.json()) as SessionStateBody;
}

export async function redoRecord(sid: string, oid: string): Promise<SessionStateBody> {
  const resp = await fetch(`/sessions/${sid}/redo`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ oid }),
  });
  if (!resp.ok) await parseError(resp);
  return (await resp.json()) as SessionStateBody;
}

export async function exportLog(sid: string): Promise<string> {
  const resp = await fetch(`/sessions/${sid}/export`);
  if (!resp.ok) await parseError(resp);
  return await resp.text();
}
