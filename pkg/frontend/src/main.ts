// Wires the session loop to the page: upload, apply/redo lists, history
// timeline, metrics banner, journey download, pan/zoom. At most one mutation
// is in flight; a stale choice (409/422) shows a notice and refetches lists.

import { applyRecord, createSession, exportLog, getAbstractions, redoRecord, StaleChoiceError } from "./api.js";
import { layeredLayout, LayoutCache } from "./layout.js";
import { renderSvg, viewBox } from "./render.js";
import { fromServer, initialState, metricsBanner, ViewState, withLists, withNotice, withPending } from "./state.js";
import type { RecordRef, SessionStateBody } from "./types.js";

let state: ViewState = initialState();
const layoutCache: LayoutCache = new Map();
const view = { zoom: 1, tx: 0, ty: 0 };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function recordText(ref: RecordRef): string {
  return ref.label ?? `${ref.suffix} on ${ref.target}`;
}

function redraw(): void {
  el<HTMLElement>("metrics").textContent = metricsBanner(state);
  el<HTMLElement>("notice").textContent = state.notice ?? "";
  el<HTMLElement>("warnings").textContent = state.warnings.join(" — ");

  const availableList = el<HTMLUListElement>("available");
  availableList.replaceChildren(
    ...state.available.map((ref) => {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.textContent = recordText(ref);
      button.disabled = state.pending || state.sid === null;
      button.addEventListener("click", () => void doApply(ref));
      item.append(button);
      return item;
    })
  );

  const redoList = el<HTMLUListElement>("redoable");
  redoList.replaceChildren(
    ...state.redoable.map((ref) => {
      const item = document.createElement("li");
      const button = document.createElement("button");
      button.textContent = `${recordText(ref)}${ref.rules ? ` [${ref.rules.join(", ")}]` : ""}`;
      button.disabled = state.pending || state.sid === null || !ref.oid;
      button.addEventListener("click", () => void doRedo(ref.oid!));
      item.append(button);
      return item;
    })
  );

  const timeline = el<HTMLOListElement>("history");
  timeline.replaceChildren(
    ...state.history.map((ref) => {
      const item = document.createElement("li");
      item.textContent = `${ref.oid ?? "?"} — ${recordText(ref)}`;
      return item;
    })
  );

  const svg = el<HTMLElement>("model");
  if (state.model) {
    const positions = layeredLayout(state.model, layoutCache);
    svg.setAttribute("viewBox", viewBox(positions));
    svg.innerHTML = `<g id="pane" transform="translate(${view.tx},${view.ty}) scale(${view.zoom})">${renderSvg(
      state.model,
      positions
    )}</g>`;
  } else {
    svg.innerHTML = "";
  }
  el<HTMLButtonElement>("download").disabled = state.sid === null;
}

function applyServerBody(body: SessionStateBody, mutated: boolean): void {
  state = fromServer(state, body, mutated);
  redraw();
}

async function doApply(ref: RecordRef): Promise<void> {
  const sid = state.sid;
  if (state.pending || sid === null) return;
  state = withPending(state);
  redraw();
  try {
    applyServerBody(await applyRecord(sid, ref), true);
  } catch (error) {
    await handleMutationError(error, sid);
  }
}

async function doRedo(oid: string): Promise<void> {
  const sid = state.sid;
  if (state.pending || sid === null) return;
  state = withPending(state);
  redraw();
  try {
    applyServerBody(await redoRecord(sid, oid), true);
  } catch (error) {
    await handleMutationError(error, sid);
  }
}

async function handleMutationError(error: unknown, sid: string): Promise<void> {
  if (error instanceof StaleChoiceError) {
    // non-blocking: tell the analyst and refresh the lists from the server
    state = withNotice(state, `that choice is stale: ${error.message}`);
    state = withLists(state, await getAbstractions(sid));
    redraw();
    return;
  }
  state = withNotice(state, String(error));
  redraw();
}

async function doUpload(file: File): Promise<void> {
  const text = await file.text();
  const thresholdRaw = el<HTMLInputElement>("threshold").value;
  const threshold = thresholdRaw === "" ? undefined : Number(thresholdRaw);
  state = withPending(state);
  redraw();
  try {
    layoutCache.clear();
    applyServerBody(await createSession(text, threshold), false);
  } catch (error) {
    state = withNotice(state, String(error));
    redraw();
  }
}

async function doDownload(): Promise<void> {
  if (state.sid === null) return;
  const doc = await exportLog(state.sid);
  const blob = new Blob([doc], { type: "application/json" });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = "journey.json";
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

function wirePanZoom(svg: HTMLElement): void {
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    view.zoom = Math.min(8, Math.max(0.1, view.zoom * factor));
    redraw();
  });
  svg.addEventListener("mousedown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  window.addEventListener("mouseup", () => (dragging = false));
  window.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    view.tx += event.clientX - lastX;
    view.ty += event.clientY - lastY;
    lastX = event.clientX;
    lastY = event.clientY;
    redraw();
  });
}

export function bootstrap(): void {
  el<HTMLInputElement>("upload").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.files && input.files[0]) void doUpload(input.files[0]);
  });
  el<HTMLButtonElement>("download").addEventListener("click", () => void doDownload());
  wirePanZoom(el<HTMLElement>("model"));
  redraw();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  bootstrap();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}
