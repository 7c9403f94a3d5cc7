// Graph Upload screen: paste or pick a facts JSON file, post it, and show
// the resulting node/edge inventory.

import type { Actions, AppState } from "../store.js";
import { el } from "./widgets.js";

function inventoryCard(state: AppState, actions: Actions): HTMLElement {
  const g = state.graph;
  if (!g) return el("p", { class: "hint" }, "No graph uploaded yet.");
  const pruned =
    g.pruned_programs.length > 0
      ? el(
          "p",
          { class: "hint", "data-role": "pruned" },
          `pruned unreachable programs: ${g.pruned_programs.join(", ")}`,
        )
      : null;
  return el(
    "div",
    { class: "inventory", "data-graph-id": g.graph_id },
    el("h3", {}, `graph ${g.graph_id}`),
    el(
      "div",
      { class: "count-row" },
      el("span", { class: "count" }, `${g.counts.programs} programs`),
      el("span", { class: "count" }, `${g.counts.resources} resources`),
      el("span", { class: "count" }, `${g.counts.edges} edges`),
    ),
    pruned,
    el(
      "div",
      { class: "btn-row" },
      el("button", { class: "primary", onclick: () => actions.goto("seeds") }, "Edit seeds"),
      el("button", { onclick: () => actions.goto("dashboard") }, "Go to dashboard"),
    ),
  );
}

export function renderUpload(state: AppState, actions: Actions): HTMLElement {
  const fileInput = el("input", {
    type: "file",
    accept: ".json,application/json",
    id: "facts-file",
  });
  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      actions.setFactsText(text);
      void actions.uploadFacts();
    });
  });

  const textarea = el(
    "textarea",
    {
      id: "facts-text",
      rows: 10,
      placeholder: '{"programs": {...}, "resources": [...], "entrypoints": {...}}',
      oninput: (ev: Event) =>
        actions.setFactsText((ev.target as HTMLTextAreaElement).value),
    },
    state.factsText,
  );

  return el(
    "section",
    { class: "screen screen-upload" },
    el("h2", {}, "Upload facts"),
    el(
      "p",
      { class: "hint" },
      "Paste the application's static facts JSON or pick a file. The service replies with the graph it builds.",
    ),
    textarea,
    el(
      "div",
      { class: "btn-row" },
      el(
        "button",
        {
          class: "primary",
          id: "upload-btn",
          disabled: state.factsText.trim() === "",
          onclick: () => void actions.uploadFacts(),
        },
        "Upload",
      ),
      fileInput,
    ),
    inventoryCard(state, actions),
  );
}
