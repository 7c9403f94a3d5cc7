// Seed Editor screen: K buckets of mandated nodes over the graph's node
// list. Nodes move by drag and drop or by select-then-assign. The launch
// button stays disabled while the draft violates any seed invariant.

import type { Actions, AppState } from "../store.js";
import type { GraphNode } from "../types.js";
import { bucketOf, checkDraft, seedCount } from "../seeds.js";
import { clusterColor } from "../colors.js";
import { el } from "./widgets.js";

function nodeRow(nd: GraphNode, state: AppState, actions: Actions): HTMLElement {
  const inBucket = bucketOf(state.draft, nd.id);
  const row = el(
    "li",
    {
      class:
        "node-row" +
        (state.selectedNode === nd.id ? " selected" : "") +
        (inBucket !== null ? " seeded" : ""),
      draggable: true,
      "data-id": nd.id,
      onclick: () => actions.selectNode(state.selectedNode === nd.id ? null : nd.id),
    },
    el("span", { class: `badge badge-${nd.kind.toLowerCase()}` }, nd.kind === "Program" ? "P" : "R"),
    el("span", { class: "node-id" }, nd.id),
    inBucket !== null
      ? el("span", {
          class: "bucket-dot",
          style: `background:${clusterColor(inBucket)}`,
          title: `bucket ${inBucket}`,
        })
      : null,
  );
  row.addEventListener("dragstart", (ev) => {
    ev.dataTransfer?.setData("text/plain", nd.id);
  });
  return row;
}

function bucketPanel(index: number, state: AppState, actions: Actions): HTMLElement {
  const ids = state.draft.buckets[index] ?? [];
  const chips = ids.map((id) =>
    el(
      "span",
      { class: "chip", "data-id": id },
      id,
      el(
        "button",
        {
          class: "chip-x",
          title: `remove ${id}`,
          onclick: (ev: Event) => {
            ev.stopPropagation();
            actions.unassignNode(id);
          },
        },
        "×",
      ),
    ),
  );
  const panel = el(
    "div",
    {
      class: "bucket",
      "data-bucket": index,
      style: `border-top: 3px solid ${clusterColor(index)}`,
    },
    el(
      "div",
      { class: "bucket-head" },
      el("strong", {}, `bucket ${index}`),
      el(
        "button",
        {
          class: "mini",
          disabled: state.selectedNode === null,
          title: "assign the selected node here",
          onclick: () => {
            if (state.selectedNode !== null) {
              actions.assignNode(index, state.selectedNode);
            }
          },
        },
        "+ assign selected",
      ),
    ),
    el("div", { class: "chip-row" }, ...(chips.length ? chips : [el("span", { class: "hint" }, "drop nodes here")])),
  );
  panel.addEventListener("dragover", (ev) => ev.preventDefault());
  panel.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const id = ev.dataTransfer?.getData("text/plain");
    if (id) actions.assignNode(index, id);
  });
  return panel;
}

export function renderSeedEditor(state: AppState, actions: Actions): HTMLElement {
  if (!state.graph) {
    return el(
      "section",
      { class: "screen screen-seeds" },
      el("h2", {}, "Seed editor"),
      el("p", { class: "hint" }, "Upload a graph first."),
    );
  }
  const graphIds = new Set(state.graph.nodes.map((nd) => nd.id));
  const check = checkDraft(state.draft, graphIds);
  const query = state.search.trim().toLowerCase();
  const visible = state.graph.nodes.filter(
    (nd) => query === "" || nd.id.toLowerCase().includes(query),
  );

  const searchBox = el("input", {
    type: "search",
    id: "node-search",
    placeholder: "filter nodes",
    value: state.search,
    oninput: (ev: Event) => actions.setSearch((ev.target as HTMLInputElement).value),
  });

  const kInput = el("input", {
    type: "number",
    id: "k-input",
    min: 1,
    value: state.settings.k,
    onchange: (ev: Event) => {
      const k = parseInt((ev.target as HTMLInputElement).value, 10);
      if (Number.isFinite(k) && k >= 1) actions.setK(k);
    },
  });

  const problems = check.problems.map((p) => el("li", { class: "problem" }, p));
  const warnings = check.warnings.map((w) => el("li", { class: "warning" }, w));

  return el(
    "section",
    { class: "screen screen-seeds" },
    el("h2", {}, "Seed editor"),
    el(
      "div",
      { class: "seed-controls" },
      el("label", { for: "k-input" }, "clusters K"),
      kInput,
      el("span", { class: "hint", "data-role": "seed-count" }, `${seedCount(state.draft)} seeded`),
    ),
    el(
      "div",
      { class: "seed-layout" },
      el(
        "div",
        { class: "node-list-pane" },
        searchBox,
        el(
          "ul",
          { class: "node-list" },
          ...visible.map((nd) => nodeRow(nd, state, actions)),
        ),
      ),
      el(
        "div",
        { class: "bucket-pane" },
        ...Array.from({ length: state.draft.k }, (_, i) => bucketPanel(i, state, actions)),
      ),
    ),
    check.problems.length || check.warnings.length
      ? el("ul", { class: "check-list" }, ...problems, ...warnings)
      : null,
    el(
      "div",
      { class: "btn-row" },
      el(
        "button",
        {
          class: "primary",
          id: "launch-btn",
          disabled: !check.ok,
          onclick: () => void actions.launch(),
        },
        "Launch run",
      ),
      el("button", { onclick: () => actions.goto("dashboard") }, "Dashboard"),
    ),
  );
}
