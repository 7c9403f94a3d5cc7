// Compare View: two completed runs side by side, sunburst over sunburst,
// with per-metric deltas between them.

import type { Actions, AppState } from "../store.js";
import type { RunSnapshot } from "../types.js";
import { renderSunburst } from "../sunburst.js";
import { el, metricCards, metricDeltas } from "./widgets.js";

function runPicker(
  side: "a" | "b",
  state: AppState,
  actions: Actions,
): HTMLElement {
  const chosen = side === "a" ? state.compareA : state.compareB;
  const done = state.runs.filter((r) => r.status === "done");
  return el(
    "select",
    {
      id: `compare-${side}`,
      "data-side": side,
      onchange: (ev: Event) => {
        const value = (ev.target as HTMLSelectElement).value;
        void actions.setCompare(side, value === "" ? null : value);
      },
    },
    el("option", { value: "", selected: chosen === null }, "pick a run"),
    ...done.map((r) =>
      el(
        "option",
        { value: r.run_id, selected: chosen === r.run_id },
        `${r.run_id} (k=${r.k}, ${r.variant})`,
      ),
    ),
  );
}

function sidePane(
  side: "a" | "b",
  snap: RunSnapshot | null,
  state: AppState,
  actions: Actions,
): HTMLElement {
  const body =
    snap && snap.sunburst && snap.metrics
      ? el(
          "div",
          { class: "compare-body", "data-run-id": snap.run_id },
          renderSunburst(snap.sunburst, 300),
          metricCards(snap.metrics),
        )
      : el("p", { class: "hint" }, "no run selected");
  return el(
    "div",
    { class: "compare-side", "data-side": side },
    runPicker(side, state, actions),
    body,
  );
}

export function renderCompare(state: AppState, actions: Actions): HTMLElement {
  const { a, b } = state.compareRuns;
  const deltas =
    a?.metrics && b?.metrics
      ? el(
          "div",
          { class: "compare-deltas" },
          el("h3", {}, "deltas (right minus left)"),
          metricDeltas(a.metrics, b.metrics),
        )
      : null;
  return el(
    "section",
    { class: "screen screen-compare" },
    el("h2", {}, "Compare runs"),
    el("p", { class: "hint" },
      "Pick two completed runs to weigh seed edits against each other."),
    el(
      "div",
      { class: "compare-row" },
      sidePane("a", a, state, actions),
      sidePane("b", b, state, actions),
    ),
    deltas,
    el("div", { class: "btn-row" },
      el("button", { onclick: () => actions.goto("dashboard") }, "Dashboard")),
  );
}
