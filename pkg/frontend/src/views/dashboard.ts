// Run Dashboard: launch settings, the run list, and the live loss curve of
// the run being watched. Status refreshes by polling once a second.

import type { Actions, AppState } from "../store.js";
import type { RunBrief } from "../types.js";
import { el, lossCurve, statusPill } from "./widgets.js";

function runRow(run: RunBrief, state: AppState, actions: Actions): HTMLElement {
  const when = new Date(run.created_at * 1000).toLocaleTimeString();
  return el(
    "tr",
    {
      class: "run-row" + (state.activeRunId === run.run_id ? " active" : ""),
      "data-run-id": run.run_id,
      onclick: () => void actions.openRun(run.run_id),
    },
    el("td", { class: "mono" }, run.run_id),
    el("td", {}, statusPill(run.status)),
    el("td", {}, `k=${run.k}`),
    el("td", {}, run.variant),
    el("td", {}, when),
  );
}

export function renderDashboard(state: AppState, actions: Actions): HTMLElement {
  const active = state.activeRun;
  const settings = state.settings;

  const variantSel = el(
    "select",
    {
      id: "variant-select",
      onchange: (ev: Event) => actions.setVariant((ev.target as HTMLSelectElement).value),
    },
    ...["chgnn", "chgnn-el", "hetgcnconv"].map((v) =>
      el("option", { value: v, selected: settings.variant === v }, v),
    ),
  );
  const rngInput = el("input", {
    type: "number",
    id: "rng-input",
    value: settings.rngSeed,
    onchange: (ev: Event) => {
      const v = parseInt((ev.target as HTMLInputElement).value, 10);
      if (Number.isFinite(v)) actions.setRngSeed(v);
    },
  });
  const actSel = el(
    "select",
    {
      id: "activation-select",
      onchange: (ev: Event) => actions.setActivation((ev.target as HTMLSelectElement).value),
    },
    ...["relu", "tanh", "sigmoid", "identity"].map((a) =>
      el("option", { value: a, selected: settings.activation === a }, a),
    ),
  );

  const watch = active
    ? el(
        "div",
        { class: "watch-pane", "data-run-id": active.run_id },
        el(
          "div",
          { class: "watch-head" },
          el("span", { class: "mono" }, active.run_id),
          statusPill(active.status),
          el("span", { class: "hint" }, `${active.loss_history.length} epochs logged`),
        ),
        lossCurve(active.loss_history, active.config ?? null),
        active.status === "failed" && active.error
          ? el("p", { class: "problem", "data-role": "run-error" },
              `${active.error.code}: ${active.error.message}`)
          : null,
        active.status === "done"
          ? el(
              "div",
              { class: "btn-row" },
              el("button", { class: "primary", onclick: () => actions.goto("result") }, "View result"),
            )
          : null,
      )
    : el("p", { class: "hint" }, "No run selected. Launch one or pick from the list.");

  return el(
    "section",
    { class: "screen screen-dashboard" },
    el("h2", {}, "Run dashboard"),
    el(
      "div",
      { class: "seed-controls" },
      el("label", { for: "variant-select" }, "variant"),
      variantSel,
      el("label", { for: "rng-input" }, "rng seed"),
      rngInput,
      el("label", { for: "activation-select" }, "activation"),
      actSel,
      el(
        "button",
        {
          class: "primary",
          id: "dashboard-launch-btn",
          disabled: state.graph === null,
          onclick: () => void actions.launch(),
        },
        "Launch run",
      ),
    ),
    watch,
    el("h3", {}, "Runs"),
    el(
      "table",
      { class: "run-table" },
      el(
        "thead",
        {},
        el(
          "tr",
          {},
          el("th", {}, "run"),
          el("th", {}, "status"),
          el("th", {}, "k"),
          el("th", {}, "variant"),
          el("th", {}, "started"),
        ),
      ),
      el("tbody", {}, ...state.runs.map((r) => runRow(r, state, actions))),
    ),
  );
}
