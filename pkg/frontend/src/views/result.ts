// Result View: the completed run's sunburst beside the force-directed graph,
// with metric cards underneath. Both charts take membership verbatim from
// the run payload.

import type { Actions, AppState } from "../store.js";
import { renderSunburst } from "../sunburst.js";
import { renderForceGraph } from "../force.js";
import { clusterColor } from "../colors.js";
import { clusterLegend, el, metricCards } from "./widgets.js";

export function renderResult(state: AppState, actions: Actions): HTMLElement {
  const run = state.activeRun;
  if (!run || run.status !== "done" || !run.sunburst || !run.partition || !run.metrics) {
    return el(
      "section",
      { class: "screen screen-result" },
      el("h2", {}, "Result"),
      el("p", { class: "hint" }, "Pick a completed run on the dashboard to inspect it."),
      el("div", { class: "btn-row" },
        el("button", { onclick: () => actions.goto("dashboard") }, "Dashboard")),
    );
  }

  const charts = el("div", { class: "chart-row" });
  charts.appendChild(
    el("figure", { class: "chart" },
      renderSunburst(run.sunburst),
      el("figcaption", {}, "partition sunburst")),
  );
  if (state.graph && state.graph.graph_id === run.graph_id) {
    charts.appendChild(
      el("figure", { class: "chart" },
        renderForceGraph(state.graph, run.partition),
        el("figcaption", {}, "dependency graph, cross-cluster edges in red")),
    );
  } else {
    charts.appendChild(
      el("p", { class: "hint" }, "graph inventory not loaded; force view unavailable"),
    );
  }

  return el(
    "section",
    { class: "screen screen-result", "data-run-id": run.run_id },
    el("h2", {}, `Result ${run.run_id}`),
    el("p", { class: "hint" },
      `k=${run.k}, variant ${run.variant}, rng seed ${run.config.rng_seed}`),
    clusterLegend(run.k, clusterColor),
    charts,
    metricCards(run.metrics),
    el(
      "div",
      { class: "btn-row" },
      el("button", { onclick: () => actions.goto("compare") }, "Compare runs"),
      el("button", { onclick: () => actions.goto("dashboard") }, "Dashboard"),
    ),
  );
}
