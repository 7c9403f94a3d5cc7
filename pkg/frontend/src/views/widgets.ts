// Small shared DOM pieces: element builder, metric cards, the loss curve,
// and status pills.

import type { LossPoint, Metrics, RunStatus, TrainConfig } from "../types.js";
import { svgEl } from "../sunburst.js";

type Attrs = Record<string, string | boolean | number | EventListener>;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  ...children: (Node | string | null)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key.startsWith("on") && typeof value === "function") {
      node.addEventListener(key.slice(2), value as EventListener);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
      else node.removeAttribute(key);
    } else {
      node.setAttribute(key, String(value));
    }
  }
  for (const child of children) {
    if (child === null) continue;
    node.appendChild(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

const METRIC_LABELS: Record<keyof Metrics, string> = {
  mod: "Modularity",
  smod: "Structural modularity",
  ifn: "Interface number",
  ned: "Non-extreme distribution",
};

export function metricCards(metrics: Metrics): HTMLElement {
  const cards = (Object.keys(METRIC_LABELS) as (keyof Metrics)[]).map((key) =>
    el(
      "div",
      { class: "metric-card", "data-metric": key },
      el("div", { class: "metric-value" }, formatMetric(metrics[key])),
      el("div", { class: "metric-name" }, METRIC_LABELS[key]),
    ),
  );
  return el("div", { class: "metric-row" }, ...cards);
}

export function metricDeltas(a: Metrics, b: Metrics): HTMLElement {
  const cells = (Object.keys(METRIC_LABELS) as (keyof Metrics)[]).map((key) => {
    const d = b[key] - a[key];
    const cls = d > 0 ? "delta up" : d < 0 ? "delta down" : "delta flat";
    return el(
      "div",
      { class: "metric-card", "data-delta": key },
      el("div", { class: `metric-value ${cls}` }, `${d >= 0 ? "+" : ""}${formatMetric(d)}`),
      el("div", { class: "metric-name" }, `Δ ${METRIC_LABELS[key]}`),
    );
  });
  return el("div", { class: "metric-row deltas" }, ...cells);
}

export function formatMetric(v: number): string {
  if (!Number.isFinite(v)) return String(v);
  return Math.abs(v) >= 100 ? v.toFixed(1) : v.toFixed(4);
}

export function statusPill(status: RunStatus): HTMLElement {
  return el("span", { class: `pill pill-${status}` }, status);
}

/** Total-loss curve over epochs. The y axis is log-scaled when the series
 *  allows it, since pretraining spans orders of magnitude. A dashed marker
 *  separates the pretrain and joint phases when the config is known. */
export function lossCurve(
  history: LossPoint[],
  config: TrainConfig | null,
  width = 520,
  height = 180,
): SVGSVGElement {
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "loss-curve",
    role: "img",
    "data-points": history.length,
  });
  const padL = 46;
  const padB = 22;
  const padT = 10;
  const plotW = width - padL - 8;
  const plotH = height - padT - padB;

  svg.appendChild(
    svgEl("rect", { x: padL, y: padT, width: plotW, height: plotH, class: "plot-bg" }),
  );
  if (history.length === 0) {
    const empty = svgEl("text", {
      x: padL + plotW / 2,
      y: padT + plotH / 2,
      "text-anchor": "middle",
      class: "plot-empty",
    });
    empty.textContent = "waiting for first epoch";
    svg.appendChild(empty);
    return svg;
  }

  const totals = history.map((p) => p.total);
  const useLog = totals.every((t) => t > 0);
  const ys = useLog ? totals.map(Math.log10) : totals;
  let lo = Math.min(...ys);
  let hi = Math.max(...ys);
  if (hi - lo < 1e-9) {
    hi += 0.5;
    lo -= 0.5;
  }
  const denomX = Math.max(history.length - 1, 1);
  const toX = (i: number) => padL + (i / denomX) * plotW;
  const toY = (v: number) => padT + (1 - (v - lo) / (hi - lo)) * plotH;

  const epochs = config ? config.pretrain_epochs + config.joint_epochs : history.length;
  if (config && history.length > 0 && epochs > 1) {
    const split = padL + (Math.min(config.pretrain_epochs, epochs) - 1) / (epochs - 1) * plotW;
    svg.appendChild(
      svgEl("line", {
        x1: split, y1: padT, x2: split, y2: padT + plotH,
        class: "phase-split",
        "stroke-dasharray": "4 3",
      }),
    );
  }

  const pts = ys.map((v, i) => `${toX(i).toFixed(1)},${toY(v).toFixed(1)}`).join(" ");
  svg.appendChild(svgEl("polyline", { points: pts, class: "loss-line", fill: "none" }));

  const axisLo = svgEl("text", { x: 4, y: toY(lo).toFixed(1), class: "axis-label" });
  axisLo.textContent = useLog ? `1e${lo.toFixed(1)}` : lo.toFixed(2);
  const axisHi = svgEl("text", { x: 4, y: (padT + 10).toFixed(1), class: "axis-label" });
  axisHi.textContent = useLog ? `1e${hi.toFixed(1)}` : hi.toFixed(2);
  const axisX = svgEl("text", {
    x: width - 10,
    y: height - 6,
    "text-anchor": "end",
    class: "axis-label",
  });
  axisX.textContent = `epoch ${history.length}`;
  svg.appendChild(axisLo);
  svg.appendChild(axisHi);
  svg.appendChild(axisX);
  return svg;
}

export function clusterLegend(k: number, colorOf: (c: number) => string): HTMLElement {
  const chips = Array.from({ length: k }, (_, c) =>
    el(
      "span",
      { class: "legend-chip" },
      el("span", { class: "swatch", style: `background:${colorOf(c)}` }),
      `cluster-${c}`,
    ),
  );
  return el("div", { class: "legend" }, ...chips);
}
