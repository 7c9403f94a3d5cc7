// Sunburst rendering for the served partition tree. Layout and membership
// extraction are pure functions over the tree exactly as the service emitted
// it; nothing here re-derives cluster assignments.

import type { SunburstNode } from "./types.js";
import { clusterColor } from "./colors.js";

export interface SunburstArc {
  name: string;
  depth: 1 | 2;
  cluster: number;
  a0: number;
  a1: number;
  value: number;
}

export interface SunburstLayout {
  root: string;
  total: number;
  arcs: SunburstArc[];
}

const TAU = Math.PI * 2;

function clusterIndex(name: string, fallback: number): number {
  const m = /(\d+)$/.exec(name);
  return m ? parseInt(m[1], 10) : fallback;
}

function leafValue(leaf: SunburstNode): number {
  return leaf.value ?? 1;
}

/** Two concentric rings: clusters inside, member leaves outside. Angles are
 *  proportional to leaf counts; arc order follows the served tree so the
 *  chart is stable across rerenders. Empty clusters keep a zero-width arc,
 *  so the cluster ring always carries exactly K arcs. */
export function layoutSunburst(tree: SunburstNode): SunburstLayout {
  const clusters = tree.children ?? [];
  const total = clusters.reduce(
    (n, c) => n + (c.children ?? []).reduce((m, leaf) => m + leafValue(leaf), 0),
    0,
  );
  const arcs: SunburstArc[] = [];
  let angle = 0;
  clusters.forEach((clusterNode, i) => {
    const ci = clusterIndex(clusterNode.name, i);
    const members = clusterNode.children ?? [];
    const weight = members.reduce((m, leaf) => m + leafValue(leaf), 0);
    const span = total > 0 ? (weight / total) * TAU : 0;
    arcs.push({
      name: clusterNode.name,
      depth: 1,
      cluster: ci,
      a0: angle,
      a1: angle + span,
      value: weight,
    });
    let leafAngle = angle;
    for (const leaf of members) {
      const leafSpan = total > 0 ? (leafValue(leaf) / total) * TAU : 0;
      arcs.push({
        name: leaf.name,
        depth: 2,
        cluster: ci,
        a0: leafAngle,
        a1: leafAngle + leafSpan,
        value: leafValue(leaf),
      });
      leafAngle += leafSpan;
    }
    angle += span;
  });
  return { root: tree.name, total, arcs };
}

/** Leaf name back to node id: resources carry a "-res" label suffix that is
 *  not part of the id. Strip it only when the stripped form names a known
 *  resource, so a program whose id happens to end in "-res" survives. */
export function leafToNodeId(name: string, resourceIds: Set<string>): string {
  if (name.endsWith("-res")) {
    const stripped = name.slice(0, -4);
    if (resourceIds.has(stripped)) return stripped;
  }
  return name;
}

/** Cluster membership exactly as encoded in the served tree. */
export function leafMembership(
  tree: SunburstNode,
  resourceIds: Set<string>,
): Record<string, number> {
  const out: Record<string, number> = {};
  (tree.children ?? []).forEach((clusterNode, i) => {
    const ci = clusterIndex(clusterNode.name, i);
    for (const leaf of clusterNode.children ?? []) {
      out[leafToNodeId(leaf.name, resourceIds)] = ci;
    }
  });
  return out;
}

function polar(cx: number, cy: number, r: number, a: number): [number, number] {
  // angle 0 at 12 o'clock, increasing clockwise
  return [cx + r * Math.sin(a), cy - r * Math.cos(a)];
}

export function arcPath(
  cx: number,
  cy: number,
  r0: number,
  r1: number,
  a0: number,
  a1: number,
): string {
  const end = Math.min(a1, a0 + TAU - 1e-6);
  const [ox0, oy0] = polar(cx, cy, r1, a0);
  const [ox1, oy1] = polar(cx, cy, r1, end);
  const [ix0, iy0] = polar(cx, cy, r0, end);
  const [ix1, iy1] = polar(cx, cy, r0, a0);
  const large = end - a0 > Math.PI ? 1 : 0;
  return [
    `M ${ox0.toFixed(2)} ${oy0.toFixed(2)}`,
    `A ${r1} ${r1} 0 ${large} 1 ${ox1.toFixed(2)} ${oy1.toFixed(2)}`,
    `L ${ix0.toFixed(2)} ${iy0.toFixed(2)}`,
    `A ${r0} ${r0} 0 ${large} 0 ${ix1.toFixed(2)} ${iy1.toFixed(2)}`,
    "Z",
  ].join(" ");
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

/** Render the tree to a standalone SVG. Every arc element carries data-name,
 *  data-depth and data-cluster, so what is on screen can be read back and
 *  checked against the run's partition without touching chart internals. */
export function renderSunburst(tree: SunburstNode, size = 360): SVGSVGElement {
  const layout = layoutSunburst(tree);
  const cx = size / 2;
  const cy = size / 2;
  const rings: Record<1 | 2, [number, number]> = {
    1: [size * 0.13, size * 0.27],
    2: [size * 0.28, size * 0.46],
  };
  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    class: "sunburst",
    role: "img",
  });
  svg.appendChild(
    svgEl("circle", { cx, cy, r: size * 0.11, class: "sunburst-core" }),
  );
  const core = svgEl("text", {
    x: cx,
    y: cy,
    "text-anchor": "middle",
    "dominant-baseline": "middle",
    class: "sunburst-root",
  });
  core.textContent = layout.root;
  svg.appendChild(core);

  for (const arc of layout.arcs) {
    if (arc.a1 - arc.a0 <= 0) continue;
    const [r0, r1] = rings[arc.depth];
    const path = svgEl("path", {
      d: arcPath(cx, cy, r0, r1, arc.a0, arc.a1),
      fill: clusterColor(arc.cluster, arc.depth === 1 ? 1 : 0.72),
      class: `sunburst-arc depth-${arc.depth}`,
      "data-name": arc.name,
      "data-depth": arc.depth,
      "data-cluster": arc.cluster,
    });
    const tip = svgEl("title");
    tip.textContent =
      arc.depth === 1 ? `${arc.name} (${arc.value} members)` : arc.name;
    path.appendChild(tip);
    svg.appendChild(path);

    if (arc.depth === 1 && arc.a1 - arc.a0 > 0.35) {
      const mid = (arc.a0 + arc.a1) / 2;
      const [tx, ty] = polar(cx, cy, (r0 + r1) / 2, mid);
      const label = svgEl("text", {
        x: tx.toFixed(1),
        y: ty.toFixed(1),
        "text-anchor": "middle",
        "dominant-baseline": "middle",
        class: "sunburst-label",
      });
      label.textContent = arc.name.replace(/^cluster-/, "c");
      svg.appendChild(label);
    }
  }
  return svg;
}
