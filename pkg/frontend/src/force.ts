// Force-directed view of the partitioned graph. The layout is a seeded
// Fruchterman-Reingold pass with a light pull toward per-cluster anchors,
// so the same run renders identically on every visit. Cluster colors come
// from the run's partition map; the layout never reassigns membership.

import type { GraphEdge, GraphInventory } from "./types.js";
import { CROSS_EDGE_COLOR, INTRA_EDGE_COLOR, clusterColor } from "./colors.js";
import { svgEl } from "./sunburst.js";

export interface Point {
  x: number;
  y: number;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface ForceOptions {
  iterations?: number;
  seed?: number;
  pad?: number;
}

export function forceLayout(
  ids: string[],
  edges: GraphEdge[],
  clusters: Record<string, number>,
  width: number,
  height: number,
  opts: ForceOptions = {},
): Map<string, Point> {
  const { iterations = 200, seed = 7, pad = 16 } = opts;
  const n = ids.length;
  const pos = new Map<string, Point>();
  if (n === 0) return pos;

  const rand = mulberry32(seed);
  const k = Math.max(1, Math.ceil(Math.max(...ids.map((id) => clusters[id] ?? 0)) + 1));
  const cx = width / 2;
  const cy = height / 2;
  const anchorR = 0.32 * Math.min(width, height);
  const anchors: Point[] = Array.from({ length: k }, (_, c) => ({
    x: cx + anchorR * Math.sin((2 * Math.PI * c) / k),
    y: cy - anchorR * Math.cos((2 * Math.PI * c) / k),
  }));

  for (const id of ids) {
    const a = anchors[clusters[id] ?? 0] ?? { x: cx, y: cy };
    pos.set(id, {
      x: a.x + (rand() - 0.5) * 60,
      y: a.y + (rand() - 0.5) * 60,
    });
  }

  const ideal = Math.sqrt((width * height) / n) * 0.7;
  const index = new Map(ids.map((id, i) => [id, i]));
  const px = ids.map((id) => pos.get(id)!.x);
  const py = ids.map((id) => pos.get(id)!.y);
  const dx = new Float64Array(n);
  const dy = new Float64Array(n);

  let temp = Math.min(width, height) / 8;
  const cool = temp / (iterations + 1);

  for (let it = 0; it < iterations; it++) {
    dx.fill(0);
    dy.fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let vx = px[i] - px[j];
        let vy = py[i] - py[j];
        let d2 = vx * vx + vy * vy;
        if (d2 < 1e-4) {
          vx = rand() - 0.5;
          vy = rand() - 0.5;
          d2 = vx * vx + vy * vy;
        }
        const d = Math.sqrt(d2);
        const rep = (ideal * ideal) / d;
        dx[i] += (vx / d) * rep;
        dy[i] += (vy / d) * rep;
        dx[j] -= (vx / d) * rep;
        dy[j] -= (vy / d) * rep;
      }
    }
    for (const e of edges) {
      const i = index.get(e.source);
      const j = index.get(e.target);
      if (i === undefined || j === undefined || i === j) continue;
      const vx = px[i] - px[j];
      const vy = py[i] - py[j];
      const d = Math.max(Math.sqrt(vx * vx + vy * vy), 1e-2);
      const att = (d * d) / ideal;
      dx[i] -= (vx / d) * att;
      dy[i] -= (vy / d) * att;
      dx[j] += (vx / d) * att;
      dy[j] += (vy / d) * att;
    }
    for (let i = 0; i < n; i++) {
      const a = anchors[clusters[ids[i]] ?? 0] ?? { x: cx, y: cy };
      dx[i] += (a.x - px[i]) * 0.06;
      dy[i] += (a.y - py[i]) * 0.06;
      const len = Math.max(Math.sqrt(dx[i] * dx[i] + dy[i] * dy[i]), 1e-9);
      const step = Math.min(len, temp);
      px[i] = Math.min(width - pad, Math.max(pad, px[i] + (dx[i] / len) * step));
      py[i] = Math.min(height - pad, Math.max(pad, py[i] + (dy[i] / len) * step));
    }
    temp = Math.max(temp - cool, 0.5);
  }

  ids.forEach((id, i) => pos.set(id, { x: px[i], y: py[i] }));
  return pos;
}

export function isCrossEdge(e: GraphEdge, clusters: Record<string, number>): boolean {
  return clusters[e.source] !== clusters[e.target];
}

/** Render the inventory with cluster coloring taken verbatim from the
 *  partition map. Programs draw as circles, resources as squares; edges that
 *  straddle clusters are highlighted above the intra-cluster ones. */
export function renderForceGraph(
  inventory: GraphInventory,
  partition: Record<string, number>,
  width = 520,
  height = 420,
): SVGSVGElement {
  const ids = inventory.nodes.map((nd) => nd.id);
  const positions = forceLayout(ids, inventory.edges, partition, width, height);
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "force-graph",
    role: "img",
  });

  const sorted = [...inventory.edges].sort(
    (a, b) => Number(isCrossEdge(a, partition)) - Number(isCrossEdge(b, partition)),
  );
  for (const e of sorted) {
    const p = positions.get(e.source);
    const q = positions.get(e.target);
    if (!p || !q) continue;
    const cross = isCrossEdge(e, partition);
    const line = svgEl("line", {
      x1: p.x.toFixed(1),
      y1: p.y.toFixed(1),
      x2: q.x.toFixed(1),
      y2: q.y.toFixed(1),
      stroke: cross ? CROSS_EDGE_COLOR : INTRA_EDGE_COLOR,
      "stroke-width": cross ? 1.8 : 1,
      "stroke-opacity": cross ? 0.9 : 0.55,
      class: cross ? "edge cross" : "edge",
      "data-kind": e.kind,
    });
    svg.appendChild(line);
  }

  for (const nd of inventory.nodes) {
    const p = positions.get(nd.id);
    if (!p) continue;
    const cluster = partition[nd.id];
    const fill = clusterColor(cluster ?? 0);
    const common = {
      fill,
      stroke: "#2b2f36",
      "stroke-width": 1,
      class: `node ${nd.kind.toLowerCase()}`,
      "data-id": nd.id,
      "data-cluster": cluster ?? "",
    };
    const shape =
      nd.kind === "Resource"
        ? svgEl("rect", {
            ...common,
            x: (p.x - 5.5).toFixed(1),
            y: (p.y - 5.5).toFixed(1),
            width: 11,
            height: 11,
          })
        : svgEl("circle", { ...common, cx: p.x.toFixed(1), cy: p.y.toFixed(1), r: 6 });
    const tip = svgEl("title");
    tip.textContent =
      nd.kind === "Resource"
        ? `${nd.id}-res (cluster ${cluster})`
        : `${nd.id} (cluster ${cluster})`;
    shape.appendChild(tip);
    svg.appendChild(shape);
  }
  return svg;
}
