// Full workbench journey against the contract-faithful fake service:
// upload the planted fixture, seed all four buckets, launch, watch the
// loss curve lengthen while polling, then check the rendered sunburst
// against the served partition. A second launch after editing one seed
// must appear beside the first in the compare view.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/app.js";
import { createClient } from "../src/api.js";
import { leafToNodeId } from "../src/sunburst.js";
import { FakeService } from "./fakeService.js";

const FACTS_TEXT = JSON.stringify({
  programs: { c0p0: {} },
  resources: ["c0r0"],
  entrypoints: {},
});

let fake: FakeService;
let app: App;
let root: HTMLElement;

async function flush(): Promise<void> {
  // Each round lets one more await in a pending client -> store chain settle;
  // launch alone strings ~18 hops (POST, run listing, first poll), so leave
  // generous headroom — rounds are free when the queue is already empty.
  for (let i = 0; i < 60; i++) await Promise.resolve();
}

function q<T extends Element>(selector: string): T {
  const found = root.querySelector<T>(selector);
  if (!found) throw new Error(`missing element: ${selector}`);
  return found;
}

function clickNav(screen: string): void {
  q<HTMLButtonElement>(`.nav-btn[data-screen="${screen}"]`).click();
}

async function uploadFixture(): Promise<void> {
  const area = q<HTMLTextAreaElement>("#facts-text");
  area.value = FACTS_TEXT;
  area.dispatchEvent(new Event("input", { bubbles: true }));
  q<HTMLButtonElement>("#upload-btn").click();
  await flush();
}

function assignSeed(bucket: number, nodeId: string): void {
  q<HTMLElement>(`.node-row[data-id="${nodeId}"]`).click();
  q<HTMLButtonElement>(`.bucket[data-bucket="${bucket}"] button.mini`).click();
}

function renderedMembership(): Record<string, number> {
  const resources = new Set(
    fake.inventory.nodes.filter((nd) => nd.kind === "Resource").map((nd) => nd.id),
  );
  const out: Record<string, number> = {};
  for (const leaf of root.querySelectorAll('.screen-result [data-depth="2"]')) {
    const name = leaf.getAttribute("data-name")!;
    out[leafToNodeId(name, resources)] = Number(leaf.getAttribute("data-cluster"));
  }
  return out;
}

function canonical(obj: Record<string, number>): string {
  return JSON.stringify(
    Object.fromEntries(Object.entries(obj).sort(([a], [b]) => (a < b ? -1 : 1))),
  );
}

beforeEach(() => {
  vi.useFakeTimers();
  fake = new FakeService();
  root = document.createElement("div");
  document.body.appendChild(root);
  app = new App(createClient("", fake.fetch), root);
  app.start();
});

afterEach(() => {
  app.stop();
  root.remove();
  vi.useRealTimers();
});

describe("workbench round trip", () => {
  it("covers upload, seeding, launch, live curve, and rendered membership", async () => {
    await uploadFixture();
    expect(q(".inventory").getAttribute("data-graph-id")).toBe("fixture01");
    expect(fake.graphUploads).toBe(1);

    clickNav("seeds");
    assignSeed(0, "c0p0");
    assignSeed(1, "c1p0");
    assignSeed(2, "c2p0");
    assignSeed(3, "c3p0");
    const launch = q<HTMLButtonElement>("#launch-btn");
    expect(launch.disabled).toBe(false);
    launch.click();
    await flush();

    // the launch landed on the dashboard and the first poll already ran
    expect(fake.runPosts).toHaveLength(1);
    expect(fake.runPosts[0].seeds).toEqual([["c0p0"], ["c1p0"], ["c2p0"], ["c3p0"]]);
    const first = Number(q(".loss-curve").getAttribute("data-points"));
    expect(first).toBeGreaterThan(0);

    // successive polls lengthen the curve monotonically
    await vi.advanceTimersByTimeAsync(1000);
    const second = Number(q(".loss-curve").getAttribute("data-points"));
    expect(second).toBeGreaterThan(first);
    expect(q(".watch-pane .pill").textContent).toBe("running");

    await vi.advanceTimersByTimeAsync(1000);
    await flush();
    expect(q(".watch-pane .pill").textContent).toBe("done");

    clickNav("result");
    const served = fake.doneSnapshot("run-1");
    const rendered = renderedMembership();
    expect(Object.keys(rendered)).toHaveLength(fake.inventory.nodes.length);
    expect(canonical(rendered)).toBe(canonical(served.partition!));

    // K top-level arcs and the four metric cards
    expect(root.querySelectorAll('.screen-result [data-depth="1"]').length).toBe(4);
    expect(root.querySelectorAll(".screen-result .metric-card").length).toBe(4);
  });

  it("lists a relaunch after a seed edit beside the original in compare", async () => {
    await uploadFixture();
    clickNav("seeds");
    assignSeed(0, "c0p0");
    assignSeed(1, "c1p0");
    assignSeed(2, "c2p0");
    assignSeed(3, "c3p0");
    q<HTMLButtonElement>("#launch-btn").click();
    await flush();
    await vi.advanceTimersByTimeAsync(3000);
    await flush();

    // swap bucket 3's seed for a different member of the same community
    clickNav("seeds");
    q<HTMLButtonElement>('.chip[data-id="c3p0"] .chip-x').click();
    assignSeed(3, "c3p1");
    q<HTMLButtonElement>("#launch-btn").click();
    await flush();
    expect(fake.runPosts).toHaveLength(2);
    expect(fake.runPosts[1].seeds![3]).toEqual(["c3p1"]);
    await vi.advanceTimersByTimeAsync(3000);
    await flush();

    clickNav("compare");
    const selA = q<HTMLSelectElement>("#compare-a");
    expect([...selA.options].map((o) => o.value)).toEqual(["", "run-1", "run-2"]);
    expect([...q<HTMLSelectElement>("#compare-b").options]).toHaveLength(3);

    selA.value = "run-1";
    selA.dispatchEvent(new Event("change"));
    await flush();
    q<HTMLSelectElement>("#compare-b").value = "run-2";
    q<HTMLSelectElement>("#compare-b").dispatchEvent(new Event("change"));
    await flush();

    expect(q('.compare-side[data-side="a"] .compare-body').getAttribute("data-run-id")).toBe("run-1");
    expect(q('.compare-side[data-side="b"] .compare-body').getAttribute("data-run-id")).toBe("run-2");
    expect(root.querySelectorAll(".compare-side .sunburst").length).toBe(2);
    expect(root.querySelectorAll(".compare-deltas [data-delta]").length).toBe(4);
  });
});
