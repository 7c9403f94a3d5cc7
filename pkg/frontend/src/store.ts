// Central app state. Everything durable comes from the server; the only
// client-owned state is the seed draft being assembled, launch settings,
// and view bookkeeping (active screen, search text, banners).

import type { GraphInventory, RunBrief, RunSnapshot } from "./types.js";
import { createDraft, type SeedDraft } from "./seeds.js";

export type Screen = "upload" | "seeds" | "dashboard" | "result" | "compare";

export interface Banner {
  kind: "error" | "retry" | "info";
  text: string;
}

export interface LaunchSettings {
  k: number;
  variant: string;
  rngSeed: number;
  activation: string;
}

export interface AppState {
  screen: Screen;
  graph: GraphInventory | null;
  factsText: string;
  draft: SeedDraft;
  settings: LaunchSettings;
  selectedNode: string | null;
  search: string;
  runs: RunBrief[];
  activeRunId: string | null;
  activeRun: RunSnapshot | null;
  compareA: string | null;
  compareB: string | null;
  compareRuns: { a: RunSnapshot | null; b: RunSnapshot | null };
  banner: Banner | null;
}

export function initialState(): AppState {
  const k = 4;
  return {
    screen: "upload",
    graph: null,
    factsText: "",
    draft: createDraft(k),
    settings: { k, variant: "chgnn", rngSeed: 0, activation: "relu" },
    selectedNode: null,
    search: "",
    runs: [],
    activeRunId: null,
    activeRun: null,
    compareA: null,
    compareB: null,
    compareRuns: { a: null, b: null },
    banner: null,
  };
}

/** Everything a view can ask the app shell to do. */
export interface Actions {
  goto(screen: Screen): void;
  setFactsText(text: string): void;
  uploadFacts(): Promise<void>;
  setK(k: number): void;
  setVariant(variant: string): void;
  setRngSeed(seed: number): void;
  setActivation(activation: string): void;
  setSearch(text: string): void;
  selectNode(id: string | null): void;
  assignNode(bucket: number, id: string): void;
  unassignNode(id: string): void;
  launch(): Promise<void>;
  openRun(runId: string): Promise<void>;
  refreshRuns(): Promise<void>;
  setCompare(side: "a" | "b", runId: string | null): Promise<void>;
  dismissBanner(): void;
}

export type Listener = (state: AppState) => void;

export class Store {
  private listeners = new Set<Listener>();

  constructor(public state: AppState = initialState()) {}

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  patch(changes: Partial<AppState>): void {
    Object.assign(this.state, changes);
    for (const fn of this.listeners) fn(this.state);
  }
}
