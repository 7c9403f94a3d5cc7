// App shell: navigation, the render loop, action implementations, and the
// once-a-second status poll for the watched run. All server state flows
// through the Client; views stay pure functions of AppState.

import { ApiError, NetworkError, type Client } from "./api.js";
import { assign, checkDraft, createDraft, resizeDraft, toPayload, unassign } from "./seeds.js";
import { Store, type Actions, type AppState, type Screen } from "./store.js";
import { el } from "./views/widgets.js";
import { renderUpload } from "./views/upload.js";
import { renderSeedEditor } from "./views/seedEditor.js";
import { renderDashboard } from "./views/dashboard.js";
import { renderResult } from "./views/result.js";
import { renderCompare } from "./views/compare.js";

const POLL_MS = 1000;

const SCREENS: { id: Screen; label: string }[] = [
  { id: "upload", label: "Upload" },
  { id: "seeds", label: "Seed editor" },
  { id: "dashboard", label: "Dashboard" },
  { id: "result", label: "Result" },
  { id: "compare", label: "Compare" },
];

export class App {
  readonly store: Store;
  readonly actions: Actions;
  private timer: ReturnType<typeof setInterval> | null = null;
  private unsubscribe: (() => void) | null = null;

  constructor(
    private client: Client,
    private root: HTMLElement,
    store?: Store,
  ) {
    this.store = store ?? new Store();
    this.actions = this.buildActions();
  }

  start(): void {
    this.unsubscribe = this.store.subscribe(() => this.render());
    this.timer = setInterval(() => void this.tick(), POLL_MS);
    this.render();
    void this.actions.refreshRuns();
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
    this.unsubscribe?.();
    this.unsubscribe = null;
  }

  /** One poll step: refresh the watched run while it is still moving. */
  async tick(): Promise<void> {
    const s = this.store.state;
    if (!s.activeRunId) return;
    if (s.activeRun && (s.activeRun.status === "done" || s.activeRun.status === "failed")) {
      return;
    }
    try {
      const snap = await this.client.getRun(s.activeRunId);
      const finished = snap.status === "done" || snap.status === "failed";
      const patch: Partial<AppState> = { activeRun: snap };
      if (this.store.state.banner?.kind === "retry") patch.banner = null;
      this.store.patch(patch);
      if (finished) await this.actions.refreshRuns();
    } catch (err) {
      if (err instanceof NetworkError) {
        this.store.patch({
          banner: { kind: "retry", text: "connection lost, retrying every second" },
        });
      } else if (err instanceof ApiError) {
        this.store.patch({ banner: { kind: "error", text: err.message } });
      }
    }
  }

  private report(err: unknown): void {
    if (err instanceof NetworkError) {
      this.store.patch({
        banner: { kind: "retry", text: "service unreachable, will keep retrying" },
      });
    } else if (err instanceof ApiError) {
      this.store.patch({ banner: { kind: "error", text: err.message } });
    } else {
      this.store.patch({ banner: { kind: "error", text: String(err) } });
    }
  }

  private buildActions(): Actions {
    const store = this.store;
    const client = this.client;
    const report = (err: unknown) => this.report(err);

    return {
      goto: (screen) => store.patch({ screen }),
      setFactsText: (text) => store.patch({ factsText: text }),

      uploadFacts: async () => {
        let facts: unknown;
        try {
          facts = JSON.parse(store.state.factsText);
        } catch (err) {
          store.patch({
            banner: { kind: "error", text: `facts must be valid JSON: ${String(err)}` },
          });
          return;
        }
        try {
          const inventory = await client.uploadGraph(facts);
          store.patch({
            graph: inventory,
            draft: createDraft(store.state.settings.k),
            selectedNode: null,
            banner: null,
          });
        } catch (err) {
          report(err);
        }
      },

      setK: (k) =>
        store.patch({
          settings: { ...store.state.settings, k },
          draft: resizeDraft(store.state.draft, k),
        }),
      setVariant: (variant) =>
        store.patch({ settings: { ...store.state.settings, variant } }),
      setRngSeed: (rngSeed) =>
        store.patch({ settings: { ...store.state.settings, rngSeed } }),
      setActivation: (activation) =>
        store.patch({ settings: { ...store.state.settings, activation } }),

      setSearch: (text) => store.patch({ search: text }),
      selectNode: (id) => store.patch({ selectedNode: id }),
      assignNode: (bucket, id) => {
        const graph = store.state.graph;
        if (graph && !graph.nodes.some((nd) => nd.id === id)) return;
        store.patch({ draft: assign(store.state.draft, bucket, id) });
      },
      unassignNode: (id) => store.patch({ draft: unassign(store.state.draft, id) }),

      launch: async () => {
        const s = store.state;
        if (!s.graph) {
          store.patch({ banner: { kind: "error", text: "upload a graph first" } });
          return;
        }
        const graphIds = new Set(s.graph.nodes.map((nd) => nd.id));
        const check = checkDraft(s.draft, graphIds);
        if (!check.ok) {
          // invariant: invalid drafts never reach the server
          store.patch({
            banner: { kind: "error", text: `seed draft invalid: ${check.problems[0]}` },
          });
          return;
        }
        try {
          const out = await client.launchRun({
            graph_id: s.graph.graph_id,
            k: s.settings.k,
            variant: s.settings.variant,
            seeds: toPayload(s.draft),
            overrides: {
              rng_seed: s.settings.rngSeed,
              activation: s.settings.activation,
            },
          });
          store.patch({
            activeRunId: out.run_id,
            activeRun: null,
            screen: "dashboard",
            banner: null,
          });
          await this.actions.refreshRuns();
          await this.tick();
        } catch (err) {
          report(err);
        }
      },

      openRun: async (runId) => {
        try {
          const snap = await client.getRun(runId);
          store.patch({ activeRunId: runId, activeRun: snap, banner: null });
        } catch (err) {
          report(err);
        }
      },

      refreshRuns: async () => {
        try {
          const runs = await client.listRuns();
          runs.sort((a, b) => a.created_at - b.created_at);
          store.patch({ runs });
        } catch (err) {
          if (err instanceof NetworkError) report(err);
          // a failed listing is not worth an error banner on screen entry
        }
      },

      setCompare: async (side, runId) => {
        const key = side === "a" ? "compareA" : "compareB";
        if (runId === null) {
          store.patch({
            [key]: null,
            compareRuns: { ...store.state.compareRuns, [side]: null },
          } as Partial<AppState>);
          return;
        }
        try {
          const snap = await client.getRun(runId);
          store.patch({
            [key]: runId,
            compareRuns: { ...store.state.compareRuns, [side]: snap },
          } as Partial<AppState>);
        } catch (err) {
          report(err);
        }
      },

      dismissBanner: () => store.patch({ banner: null }),
    };
  }

  render(): void {
    const state = this.store.state;
    const focused = document.activeElement as HTMLElement | null;
    const focusId = focused?.id ?? "";
    let selStart: number | null = null;
    let selEnd: number | null = null;
    if (
      focused instanceof HTMLInputElement ||
      focused instanceof HTMLTextAreaElement
    ) {
      try {
        selStart = focused.selectionStart;
        selEnd = focused.selectionEnd;
      } catch {
        // selection is not readable on every input type
      }
    }

    const nav = el(
      "nav",
      { class: "topnav" },
      el("span", { class: "brand" }, "chimera workbench"),
      ...SCREENS.map(({ id, label }) =>
        el(
          "button",
          {
            class: "nav-btn" + (state.screen === id ? " current" : ""),
            "data-screen": id,
            disabled: this.screenDisabled(id),
            onclick: () => this.actions.goto(id),
          },
          label,
        ),
      ),
    );

    const banner = state.banner
      ? el(
          "div",
          { class: `banner banner-${state.banner.kind}`, role: "alert" },
          state.banner.text,
          el("button", { class: "banner-x", onclick: () => this.actions.dismissBanner() }, "×"),
        )
      : null;

    const screen = this.renderScreen(state);
    this.root.replaceChildren(nav, ...(banner ? [banner] : []), screen);

    if (focusId) {
      const again = document.getElementById(focusId);
      if (again instanceof HTMLElement) {
        again.focus();
        if (
          (again instanceof HTMLInputElement || again instanceof HTMLTextAreaElement) &&
          selStart !== null
        ) {
          try {
            again.setSelectionRange(selStart, selEnd ?? selStart);
          } catch {
            // number inputs refuse selection ranges
          }
        }
      }
    }
  }

  private screenDisabled(id: Screen): boolean {
    const s = this.store.state;
    if (id === "seeds") return s.graph === null;
    if (id === "result") return !(s.activeRun && s.activeRun.status === "done");
    return false;
  }

  private renderScreen(state: AppState): HTMLElement {
    switch (state.screen) {
      case "upload":
        return renderUpload(state, this.actions);
      case "seeds":
        return renderSeedEditor(state, this.actions);
      case "dashboard":
        return renderDashboard(state, this.actions);
      case "result":
        return renderResult(state, this.actions);
      case "compare":
        return renderCompare(state, this.actions);
    }
  }
}
