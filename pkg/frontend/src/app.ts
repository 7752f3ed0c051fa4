/**
 * Application shell. Owns the DOM around the tree view: session form,
 * subspace filter panel, insight detail, history list, query box, and
 * the notice strip. All story mutations round-trip through the
 * service; after any mutating call the story is re-fetched rather
 * than patched locally.
 */

import { ApiClient, ApiError } from "./api.js";
import { runEffect } from "./effects.js";
import { radialLayout } from "./layout.js";
import {
  adoptLayout,
  filterConjuncts,
  initialState,
  interact,
  noteError,
  pruneToStory,
  queryResolved,
  type Effect,
  type UiEvent,
  type ViewState,
} from "./state.js";
import { buildScene } from "./tree.js";
import type {
  HistoryEntryDoc,
  InsightDetailDoc,
  StoryDoc,
  SubspaceListingDoc,
} from "./types.js";
import { TreeView } from "./view.js";

const POLL_MS = 500;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private readonly api: ApiClient;
  private state: ViewState = initialState();
  private story: StoryDoc | null = null;
  private details = new Map<string, InsightDetailDoc>();
  private listing: SubspaceListingDoc | null = null;
  private historyPath: HistoryEntryDoc[] = [];
  private pollTimer: number | null = null;

  private tree!: TreeView;
  private panelEl!: HTMLElement;
  private noticesEl!: HTMLElement;
  private queryInput!: HTMLInputElement;
  private queryButton!: HTMLButtonElement;

  constructor(rootEl: HTMLElement, api: ApiClient) {
    this.api = api;
    this.buildDom(rootEl);
  }

  private buildDom(rootEl: HTMLElement): void {
    rootEl.innerHTML = "";
    const layoutEl = el("div", "app-layout");
    rootEl.appendChild(layoutEl);

    const treeWrap = el("div", "tree-wrap");
    layoutEl.appendChild(treeWrap);
    this.tree = new TreeView(treeWrap, (ev) => this.dispatch(ev));

    const side = el("div", "side-panel");
    layoutEl.appendChild(side);

    const sessionBox = el("div", "box session-box");
    side.appendChild(sessionBox);
    sessionBox.appendChild(el("h2", undefined, "Session"));
    const csvArea = el("textarea", "csv-input");
    csvArea.placeholder = "paste CSV here";
    sessionBox.appendChild(csvArea);
    const openButton = el("button", undefined, "Open session");
    openButton.addEventListener("click", () => {
      void this.openSession(csvArea.value);
    });
    sessionBox.appendChild(openButton);

    const queryBox = el("div", "box query-box");
    side.appendChild(queryBox);
    queryBox.appendChild(el("h2", undefined, "Ask"));
    this.queryInput = el("input", "query-input");
    this.queryInput.placeholder = "what should I look at next?";
    this.queryInput.addEventListener("input", () => {
      this.dispatch({ type: "edit_query", text: this.queryInput.value });
    });
    this.queryInput.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") this.submitQuery();
    });
    queryBox.appendChild(this.queryInput);
    this.queryButton = el("button", undefined, "Ask");
    this.queryButton.addEventListener("click", () => this.submitQuery());
    queryBox.appendChild(this.queryButton);

    this.panelEl = el("div", "box detail-panel");
    side.appendChild(this.panelEl);

    this.noticesEl = el("div", "notices");
    side.appendChild(this.noticesEl);
  }

  private submitQuery(): void {
    const focused = this.focusedNode();
    if (!focused) {
      this.state = noteError(this.state, "click a node to focus it before asking");
      this.redrawPanel();
      return;
    }
    this.dispatch({ type: "submit_query", focusedNode: focused });
  }

  private focusedNode(): string | null {
    if (this.state.panel.selectedNode) return this.state.panel.selectedNode;
    const first = this.story?.nodes[0];
    return first ? first.node_id : null;
  }

  private async openSession(csv: string): Promise<void> {
    try {
      const summary = await this.api.createSession(csv);
      this.state = { ...initialState(), sessionId: summary.session_id };
      await this.api.seed(summary.session_id);
      await this.refreshStory();
      this.redrawPanel();
    } catch (err) {
      this.fail(err);
    }
  }

  private dispatch(event: UiEvent): void {
    const { state, effects } = interact(this.state, event);
    this.state = state;
    if (event.type === "drag" || event.type === "hover") {
      // cheap presentation updates, no service round-trip
      this.redrawTree();
      return;
    }
    for (const effect of effects) void this.execute(effect);
    if (event.type === "submit_query") this.startPolling();
    this.redrawPanel();
  }

  private async execute(effect: Effect): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    try {
      const result = await runEffect(this.api, sessionId, effect);
      switch (result.kind) {
        case "subspaces":
          this.listing = result.listing;
          break;
        case "insight":
          this.details.set(result.insight.id, result.insight);
          break;
        case "history":
          this.historyPath = result.path;
          break;
        case "query":
          this.state = queryResolved(this.state);
          this.stopPolling();
          await this.refreshStory();
          break;
        case "node":
          await this.refreshStory();
          if (effect.kind === "set_node_state" && effect.op === "focus") {
            await this.loadDetail(result.node.insight_id);
          }
          break;
      }
      this.redrawPanel();
    } catch (err) {
      if (effect.kind === "post_query") this.stopPolling();
      this.fail(err);
    }
  }

  private async loadDetail(insightId: string): Promise<void> {
    if (this.details.has(insightId)) return;
    const detail = await this.api.insight(this.state.sessionId!, insightId);
    this.details.set(insightId, detail);
  }

  private async refreshStory(): Promise<void> {
    const sessionId = this.state.sessionId;
    if (!sessionId) return;
    const story = await this.api.story(sessionId);
    this.story = story;
    for (const node of story.nodes) {
      if (!this.details.has(node.insight_id)) await this.loadDetail(node.insight_id);
    }
    const pinned = new Set(story.nodes.filter((n) => n.pinned).map((n) => n.node_id));
    const pinnedAngles: Record<string, number> = {};
    for (const nodeId of pinned) {
      const pos = this.state.positions[nodeId];
      if (pos) pinnedAngles[nodeId] = pos.angle;
    }
    const layout = radialLayout(story, { pinnedAngles });
    this.state = pruneToStory(adoptLayout(this.state, layout, pinned), story);
    this.redrawTree();
  }

  private startPolling(): void {
    this.stopPolling();
    this.pollTimer = window.setInterval(() => {
      if (!this.state.queryInFlight) {
        this.stopPolling();
        return;
      }
      void this.refreshStory();
    }, POLL_MS);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      window.clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private fail(err: unknown): void {
    const message =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.state = noteError(this.state, message);
    this.redrawPanel();
  }

  private redrawTree(): void {
    if (!this.story) return;
    this.tree.render(buildScene(this.story, this.state.positions, this.details));
  }

  private redrawPanel(): void {
    this.queryButton.disabled = this.state.queryInFlight;
    this.queryInput.value = this.state.pendingQuery;

    this.noticesEl.innerHTML = "";
    this.state.notices.forEach((notice, i) => {
      const row = el("div", "notice", notice);
      const close = el("button", "notice-close", "x");
      close.addEventListener("click", () => this.dispatch({ type: "dismiss_notice", index: i }));
      row.appendChild(close);
      this.noticesEl.appendChild(row);
    });

    this.panelEl.innerHTML = "";
    this.panelEl.appendChild(el("h2", undefined, "Subspace filters"));
    const chips = el("div", "filter-chips");
    const filters = this.state.panel.filters;
    if (Object.keys(filters).length === 0) {
      chips.appendChild(el("span", "chip chip-empty", "(whole table)"));
    }
    for (const conjunct of filterConjuncts(filters)) {
      chips.appendChild(el("span", "chip", conjunct));
    }
    this.panelEl.appendChild(chips);

    if (this.listing) {
      const list = el("div", "subspace-list");
      list.appendChild(
        el("h3", undefined, `${this.listing.insights.length} insights here`),
      );
      for (const ins of this.listing.insights) {
        const row = el("div", "subspace-row", `${ins.itype} ${ins.score.toFixed(2)}: ${ins.description}`);
        row.title = "click to add under the selected node";
        row.addEventListener("click", () => void this.addFromListing(ins.id));
        list.appendChild(row);
      }
      this.panelEl.appendChild(list);
    }

    const selected = this.state.panel.selectedNode;
    if (selected && this.story) {
      const node = this.story.nodes.find((n) => n.node_id === selected);
      const detail = node ? this.details.get(node.insight_id) : undefined;
      if (node && detail) {
        this.panelEl.appendChild(el("h2", undefined, `Insight ${detail.id}`));
        this.panelEl.appendChild(el("p", "description", detail.description));
        const inspect = el("button", undefined, "Inspect subspace");
        inspect.addEventListener("click", () =>
          this.dispatch({ type: "inspect", insight: detail }),
        );
        this.panelEl.appendChild(inspect);
        const history = el("button", undefined, "Show path from root");
        history.addEventListener("click", () =>
          this.dispatch({ type: "select_history", nodeId: node.node_id }),
        );
        this.panelEl.appendChild(history);
      }
    }

    if (this.state.panel.historySelection && this.historyPath.length) {
      const list = el("div", "history-list");
      list.appendChild(el("h3", undefined, "How we got here"));
      for (const hop of this.historyPath) {
        const prefix = hop.query === null ? "seeded" : `asked: ${hop.query}`;
        list.appendChild(el("div", "history-row", `${prefix} -> ${hop.node.description}`));
      }
      this.panelEl.appendChild(list);
    }
  }

  private async addFromListing(insightId: string): Promise<void> {
    const sessionId = this.state.sessionId;
    const parent = this.state.panel.selectedNode;
    if (!sessionId || !parent) {
      this.state = noteError(this.state, "select a parent node first");
      this.redrawPanel();
      return;
    }
    try {
      await this.api.addNode(sessionId, parent, insightId);
      await this.refreshStory();
      this.redrawPanel();
    } catch (err) {
      this.fail(err);
    }
  }
}

export function boot(): void {
  const rootEl = document.getElementById("app");
  if (!rootEl) throw new Error("missing #app element");
  const api = new ApiClient(window.location.origin);
  new App(rootEl, api);
}
