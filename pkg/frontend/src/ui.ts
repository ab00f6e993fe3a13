/** DOM rendering for the trial client. All state comes from the controller. */

import { SessionController } from "./controller.js";
import { DatasetInfo, Observation, UiSessionState, canMove, canPeek } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export class TrialView {
  private root: HTMLElement;
  private expanded = new Set<number>();
  private timerHandle: number | null = null;
  private deadline: number | null = null;

  constructor(
    root: HTMLElement,
    private readonly controller: SessionController,
    private readonly datasets: DatasetInfo[],
  ) {
    this.root = root;
    controller.subscribe((state, busy) => this.render(state, busy));
  }

  private render(state: UiSessionState, busy: boolean): void {
    this.root.replaceChildren();
    switch (state.screen) {
      case "start":
        this.renderStart(state, busy);
        break;
      case "trial":
        this.renderTrial(state, busy);
        break;
      case "summary":
        this.renderSummary(state);
        break;
      case "error":
        this.renderFatal(state);
        break;
    }
  }

  private renderStart(state: UiSessionState, busy: boolean): void {
    const panel = el("div", "panel");
    panel.appendChild(el("h1", undefined, "Navigation trials"));
    if (this.datasets.length === 0) {
      panel.appendChild(
        el("p", "note", "No datasets are loaded on the server; nothing to play."),
      );
    }
    const picker = el("select") as HTMLSelectElement;
    for (const ds of this.datasets) {
      const opt = el("option", undefined,
        `${ds.id} (${ds.counts.test ?? 0} test queries)`) as HTMLOptionElement;
      opt.value = ds.id;
      picker.appendChild(opt);
    }
    panel.appendChild(picker);
    const start = el("button", "primary", "Start session") as HTMLButtonElement;
    start.disabled = busy || this.datasets.length === 0;
    start.onclick = () => void this.controller.start(picker.value);
    panel.appendChild(start);
    if (state.error) {
      const banner = el("div", "banner error",
        `Could not reach the service: ${state.error.message}`);
      const retry = el("button", undefined, "Retry") as HTMLButtonElement;
      retry.onclick = () => location.reload();
      banner.appendChild(retry);
      panel.appendChild(banner);
    }
    this.root.appendChild(panel);
  }

  private renderTrial(state: UiSessionState, busy: boolean): void {
    const obs = state.observation;
    if (!obs) {
      this.root.appendChild(el("p", "note", "Loading…"));
      return;
    }
    this.syncTimer(obs);

    const bar = el("div", "statusbar");
    bar.appendChild(el("span", undefined, `Trial ${obs.trial} of ${obs.total_trials}`));
    bar.appendChild(el("span", undefined,
      `Peeks left here: ${obs.remaining_peeks} / ${obs.limits.n_n}`));
    bar.appendChild(el("span", undefined,
      `Hops: ${obs.hops_taken} / ${obs.limits.n_h}`));
    const clock = el("span", "clock");
    clock.id = "clock";
    bar.appendChild(clock);
    this.root.appendChild(bar);

    if (state.lastOutcome) {
      this.root.appendChild(el("div", `banner ${state.lastOutcome}`,
        `Previous trial: ${state.lastOutcome}` +
        (state.lastReward !== null ? ` (reward ${state.lastReward})` : "")));
    }

    const queryPanel = el("div", "panel query");
    queryPanel.appendChild(el("h2", undefined, "Find a page containing:"));
    queryPanel.appendChild(el("blockquote", undefined, obs.query));
    this.root.appendChild(queryPanel);

    const nodePanel = el("div", "panel node");
    nodePanel.appendChild(el("h2", undefined, obs.title));
    const body = el("pre", "nodetext", obs.text);
    nodePanel.appendChild(body);
    this.root.appendChild(nodePanel);

    const links = el("div", "panel links");
    links.appendChild(el("h3", undefined, `Outgoing links (${obs.out_degree})`));
    obs.neighbor_titles.forEach((title, edge) => {
      links.appendChild(this.renderLink(obs, edge, title, busy));
    });
    if (obs.out_degree === 0) {
      links.appendChild(el("p", "note", "Dead end: stop or give up."));
    }
    this.root.appendChild(links);

    const actions = el("div", "panel actions");
    const stop = el("button", "primary", "Stop here (this page answers it)") as HTMLButtonElement;
    stop.disabled = busy;
    stop.onclick = () => void this.controller.stop();
    const giveup = el("button", "danger", "Give up on this query") as HTMLButtonElement;
    giveup.disabled = busy;
    giveup.onclick = () => void this.controller.giveUp();
    actions.append(stop, giveup);
    this.root.appendChild(actions);
  }

  private renderLink(
    obs: Observation, edge: number, title: string, busy: boolean,
  ): HTMLElement {
    const row = el("div", "link");
    const head = el("div", "linkhead");
    head.appendChild(el("span", "linktitle", title));
    const peeked = canMove(obs, edge);
    const peek = el("button", undefined, peeked ? "Peeked" : "Peek") as HTMLButtonElement;
    peek.disabled = busy || (!peeked && !canPeek(obs, edge));
    peek.onclick = () => {
      this.expanded.add(edge);
      void this.controller.peek(edge);
    };
    const move = el("button", undefined, "Move") as HTMLButtonElement;
    move.disabled = busy || !peeked;  // moves go through explored edges only
    move.onclick = () => {
      this.expanded.clear();
      void this.controller.move(edge);
    };
    head.append(peek, move);
    row.appendChild(head);
    if (peeked) {
      const toggle = el("button", "subtle",
        this.expanded.has(edge) ? "Hide text" : "Show text") as HTMLButtonElement;
      toggle.onclick = () => {
        if (this.expanded.has(edge)) {
          this.expanded.delete(edge);
        } else {
          this.expanded.add(edge);
        }
        this.render(this.controller.current, this.controller.busy);
      };
      head.appendChild(toggle);
      if (this.expanded.has(edge)) {
        row.appendChild(el("pre", "peektext", obs.peeked[String(edge)].text));
      }
    }
    return row;
  }

  private renderSummary(state: UiSessionState): void {
    const s = state.summary;
    const panel = el("div", "panel");
    panel.appendChild(el("h1", undefined, "Session finished"));
    if (s) {
      panel.appendChild(el("p", undefined,
        `${s.successes} of ${s.trials} queries solved ` +
        `(average reward ${s.average_reward.toFixed(3)}).`));
      const list = el("ol");
      for (const t of s.per_trial) {
        list.appendChild(el("li", t.outcome,
          `query #${t.query_index}: ${t.outcome}`));
      }
      panel.appendChild(list);
    }
    const again = el("button", "primary", "New session") as HTMLButtonElement;
    again.onclick = () => {
      localStorage.removeItem("webnav-session");
      location.reload();
    };
    panel.appendChild(again);
    this.root.appendChild(panel);
    this.stopTimer();
  }

  private renderFatal(state: UiSessionState): void {
    const panel = el("div", "panel");
    panel.appendChild(el("h1", undefined, "Something went wrong"));
    panel.appendChild(el("p", "error", state.error?.message ?? "unknown error"));
    const retry = el("button", "primary", "Reload") as HTMLButtonElement;
    retry.onclick = () => location.reload();
    panel.appendChild(retry);
    this.root.appendChild(panel);
    this.stopTimer();
  }

  /** Client-side countdown; purely advisory, the server enforces expiry. */
  private syncTimer(obs: Observation): void {
    this.deadline = Date.now() + obs.remaining_time_s * 1000;
    if (this.timerHandle === null) {
      this.timerHandle = window.setInterval(() => {
        const clock = document.getElementById("clock");
        if (!clock || this.deadline === null) {
          return;
        }
        const left = Math.max(0, this.deadline - Date.now()) / 1000;
        const h = Math.floor(left / 3600);
        const m = Math.floor((left % 3600) / 60);
        const sec = Math.floor(left % 60);
        clock.textContent =
          `Time left ${h}:${String(m).padStart(2, "0")}:${String(sec).padStart(2, "0")}`;
        if (left <= 0) {
          void this.controller.showSummary();
        }
      }, 1000);
    }
  }

  private stopTimer(): void {
    if (this.timerHandle !== null) {
      window.clearInterval(this.timerHandle);
      this.timerHandle = null;
    }
  }
}
