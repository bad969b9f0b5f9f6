// DOM rendering: one render function per screen kind, no retained widgets.

import { canSubmit, Controller, Screen } from "./controller.js";
import { SLIDER_VALUES } from "./types.js";

const LABELS = ["left much better", "left better", "tie", "right better", "right much better"];

function el(tag: string, cls: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function render(root: HTMLElement, ctrl: Controller) {
  root.replaceChildren();
  const screen = ctrl.screen;
  if (screen.kind === "loading") {
    root.append(el("p", "status", "loading next task..."));
    return;
  }
  if (screen.kind === "error") {
    const box = el("div", "error");
    box.append(el("p", "", screen.message));
    const retry = el("button", "retry", "retry") as HTMLButtonElement;
    retry.onclick = () => void ctrl.loadNext();
    box.append(retry);
    root.append(box);
    return;
  }
  if (screen.kind === "done") {
    const box = el("div", "done");
    box.append(el("h2", "", "all tasks labeled"));
    box.append(
      el(
        "p",
        "",
        `${screen.progress.labeled} labels over ${screen.progress.total} tasks; thank you!`,
      ),
    );
    root.append(box);
    return;
  }

  const view = screen.view;
  const page = el("div", "task");
  page.append(el("h2", "goal", view.goalSummary));
  if (view.notice) page.append(el("p", "notice", view.notice));

  const grid = el("div", "grid");
  grid.append(el("div", "head", "user said"));
  grid.append(el("div", "head cand", "candidate A"));
  grid.append(el("div", "head cand", "candidate B"));
  view.contextTurns.forEach((userTurn, i) => {
    grid.append(el("div", "context-row", userTurn));
    grid.append(el("div", "cand-row left", view.leftTurns[i] ?? ""));
    grid.append(el("div", "cand-row right", view.rightTurns[i] ?? ""));
  });
  page.append(grid);

  const controls = el("div", "controls");
  // left-preference scale: "left much better" stores mu = 1 for the left panel
  const muByLabel = [1, 0.75, 0.5, 0.25, 0] as const;
  LABELS.forEach((label, i) => {
    const mu = muByLabel[i] as (typeof SLIDER_VALUES)[number];
    const btn = el("button", "pref", label) as HTMLButtonElement;
    btn.dataset.mu = String(mu);
    if (view.touched && view.mu === mu) btn.classList.add("selected");
    btn.onclick = () => ctrl.setSlider(mu);
    controls.append(btn);
  });
  const submit = el("button", "submit", "submit") as HTMLButtonElement;
  submit.disabled = !canSubmit(view);
  submit.onclick = () => void ctrl.submit();
  controls.append(submit);
  page.append(controls);
  root.append(page);
}
