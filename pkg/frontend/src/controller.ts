// Screen state machine for one annotation session. All state here is
// reconstructable from the service; a page refresh simply refetches.

import { ApiClient } from "./api.js";
import type { LabelTask, Progress, SliderValue } from "./types.js";

export type Screen =
  | { kind: "loading" }
  | { kind: "task"; view: TaskView }
  | { kind: "done"; progress: Progress }
  | { kind: "error"; message: string };

export interface TaskView {
  taskId: string;
  goalSummary: string;
  contextTurns: string[];
  // panels in the exact order given by the service's display_order
  leftTurns: string[];
  rightTurns: string[];
  mu: SliderValue;
  touched: boolean;
  submitting: boolean;
  notice: string | null;
}

export function taskView(task: LabelTask): TaskView {
  return {
    taskId: task.task_id,
    goalSummary: task.context.goal_summary,
    contextTurns: task.context.user_turns,
    leftTurns: task.left_turns,
    rightTurns: task.right_turns,
    mu: 0.5,
    touched: false,
    submitting: false,
    notice: null,
  };
}

export function canSubmit(view: TaskView): boolean {
  return view.touched && !view.submitting;
}

export class Controller {
  screen: Screen = { kind: "loading" };
  private listeners: Array<(s: Screen) => void> = [];

  constructor(
    private readonly api: ApiClient,
    readonly annotator: string,
  ) {}

  onChange(fn: (s: Screen) => void) {
    this.listeners.push(fn);
  }

  private set(screen: Screen) {
    this.screen = screen;
    for (const fn of this.listeners) fn(screen);
  }

  async loadNext(notice: string | null = null) {
    this.set({ kind: "loading" });
    let task: LabelTask | null;
    try {
      task = await this.api.nextTask(this.annotator);
    } catch (err) {
      this.set({ kind: "error", message: String(err) });
      return;
    }
    if (task === null) {
      const progress = await this.api.progress();
      this.set({ kind: "done", progress });
      return;
    }
    const view = taskView(task);
    view.notice = notice;
    this.set({ kind: "task", view });
  }

  setSlider(mu: SliderValue) {
    if (this.screen.kind !== "task") return;
    const view = { ...this.screen.view, mu, touched: true, notice: null };
    this.set({ kind: "task", view });
  }

  markTie() {
    this.setSlider(0.5);
  }

  async submit() {
    if (this.screen.kind !== "task") return;
    const view = this.screen.view;
    if (!canSubmit(view)) return; // disabled state blocks double submits
    this.set({ kind: "task", view: { ...view, submitting: true } });
    const result = await this.api.submitLabel(
      view.taskId,
      view.mu,
      this.annotator,
    );
    if (result.status === 201) {
      await this.loadNext();
    } else if (result.status === 409) {
      await this.loadNext("previous task was already labeled; moved on");
    } else if (result.status === 422) {
      const message =
        (result.body as { error?: string })?.error ?? "value rejected";
      this.set({
        kind: "task",
        view: { ...view, submitting: false, notice: message },
      });
    } else {
      this.set({
        kind: "error",
        message: `submit failed with status ${result.status}`,
      });
    }
  }
}
