// Thin client over the labeling service HTTP API. The fetch function is
// injectable so contract tests can run against a stub service.

import type { LabelTask, Progress, SubmitResult } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
    private readonly base: string = "",
  ) {}

  async nextTask(annotator: string): Promise<LabelTask | null> {
    const res = await this.fetchFn(
      `${this.base}/api/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    );
    if (res.status === 204) return null;
    if (!res.ok) throw new Error(`next task failed: ${res.status}`);
    return (await res.json()) as LabelTask;
  }

  /**
   * Posts the preference for the DISPLAYED-LEFT candidate exactly as the
   * annotator set it. Canonical de-randomization is the service's job; the
   * client never reorders or flips anything.
   */
  async submitLabel(
    taskId: string,
    muLeft: number,
    annotator: string,
  ): Promise<SubmitResult> {
    const res = await this.fetchFn(
      `${this.base}/api/tasks/${encodeURIComponent(taskId)}/label`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ mu_c1: muLeft, annotator }),
      },
    );
    let body: unknown = null;
    try {
      body = await res.json();
    } catch {
      body = null;
    }
    return { status: res.status, body };
  }

  async progress(): Promise<Progress> {
    const res = await this.fetchFn(`${this.base}/api/progress`);
    if (!res.ok) throw new Error(`progress failed: ${res.status}`);
    return (await res.json()) as Progress;
  }
}
