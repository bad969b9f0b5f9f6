// Wire types of the labeling service API.

export interface TaskContext {
  goal_summary: string;
  user_turns: string[];
}

export interface LabelTask {
  task_id: string;
  context: TaskContext;
  // canonical keys in the order the service wants them displayed
  display_order: [string, string];
  left_turns: string[];
  right_turns: string[];
}

export interface Progress {
  total: number;
  labeled: number;
  per_annotator: Record<string, number>;
}

export interface SubmitResult {
  status: number;
  body: unknown;
}

// Discrete five-position preference control, scored for the LEFT candidate.
export const SLIDER_VALUES = [0, 0.25, 0.5, 0.75, 1] as const;
export type SliderValue = (typeof SLIDER_VALUES)[number];
