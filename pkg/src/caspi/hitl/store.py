"""Task pool and append-only label journal for preference labeling.

The journal is the single source of truth: replaying it reconstructs the
label store exactly. Candidate display order is a pure function of
(task, annotator, pool), so the service can de-randomize a posted label
without per-request state.
"""

import hashlib
import json
import os
import threading
import time
from pathlib import Path


class TaskNotFound(KeyError):
    pass


class DuplicateLabel(Exception):
    pass


class LabelOutOfRange(ValueError):
    pass


def display_swapped(task_id: str, annotator: str, salt: str = "") -> bool:
    h = hashlib.sha256(f"{task_id}|{annotator}|{salt}".encode("utf-8")).digest()
    return bool(h[0] & 1)


class LabelStore:
    def __init__(self, pool_path, journal_path, salt: str = ""):
        self.pool_path = Path(pool_path)
        self.journal_path = Path(journal_path)
        self.salt = salt
        self._lock = threading.Lock()
        self.tasks: dict[str, dict] = {}
        self.order: list[str] = []
        with open(self.pool_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    task = json.loads(line)
                    self.tasks[task["task_id"]] = task
                    self.order.append(task["task_id"])
        # (task_id, annotator) -> stored label record
        self.labels: dict[tuple[str, str], dict] = {}
        self._assigned: dict[str, set] = {}
        if self.journal_path.exists():
            with open(self.journal_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self.labels[(rec["task_id"], rec["annotator"])] = rec

    # -- task serving -------------------------------------------------------

    def next_task(self, annotator: str) -> dict | None:
        """Oldest task this annotator has neither labeled nor been served."""
        with self._lock:
            taken = self._assigned.setdefault(annotator, set())
            for task_id in self.order:
                if (task_id, annotator) in self.labels or task_id in taken:
                    continue
                taken.add(task_id)
                return self._render(task_id, annotator)
        return None

    def _render(self, task_id: str, annotator: str) -> dict:
        task = self.tasks[task_id]
        swapped = display_swapped(task_id, annotator, self.salt)
        first, second = ("c2", "c1") if swapped else ("c1", "c2")
        texts = {
            "c1": [t["text"] for t in task["c1_turns"]],
            "c2": [t["text"] for t in task["c2_turns"]],
        }
        return {
            "task_id": task_id,
            "context": task["context"],
            "display_order": [first, second],
            "left_turns": texts[first],
            "right_turns": texts[second],
        }

    # -- labeling --------------------------------------------------------------

    def submit(self, task_id: str, annotator: str, mu_left: float) -> dict:
        """Store a label where mu_left scores the displayed-left candidate."""
        if not isinstance(mu_left, (int, float)) or not 0.0 <= mu_left <= 1.0:
            raise LabelOutOfRange(f"mu must be in [0, 1], got {mu_left!r}")
        with self._lock:
            if task_id not in self.tasks:
                raise TaskNotFound(task_id)
            key = (task_id, annotator)
            if key in self.labels:
                raise DuplicateLabel(f"annotator {annotator!r} already labeled {task_id}")
            swapped = display_swapped(task_id, annotator, self.salt)
            mu_c1 = 1.0 - float(mu_left) if swapped else float(mu_left)
            record = {
                "task_id": task_id,
                "mu_c1": mu_c1,
                "annotator": annotator,
                "ts": time.time(),
            }
            with open(self.journal_path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
                fh.write("\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.labels[key] = record
            return record

    # -- progress -----------------------------------------------------------------

    def progress(self) -> dict:
        with self._lock:
            per_annotator: dict[str, int] = {}
            for (_task, annotator) in self.labels:
                per_annotator[annotator] = per_annotator.get(annotator, 0) + 1
            return {
                "total": len(self.tasks),
                "labeled": len(self.labels),
                "per_annotator": per_annotator,
            }
