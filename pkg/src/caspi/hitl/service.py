"""HTTP labeling service: task serving, label intake, progress."""

from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .store import DuplicateLabel, LabelOutOfRange, LabelStore, TaskNotFound

POOL_FILE = "hitl_pool.jsonl"
JOURNAL_FILE = "labels.jsonl"


class LabelBody(BaseModel):
    mu_c1: float
    annotator: str


def build_app(workdir, static_dir=None) -> FastAPI:
    workdir = Path(workdir)
    store = LabelStore(workdir / POOL_FILE, workdir / JOURNAL_FILE)
    app = FastAPI(title="caspi-hitl")
    app.state.store = store

    @app.get("/api/tasks/next")
    def next_task(annotator: str):
        task = store.next_task(annotator)
        if task is None:
            return Response(status_code=204)
        return task

    @app.post("/api/tasks/{task_id}/label", status_code=201)
    def label(task_id: str, body: LabelBody):
        try:
            record = store.submit(task_id, body.annotator, body.mu_c1)
        except LabelOutOfRange as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        except TaskNotFound:
            return JSONResponse({"error": f"unknown task {task_id}"}, status_code=404)
        except DuplicateLabel as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        return {"stored_mu_c1": record["mu_c1"], "task_id": task_id}

    @app.get("/api/progress")
    def progress():
        return store.progress()

    if static_dir is None:
        static_dir = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def serve(workdir, port: int = 8723, static_dir=None):
    import uvicorn

    uvicorn.run(build_app(workdir, static_dir), host="127.0.0.1", port=port)
