"""Stage manifest: digests of inputs and outputs, atomic artifact writes."""

import hashlib
import json
import os
import time
from contextlib import contextmanager
from pathlib import Path


class ArtifactError(Exception):
    pass


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


@contextmanager
def atomic_output(path):
    """Yield a temp path; rename over the target only on success."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    yield tmp
    os.replace(tmp, path)


class Manifest:
    def __init__(self, workdir):
        self.workdir = Path(workdir)
        self.path = self.workdir / "manifest.jsonl"

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    def last_output_digest(self, name: str) -> str | None:
        digest = None
        for entry in self.entries():
            if name in entry.get("outputs", {}):
                digest = entry["outputs"][name]
        return digest

    def require_inputs(self, stage: str, names) -> dict[str, str]:
        """Check predecessor artifacts exist and are uncorrupted."""
        digests = {}
        for name in names:
            path = self.workdir / name
            if not path.exists():
                raise ArtifactError(
                    f"stage {stage!r} requires missing artifact {name!r}"
                )
            current = file_digest(path)
            recorded = self.last_output_digest(name)
            if recorded is not None and recorded != current:
                raise ArtifactError(
                    f"stage {stage!r}: artifact {name!r} is corrupt "
                    f"(recorded digest {recorded[:12]}, found {current[:12]})"
                )
            digests[name] = current
        return digests

    def record(self, stage, config_digest, seed, inputs, output_names, wall_clock):
        outputs = {n: file_digest(self.workdir / n) for n in output_names}
        entry = {
            "stage": stage,
            "config_digest": config_digest,
            "seed": seed,
            "inputs": inputs,
            "outputs": outputs,
            "wall_clock_s": round(wall_clock, 3),
        }
        with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
        return entry


@contextmanager
def workdir_lock(workdir):
    """Single-writer guard on a pipeline directory."""
    lock = Path(workdir) / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ArtifactError(
            f"pipeline directory {workdir} is locked by another run "
            f"(remove {lock} if stale)"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock)
        except FileNotFoundError:
            pass


def stage_timer():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
