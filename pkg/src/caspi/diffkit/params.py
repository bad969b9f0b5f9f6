"""Named parameter storage and binary checkpoint serialization."""

import struct

import numpy as np

MAGIC = b"CASPI-CKPT"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


class ParamStore:
    """Named float64 parameter tensors plus a global step counter.

    Shapes are fixed at creation time; ids are unique. Initialization is
    uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) from the store's seeded rng.
    """

    def __init__(self, seed: int = 0):
        self._params: dict[str, np.ndarray] = {}
        self.step = 0
        self._rng = np.random.default_rng(seed)

    def create(self, name: str, shape, fan_in: int) -> np.ndarray:
        if name in self._params:
            raise ValueError(f"parameter id {name!r} already exists")
        bound = 1.0 / np.sqrt(float(fan_in))
        arr = self._rng.uniform(-bound, bound, size=shape).astype(np.float64)
        self._params[name] = arr
        return arr

    def put(self, name: str, values: np.ndarray) -> np.ndarray:
        if name in self._params:
            raise ValueError(f"parameter id {name!r} already exists")
        arr = np.asarray(values, dtype=np.float64).copy()
        self._params[name] = arr
        return arr

    def get(self, name: str) -> np.ndarray:
        return self._params[name]

    def set_values(self, name: str, values: np.ndarray) -> None:
        arr = self._params[name]
        values = np.asarray(values, dtype=np.float64)
        if values.shape != arr.shape:
            raise ValueError(
                f"parameter {name!r} has shape {arr.shape}, got {values.shape}"
            )
        arr[...] = values

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def __contains__(self, name):
        return name in self._params

    def n_values(self) -> int:
        return sum(a.size for a in self._params.values())

    def copy(self) -> "ParamStore":
        clone = ParamStore()
        for name, arr in self._params.items():
            clone.put(name, arr)
        clone.step = self.step
        return clone

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(serialize(self))

    @classmethod
    def load(cls, path) -> "ParamStore":
        with open(path, "rb") as fh:
            return deserialize(fh.read())


def serialize(store: ParamStore) -> bytes:
    out = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(store._params))]
    for name, arr in store._params.items():
        ident = name.encode("utf-8")
        out.append(struct.pack("<I", len(ident)))
        out.append(ident)
        out.append(struct.pack("<I", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(out)


def deserialize(data: bytes) -> ParamStore:
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointError("bad magic string, not a checkpoint file")
    off = len(MAGIC)
    version, count = struct.unpack_from("<II", data, off)
    off += 8
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    store = ParamStore()
    for _ in range(count):
        (id_len,) = struct.unpack_from("<I", data, off)
        off += 4
        name = data[off : off + id_len].decode("utf-8")
        off += id_len
        (rank,) = struct.unpack_from("<I", data, off)
        off += 4
        shape = struct.unpack_from(f"<{rank}Q", data, off)
        off += 8 * rank
        size = int(np.prod(shape)) if rank else 1
        arr = np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(shape)
        off += 8 * size
        store.put(name, arr)
    if off != len(data):
        raise CheckpointError("trailing bytes after last parameter")
    return store
