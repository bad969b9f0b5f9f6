"""Reverse-mode autodiff over a linear tape of array primitives.

Ops execute eagerly on float64 numpy buffers; each op appends a node to the
tape, so tape order is already a topological order and the backward pass is
a single reverse sweep. Nodes not on the path to the loss keep zero
adjoints and their backward rules are skipped.
"""

import numpy as np

from .kernels import gru_scan_bwd, gru_scan_fwd


class DiffkitError(Exception):
    pass


class ShapeError(DiffkitError):
    pass


class Node:
    __slots__ = ("idx", "value", "adjoint", "parents", "bwd", "param_name")

    def __init__(self, idx, value, parents=(), bwd=None, param_name=None):
        self.idx = idx
        self.value = value
        self.adjoint = None
        self.parents = parents
        self.bwd = bwd
        self.param_name = param_name

    @property
    def shape(self):
        return self.value.shape


def _softplus(x):
    # Stable: log(1 + exp(x)) = max(x, 0) + log1p(exp(-|x|))
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


class Tape:
    def __init__(self):
        self.nodes: list[Node] = []
        self._param_nodes: dict[str, Node] = {}
        self.grads: dict[str, np.ndarray] = {}

    # -- node creation ----------------------------------------------------

    def _append(self, value, parents=(), bwd=None, param_name=None):
        node = Node(len(self.nodes), np.asarray(value, dtype=np.float64), parents, bwd, param_name)
        self.nodes.append(node)
        return node

    def _fail(self, op, msg):
        raise ShapeError(f"op #{len(self.nodes)} {op}: {msg}")

    def input(self, array):
        return self._append(np.asarray(array, dtype=np.float64))

    def param(self, store, name):
        # One node per parameter per tape, so adjoints from repeated use
        # (e.g. two forward passes) accumulate in one place.
        if name in self._param_nodes:
            return self._param_nodes[name]
        node = self._append(store.get(name), param_name=name)
        self._param_nodes[name] = node
        return node

    # -- primitives --------------------------------------------------------

    def matmul(self, a, b):
        if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
            self._fail("matmul", f"expected (m,k)@(k,n), got {a.shape} @ {b.shape}")
        out = self._append(a.value @ b.value, (a, b))

        def bwd(g):
            return g @ b.value.T, a.value.T @ g

        out.bwd = bwd
        return out

    def _binary(self, op, a, b, fwd, da, db):
        bias = a.value.ndim == 2 and b.value.ndim == 1 and a.shape[1] == b.shape[0]
        if not bias and a.shape != b.shape:
            self._fail(op, f"operand shapes {a.shape} vs {b.shape}")
        out = self._append(fwd(a.value, b.value), (a, b))

        def bwd(g):
            ga = da(g)
            gb = db(g)
            if bias:
                gb = gb.sum(axis=0)
            return ga, gb

        out.bwd = bwd
        return out

    def add(self, a, b):
        return self._binary("add", a, b, np.add, lambda g: g, lambda g: g)

    def sub(self, a, b):
        return self._binary("sub", a, b, np.subtract, lambda g: g, lambda g: -g)

    def mul(self, a, b):
        if a.shape != b.shape:
            self._fail("mul", f"operand shapes {a.shape} vs {b.shape}")
        out = self._append(a.value * b.value, (a, b))
        out.bwd = lambda g: (g * b.value, g * a.value)
        return out

    def neg(self, a):
        out = self._append(-a.value, (a,))
        out.bwd = lambda g: (-g,)
        return out

    def scale(self, a, c):
        c = float(c)
        out = self._append(a.value * c, (a,))
        out.bwd = lambda g: (g * c,)
        return out

    def add_const(self, a, c):
        out = self._append(a.value + float(c), (a,))
        out.bwd = lambda g: (g,)
        return out

    def sigmoid(self, a):
        val = 1.0 / (1.0 + np.exp(-a.value))
        out = self._append(val, (a,))
        out.bwd = lambda g: (g * val * (1.0 - val),)
        return out

    def tanh(self, a):
        val = np.tanh(a.value)
        out = self._append(val, (a,))
        out.bwd = lambda g: (g * (1.0 - val * val),)
        return out

    def exp(self, a):
        val = np.exp(a.value)
        out = self._append(val, (a,))
        out.bwd = lambda g: (g * val,)
        return out

    def log(self, a):
        out = self._append(np.log(a.value), (a,))
        out.bwd = lambda g: (g / a.value,)
        return out

    def softplus(self, a):
        val = _softplus(a.value)
        out = self._append(val, (a,))
        sig = 1.0 / (1.0 + np.exp(-a.value))
        out.bwd = lambda g: (g * sig,)
        return out

    def relu(self, a):
        val = np.maximum(a.value, 0.0)
        out = self._append(val, (a,))
        out.bwd = lambda g: (g * (a.value > 0.0),)
        return out

    def softmax(self, a):
        if a.value.ndim not in (1, 2):
            self._fail("softmax", f"expected 1-d or 2-d input, got {a.shape}")
        shifted = a.value - a.value.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        val = e / e.sum(axis=-1, keepdims=True)
        out = self._append(val, (a,))

        def bwd(g):
            dot = (g * val).sum(axis=-1, keepdims=True)
            return (val * (g - dot),)

        out.bwd = bwd
        return out

    def concat(self, parts, axis=-1):
        vals = [p.value for p in parts]
        try:
            cat = np.concatenate(vals, axis=axis)
        except ValueError as exc:
            self._fail("concat", str(exc))
        out = self._append(cat, tuple(parts))
        sizes = [v.shape[axis] for v in vals]
        splits = np.cumsum(sizes)[:-1]

        def bwd(g):
            return tuple(np.split(g, splits, axis=axis))

        out.bwd = bwd
        return out

    def sum(self, a, axis=None):
        out = self._append(np.sum(a.value, axis=axis), (a,))
        shape = a.shape

        def bwd(g):
            if axis is None:
                return (np.full(shape, g),)
            return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

        out.bwd = bwd
        return out

    def mean(self, a):
        n = a.value.size
        out = self._append(np.asarray(a.value.mean()), (a,))
        out.bwd = lambda g: (np.full(a.shape, g / n),)
        return out

    def slice(self, a, key):
        out = self._append(a.value[key], (a,))

        def bwd(g):
            buf = np.zeros(a.shape)
            buf[key] = g
            return (buf,)

        out.bwd = bwd
        return out

    def gather(self, table, ids):
        """Row lookup into a 2-d table, the embedding primitive."""
        ids = np.asarray(ids, dtype=np.int64)
        if table.value.ndim != 2:
            self._fail("gather", f"table must be 2-d, got {table.shape}")
        if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
            self._fail("gather", f"id out of range for table of {table.shape[0]} rows")
        out = self._append(table.value[ids], (table,))

        def bwd(g):
            buf = np.zeros(table.shape)
            np.add.at(buf, ids.ravel(), g.reshape(-1, table.shape[1]))
            return (buf,)

        out.bwd = bwd
        return out

    def bigru(self, x, lengths, wx_f, wh_rz_f, wh_n_f, b_f, wx_b, wh_rz_b, wh_n_b, b_b):
        """Bidirectional gated recurrent scan over an embedded batch.

        x is (B, T, E); lengths (B,) gives valid prefixes. Returns the
        concatenated final states of both directions, shape (B, 2H).
        """
        if x.value.ndim != 3:
            self._fail("bigru", f"expected (B,T,E) input, got {x.shape}")
        bsz, tmax, emb = x.shape
        if wx_f.shape[0] != emb:
            self._fail("bigru", f"wx rows {wx_f.shape[0]} != embed dim {emb}")
        lengths = np.asarray(lengths, dtype=np.int64)
        if lengths.min() < 1 or lengths.max() > tmax:
            self._fail("bigru", "sequence lengths must be in [1, T]")
        hid = wh_n_f.shape[0]
        flat = x.value.reshape(bsz * tmax, emb)

        # Reverse each row's valid prefix so one scan kernel serves both
        # directions; the pad tail stays in place.
        rev_idx = np.arange(tmax)[None, :].repeat(bsz, axis=0)
        valid = rev_idx < lengths[:, None]
        rev_idx = np.where(valid, lengths[:, None] - 1 - rev_idx, rev_idx)
        x_rev = x.value[np.arange(bsz)[:, None], rev_idx]

        gx_f = (flat @ wx_f.value + b_f.value).reshape(bsz, tmax, -1)
        gx_b = (x_rev.reshape(bsz * tmax, emb) @ wx_b.value + b_b.value).reshape(
            bsz, tmax, -1
        )
        hs_f, r_f, z_f, n_f = gru_scan_fwd(gx_f, wh_rz_f.value, wh_n_f.value, lengths)
        hs_b, r_b, z_b, n_b = gru_scan_fwd(gx_b, wh_rz_b.value, wh_n_b.value, lengths)
        last = lengths - 1
        rows = np.arange(bsz)
        out_val = np.concatenate((hs_f[rows, last], hs_b[rows, last]), axis=1)
        parents = (x, wx_f, wh_rz_f, wh_n_f, b_f, wx_b, wh_rz_b, wh_n_b, b_b)
        out = self._append(out_val, parents)

        def bwd(g):
            grads = []
            dx = np.zeros_like(x.value)
            for d, (gx, hs, rg, zg, ng, wx, wh_rz, wh_n) in enumerate(
                (
                    (gx_f, hs_f, r_f, z_f, n_f, wx_f, wh_rz_f, wh_n_f),
                    (gx_b, hs_b, r_b, z_b, n_b, wx_b, wh_rz_b, wh_n_b),
                )
            ):
                dh_last = np.ascontiguousarray(g[:, d * hid : (d + 1) * hid])
                dgx = gru_scan_bwd(
                    dh_last,
                    gx,
                    np.ascontiguousarray(wh_rz.value.T),
                    np.ascontiguousarray(wh_n.value.T),
                    lengths,
                    hs,
                    rg,
                    zg,
                    ng,
                )
                hprev = np.zeros_like(hs)
                hprev[:, 1:] = hs[:, :-1]
                q = rg * hprev
                dgx_flat = dgx.reshape(bsz * tmax, -1)
                hp_flat = hprev.reshape(bsz * tmax, hid)
                xin = flat if d == 0 else x_rev.reshape(bsz * tmax, emb)
                dwx = xin.T @ dgx_flat
                dwh_rz = hp_flat.T @ dgx_flat[:, : 2 * hid]
                dwh_n = q.reshape(bsz * tmax, hid).T @ dgx_flat[:, 2 * hid :]
                db = dgx_flat.sum(axis=0)
                dxin = (dgx_flat @ wx.value.T).reshape(bsz, tmax, emb)
                if d == 0:
                    dx += dxin
                else:
                    # Un-reverse: position rev_idx[b,t] of the original row
                    # received input t of the reversed row. rev_idx is a
                    # permutation within each row, so plain indexing is safe.
                    dx[np.arange(bsz)[:, None], rev_idx] += dxin
                grads.extend([dwx, dwh_rz, dwh_n, db])
            return (dx, *grads[:4], *grads[4:])

        out.bwd = bwd
        return out

    # -- backward ----------------------------------------------------------

    def backward(self, node, seed=1.0):
        if not self.nodes:
            raise DiffkitError("backward before forward: tape is empty")
        if node.idx >= len(self.nodes) or node is not self.nodes[node.idx]:
            raise DiffkitError("backward target is not on this tape")
        if node.value.size != 1:
            raise DiffkitError(f"backward seed must be scalar, got shape {node.shape}")
        for n in self.nodes:
            n.adjoint = None
        node.adjoint = np.full(node.value.shape, float(seed))
        for n in reversed(self.nodes[: node.idx + 1]):
            if n.adjoint is None or n.bwd is None:
                continue
            parent_grads = n.bwd(n.adjoint)
            for parent, g in zip(n.parents, parent_grads):
                if parent.adjoint is None:
                    parent.adjoint = np.zeros(parent.shape)
                parent.adjoint += g
        self.grads = {
            name: (p.adjoint if p.adjoint is not None else np.zeros(p.shape))
            for name, p in self._param_nodes.items()
        }
        return self.grads
